"""Property checks over all pipelines, as run by ``sgi-contrast validate``.

Each check returns a :class:`Check`; sizes are kept small enough for the
whole suite to finish in well under a minute.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from . import analytic, core, fock, montecarlo, noise, qfho
from .qfho import Branch, DriveSpec, Mode


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_trap_ratio():
    worst = 0.0
    for m, eta in [(1e-17, 1.4e4), (1e-15, 1e3), (3e-19, 5e5)]:
        t = core.derive_trap(core.PhysicalParams(mass=m, chi_rho=-6.2e-9, gradient=eta))
        worst = max(worst, abs(t.superposition / t.width / (4 * t.u) - 1))
    return Check("core: dz_max/dz = 4u", worst < 4e-16, f"max rel dev {worst:.2e}")


def check_trap_scaling():
    p = core.PhysicalParams(mass=1e-17, chi_rho=-6.2e-9, gradient=1.4e4, bias_field=0.3)
    a = core.derive_trap(p)
    b = core.derive_trap(replace(p, gradient=2 * p.gradient))
    ok = math.isclose(b.omega, 2 * a.omega, rel_tol=1e-15) and math.isclose(
        b.z0 * 2 * p.gradient, p.bias_field, rel_tol=1e-15)
    return Check("core: eta scaling", ok, f"omega ratio {b.omega / a.omega:.16f}")


def check_grid_sum():
    g = core.TimeGrid(4096, 1e3)
    total = float(np.sum(np.diff(g.times)))
    dev = abs(total / g.duration - 1)
    return Check("core: grid spans one period", dev < 1e-14, f"rel dev {dev:.1e}")


def check_noise_reproducible():
    grid = core.TimeGrid(256)
    models = [noise.White(0.1), noise.Lorentzian(0.1, 1.0), noise.Lorentzian(0.1, 1.0, omega0=1.0)]
    ok = all(np.array_equal(noise.synthesize(m, grid, 99, 3).values,
                            noise.synthesize(m, grid, 99, 3).values) for m in models)
    batch = noise.synthesize_batch(models[0], grid, 99, [0, 1, 2, 3])
    ok = ok and np.array_equal(batch[3], noise.synthesize(models[0], grid, 99, 3).values)
    return Check("noise: bit-identical regeneration", ok, "white/OU/spectral")


def check_lorentzian_roundtrip():
    worst = 0.0
    for gamma in (0.1, 1.0, 10.0):
        m = noise.Lorentzian(0.5, gamma)
        for tau in (0.0, 0.3, 1.7):
            ref = noise.autocorr(m, tau).value
            f = lambda x: noise.psd_eval(m, x)
            if tau == 0:
                num = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
            else:
                with warnings.catch_warnings():
                    # tiny tails (R ~ 1e-8) need an epsabs below QUADPACK's comfort zone
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    num = integrate.quad(f, 0, np.inf, weight="cos", wvar=tau,
                                         limlst=200, epsabs=1e-15)[0]
            worst = max(worst, abs(num / ref - 1))
    return Check("noise: Lorentzian PSD <-> autocorrelation", worst < 1e-6, f"max rel dev {worst:.1e}")


def check_gaussianity():
    from scipy import stats
    grid = core.TimeGrid(64)
    data = noise.synthesize_batch(noise.Lorentzian(1.0, 1.0), grid, 5, range(10_000))
    col = data[:, 17]
    sk, ku = float(stats.skew(col)), float(stats.kurtosis(col))
    return Check("noise: Gaussian marginals", abs(sk) < 0.1 and abs(ku) < 0.2,
                 f"skew {sk:+.3f}, excess kurtosis {ku:+.3f}")


def _random_drive(mode, u, seed, steps=4096, sigma=0.05):
    grid = core.TimeGrid(steps)
    return DriveSpec(u, noise.synthesize(noise.White(sigma), grid, seed), mode)


def check_full_period_cancellation():
    worst = 0.0
    for seed in range(5):
        d = _random_drive(Mode.SPIN_INDEPENDENT, 100.0, seed)
        zl = qfho.solve_branch(d, Branch.LEFT).zeta_final
        zr = qfho.solve_branch(d, Branch.RIGHT).zeta_final
        worst = max(worst, abs(zl - zr) / (1 + np.max(np.abs(d.noise.values))))
    return Check("qfho: spin-independent zeta cancellation", worst < 1e-10, f"max {worst:.1e}")


def check_phase_equality():
    worst, anti = 0.0, True
    for seed in range(5):
        d = _random_drive(Mode.SPIN_DEPENDENT, 100.0, seed)
        l, r = qfho.solve_branch(d, Branch.LEFT), qfho.solve_branch(d, Branch.RIGHT)
        worst = max(worst, abs(l.phi_final - r.phi_final) / (1 + d.u ** 2))
        anti = anti and np.array_equal(l.zeta, -r.zeta)
    return Check("qfho: spin-dependent phase equality / antisymmetry", worst < 1e-10 and anti,
                 f"max dphi/(1+u^2) {worst:.1e}, exact antisymmetry {anti}")


def check_richardson():
    # smooth drive: trapezoid error must fall ~4x per halving of dtau
    errs = []
    for steps in (64, 128, 256, 512):
        grid = core.TimeGrid(steps)
        d = DriveSpec(1.0, noise.NoiseSeries(grid, 0.3 * np.cos(2.3 * grid.tau) + 0.1), Mode.SPIN_INDEPENDENT)
        s = qfho.solve_branch(d, Branch.LEFT)
        errs.append((s.zeta_final, s.phi_final))
    r = [abs(errs[i][0] - errs[i + 1][0]) / abs(errs[i + 1][0] - errs[i + 2][0]) for i in range(2)]
    ok = all(3.5 < x < 4.5 for x in r)
    return Check("qfho: second-order convergence", ok, f"zeta ratios {r[0]:.2f}, {r[1]:.2f}")


def check_beta_monotone_in_n():
    d = _random_drive(Mode.SPIN_DEPENDENT, 10.0, 3, steps=512)
    l, r = qfho.solve_branch(d, Branch.LEFT), qfho.solve_branch(d, Branch.RIGHT)
    mags = [abs(qfho.thermal_beta(l, r, n).beta_thermal) for n in (0, 1, 10, 100, 1000)]
    return Check("qfho: |beta| non-increasing in n", all(np.diff(mags) <= 0), f"{mags[0]:.4f}..{mags[-1]:.4f}")


def check_quadrature_identities():
    vals = {
        "dephase": (analytic.response_integral(noise.White(1.0), analytic.Dephase(1.0))[0],
                    32 / np.pi * 3 * np.pi ** 2 / 4),
        "re": (analytic.response_integral(noise.White(1.0), analytic.MismatchRe())[0], 4 * np.pi ** 2),
        "im": (analytic.response_integral(noise.White(1.0), analytic.MismatchIm())[0], 4 * np.pi ** 2),
    }
    worst = max(abs(a / b - 1) for a, b in vals.values())
    return Check("analytic: white-noise integral identities", worst < 1e-6, f"max rel dev {worst:.1e}")


def check_contrast_monotone():
    sig = np.logspace(-5, -1, 9)
    si = [analytic.gamma_spin_independent(noise.Lorentzian(s, 1.0), 100).contrast for s in sig]
    sd = [analytic.contrast_spin_dependent(noise.White(1e-2), n).contrast for n in (0, 1, 10, 100)]
    ok = np.all(np.diff(si) <= 0) and np.all(np.diff(sd) <= 0)
    g1 = analytic.gamma_spin_independent(noise.Lorentzian(1e-3, 1.0), 100).gamma
    g10 = analytic.gamma_spin_independent(noise.Lorentzian(1e-3, 10.0), 100).gamma
    return Check("analytic: contrast monotone in sigma and n; Gamma(10) < Gamma(1)",
                 bool(ok) and g10 < g1, f"Gamma(1)={g1:.3g}, Gamma(10)={g10:.3g}")


def check_mc_reproducible():
    cfg = montecarlo.McConfig(noise.White(1e-3), Mode.SPIN_DEPENDENT, u=10, n=5, runs=600, steps=256,
                              master_seed=42)
    a = montecarlo.run_ensemble(cfg)
    b = montecarlo.run_ensemble(cfg, workers=3)
    ok = montecarlo.summary_record(a) == montecarlo.summary_record(b)
    return Check("montecarlo: schedule-independent results", ok, f"contrast {a.contrast:.6f}")


def check_mc_properties():
    si = montecarlo.run_ensemble(montecarlo.McConfig(noise.White(1e-3), Mode.SPIN_INDEPENDENT, u=100,
                                                     n=100, runs=500, steps=4096, master_seed=1))
    sd = montecarlo.run_ensemble(montecarlo.McConfig(noise.White(1e-2), Mode.SPIN_DEPENDENT, u=100,
                                                     n=100, runs=500, steps=4096, master_seed=1))
    ok = (si.max_abs_beta <= 1 + 1e-12 and sd.max_abs_beta <= 1 + 1e-12
          and abs(1 - si.min_abs_overlap) < 1e-8 and sd.max_abs_dphi < 1e-8 * (1 + 100 ** 2))
    return Check("montecarlo: unitarity, no mismatch (SI), no dephasing (SD)", ok,
                 f"1-min|ov| {1 - si.min_abs_overlap:.1e}, max|dphi| SD {sd.max_abs_dphi:.1e}")


def check_mc_stderr_scaling():
    ses = []
    for runs in (100, 1000, 10_000):
        cfg = montecarlo.McConfig(noise.White(1e-2), Mode.SPIN_DEPENDENT, u=1, n=100, runs=runs,
                                  steps=64, master_seed=8)
        ses.append(montecarlo.run_ensemble(cfg).contrast_se)
    r = [ses[i] / ses[i + 1] for i in range(2)]
    ok = all(abs(x / math.sqrt(10) - 1) < 0.25 for x in r)
    return Check("montecarlo: stderr ~ runs^-1/2", ok, f"ratios {r[0]:.2f}, {r[1]:.2f} (expect 3.16)")


def check_fock_small():
    rows = fock.run_oracle(fock.DEFAULT_MATRIX[:1] + fock.DEFAULT_MATRIX[5:6],
                           cfg=fock.PropagatorConfig(64, 4), steps=256, tol=1e-4,
                           check_convergence=False)
    worst = max(r["abs_diff"] for r in rows)
    drift = max(r["norm_drift"] for r in rows)
    return Check("fock: oracle agreement (small) and norm conservation",
                 worst < 1e-4 and drift < 1e-10, f"max |diff| {worst:.1e}, norm drift {drift:.1e}")


ALL_CHECKS = (
    check_trap_ratio, check_trap_scaling, check_grid_sum,
    check_noise_reproducible, check_lorentzian_roundtrip, check_gaussianity,
    check_full_period_cancellation, check_phase_equality, check_richardson,
    check_beta_monotone_in_n, check_quadrature_identities, check_contrast_monotone,
    check_mc_reproducible, check_mc_properties, check_mc_stderr_scaling, check_fock_small,
)


def run_all(checks=ALL_CHECKS):
    results = []
    for fn in checks:
        try:
            results.append(fn())
        except Exception as exc:  # a crashing check is a failed check
            results.append(Check(fn.__name__, False, f"{type(exc).__name__}: {exc}"))
    return results
