"""Trajectory-level ensemble estimate of the effective contrast.

Every run draws one noise realization (stream ``r`` of ``master_seed``),
integrates both arms and evaluates the thermally averaged overlap in closed
form.  The ensemble mean of these overlaps is the effective contrast.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import ContrastResult
from .core import TimeGrid
from .noise import CONVENTIONS, Lorentzian, PsdModel, Tabulated, White, synthesize_batch
from .qfho import Mode, integrate_drive

__all__ = ["McConfig", "McSummary", "ComparisonReport", "IndependenceReport",
           "run_ensemble", "compare_analytic", "thermal_independence_check",
           "write_summary_json", "write_runs_csv"]

BATCH = 256


@dataclass(frozen=True)
class McConfig:
    psd: PsdModel
    mode: Mode = Mode.SPIN_INDEPENDENT
    u: float = 1.0
    n: float = 0.0
    runs: int = 10_000
    steps: int = 4096
    master_seed: int = 0
    convention: str = "standard"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.runs < 2:
            raise ValueError("need at least two runs for error bars")
        if self.steps < 16:
            raise ValueError("grid needs at least 16 steps")
        if self.u < 0 or self.n < 0:
            raise ValueError("u and n must be >= 0")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.steps, self.psd.omega)


@dataclass(frozen=True)
class McSummary:
    config: McConfig
    mean_beta: complex
    mean_beta_se: float
    contrast: float
    contrast_se: float
    gamma_hat: float
    gamma_se: float
    mean_re2: float
    mean_re2_se: float
    mean_im2: float
    mean_im2_se: float
    max_abs_dzeta: float
    max_abs_dphi: float
    min_abs_overlap: float
    max_abs_beta: float
    per_run: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def runs(self) -> int:
        return self.config.runs

    @property
    def seed(self) -> int:
        return self.config.master_seed


def _run_batch(cfg: McConfig, grid: TimeGrid, streams):
    du = synthesize_batch(cfg.psd, grid, cfg.master_seed, streams, convention=cfg.convention)
    if cfg.mode is Mode.SPIN_INDEPENDENT:
        g_plus, g_minus = cfg.u + du, -cfg.u + du
    else:
        g_plus = cfg.u + du
        g_minus = -g_plus
    zp, pp = integrate_drive(g_plus, grid.tau, full=False)
    zm, pm = integrate_drive(g_minus, grid.tau, full=False)
    dzeta = zp - zm
    dphi = pp - pm
    bch = (zm * zp.conj()).imag
    abs2 = dzeta.real ** 2 + dzeta.imag ** 2
    arm = 1j * (dphi - bch)
    beta = np.exp(arm - (0.5 + cfg.n) * abs2)
    # |<psi_R|psi_L>| is alpha independent
    ov = np.exp(-0.5 * abs2)
    return dict(beta=beta, dphi=dphi, dzeta=dzeta, bch=bch, abs_overlap=ov)


def _ensemble_arrays(cfg: McConfig, workers: int = 1) -> dict:
    grid = cfg.grid
    chunks = [range(s, min(s + BATCH, cfg.runs)) for s in range(0, cfg.runs, BATCH)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: _run_batch(cfg, grid, c), chunks))
    else:
        parts = [_run_batch(cfg, grid, c) for c in chunks]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _mean_se(x):
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def _variance_se(x):
    # standard error of the sample variance from the fourth central moment
    m = x.size
    d = x - x.mean()
    s2 = float(np.sum(d * d) / (m - 1))
    m4 = float(np.mean(d ** 4))
    se2 = max(m4 - s2 * s2 * (m - 3) / (m - 1), 0.0) / m
    return s2, math.sqrt(se2)


def run_ensemble(cfg: McConfig, workers: int = 1, keep_runs: bool = False) -> McSummary:
    """Monte Carlo estimate of ``E[beta]`` and the noise diagnostics.

    Results depend only on ``cfg``: run ``r`` always uses noise stream ``r``
    and the reduction is an ordered sum over run index, so ``workers`` does
    not change a single bit of the output.

    Raises
    ------
    RuntimeError
        If a spin-dependent run shows a phase difference beyond
        ``1e-8 (1 + u^2)``; such a phase cannot arise from this noise model.
    """
    a = _ensemble_arrays(cfg, workers)
    beta = a["beta"]
    m = beta.size
    br, bi = beta.real, beta.imag
    mean_beta = complex(br.mean(), bi.mean())
    vr, vi = br.var(ddof=1), bi.var(ddof=1)
    cov = float(np.cov(br, bi)[0, 1])
    mean_beta_se = math.sqrt((vr + vi) / m)
    c = abs(mean_beta)
    if c > 0:
        c_var = (mean_beta.real ** 2 * vr + mean_beta.imag ** 2 * vi
                 + 2 * mean_beta.real * mean_beta.imag * cov) / (c * c)
        contrast_se = math.sqrt(max(c_var, 0.0) / m)
    else:
        contrast_se = mean_beta_se

    dphi, dzeta = a["dphi"], a["dzeta"]
    gamma_hat, gamma_se = _variance_se(dphi)
    re2, re2_se = _mean_se(dzeta.real ** 2)
    im2, im2_se = _mean_se(dzeta.imag ** 2)
    max_dphi = float(np.max(np.abs(dphi)))
    if cfg.mode is Mode.SPIN_DEPENDENT and max_dphi > 1e-8 * (1.0 + cfg.u ** 2):
        raise RuntimeError(f"spin-dependent run with phase difference {max_dphi:.3g}")

    per_run = {}
    if keep_runs:
        per_run = dict(beta=beta, dphi=dphi, dzeta=dzeta)
    return McSummary(
        config=cfg, mean_beta=mean_beta, mean_beta_se=mean_beta_se,
        contrast=c, contrast_se=contrast_se,
        gamma_hat=gamma_hat, gamma_se=gamma_se,
        mean_re2=re2, mean_re2_se=re2_se, mean_im2=im2, mean_im2_se=im2_se,
        max_abs_dzeta=float(np.max(np.abs(dzeta))), max_abs_dphi=max_dphi,
        min_abs_overlap=float(np.min(a["abs_overlap"])),
        max_abs_beta=float(np.max(np.abs(beta))), per_run=per_run)


@dataclass(frozen=True)
class ComparisonReport:
    z: dict
    passed: bool
    threshold: float = 3.0

    def lines(self):
        return [f"{k}: z = {v:+.3f}" for k, v in self.z.items()]


def _z(est, se, ref):
    diff = est - ref
    if se == 0.0:
        return 0.0 if abs(diff) <= 1e-15 * max(abs(ref), 1.0) else math.copysign(math.inf, diff)
    return diff / se


def _same_psd(a, b) -> bool:
    return a is None or b is None or a == b


def compare_analytic(summary: McSummary, analytic: ContrastResult,
                     threshold: float = 3.0) -> ComparisonReport:
    """z-scores of the Monte Carlo estimates against the analytic pipeline.

    Spin-independent runs compare Gamma and the contrast; spin-dependent runs
    compare both mismatch variances and the contrast.
    """
    cfg = summary.config
    if analytic.mode is not None and analytic.mode is not cfg.mode:
        raise ValueError("analytic result was computed for a different noise mode")
    if analytic.convention != cfg.convention:
        raise ValueError("analytic result was computed under a different PSD convention")
    if not _same_psd(analytic.psd, cfg.psd):
        raise ValueError("analytic result was computed for a different PSD")
    if cfg.mode is Mode.SPIN_INDEPENDENT and analytic.u is not None and analytic.u != cfg.u:
        raise ValueError("analytic result was computed for a different u")
    if cfg.mode is Mode.SPIN_DEPENDENT and analytic.n is not None and analytic.n != cfg.n:
        raise ValueError("analytic result was computed for a different occupation")

    if cfg.mode is Mode.SPIN_INDEPENDENT:
        z = {"gamma": _z(summary.gamma_hat, summary.gamma_se, analytic.gamma)}
    else:
        z = {"var_re": _z(summary.mean_re2, summary.mean_re2_se, analytic.var_re),
             "var_im": _z(summary.mean_im2, summary.mean_im2_se, analytic.var_im)}
    z["contrast"] = _z(summary.contrast, summary.contrast_se, analytic.contrast)
    return ComparisonReport(z=z, passed=all(abs(v) <= threshold for v in z.values()),
                            threshold=threshold)


@dataclass(frozen=True)
class IndependenceReport:
    n_values: tuple
    max_abs_diff: float
    passed: bool


def thermal_independence_check(cfg: McConfig, n1: float, tol: float = 1e-12) -> IndependenceReport:
    """Per-run overlaps at ``n = 0`` and ``n = n1`` from identical noise streams."""
    if cfg.mode is not Mode.SPIN_INDEPENDENT:
        raise ValueError("thermal independence only holds for spin-independent noise")
    b0 = _ensemble_arrays(replace(cfg, n=0.0))["beta"]
    b1 = _ensemble_arrays(replace(cfg, n=float(n1)))["beta"]
    diff = float(np.max(np.abs(b0 - b1)))
    return IndependenceReport(n_values=(0.0, float(n1)), max_abs_diff=diff, passed=diff < tol)


def _psd_record(psd) -> dict:
    if isinstance(psd, White):
        return {"model": "white", "sigma": psd.sigma, "omega": psd.omega}
    if isinstance(psd, Lorentzian):
        return {"model": "lorentzian", "sigma": psd.sigma, "gamma": psd.gamma,
                "omega0": psd.omega0, "omega": psd.omega}
    if isinstance(psd, Tabulated):
        return {"model": "tabulated", "rows": len(psd.frequency), "omega": psd.omega}
    return {"model": repr(psd)}


def summary_record(s: McSummary) -> dict:
    cfg = s.config
    return {
        "schema": "sgi-contrast/mc-summary/1",
        "config": {"mode": cfg.mode.value, "u": cfg.u, "n": cfg.n, "runs": cfg.runs,
                   "steps": cfg.steps, "master_seed": cfg.master_seed,
                   "convention": cfg.convention, "psd": _psd_record(cfg.psd)},
        "mean_beta": {"re": s.mean_beta.real, "im": s.mean_beta.imag, "se": s.mean_beta_se},
        "contrast": {"value": s.contrast, "se": s.contrast_se},
        "gamma": {"value": s.gamma_hat, "se": s.gamma_se},
        "re2_dzeta": {"value": s.mean_re2, "se": s.mean_re2_se},
        "im2_dzeta": {"value": s.mean_im2, "se": s.mean_im2_se},
        "diagnostics": {"max_abs_dzeta": s.max_abs_dzeta, "max_abs_dphi": s.max_abs_dphi,
                        "min_abs_overlap": s.min_abs_overlap, "max_abs_beta": s.max_abs_beta},
    }


def write_summary_json(s: McSummary, path: str | Path):
    """Single JSON document, schema ``sgi-contrast/mc-summary/1``."""
    Path(path).write_text(json.dumps(summary_record(s), indent=2) + "\n", encoding="utf-8")


def write_runs_csv(s: McSummary, path: str | Path):
    """Per-run table ``run,re_beta,im_beta,dphi,re_dzeta,im_dzeta``."""
    if not s.per_run:
        raise ValueError("summary was computed without keep_runs=True")
    b, p, z = s.per_run["beta"], s.per_run["dphi"], s.per_run["dzeta"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "re_beta", "im_beta", "dphi", "re_dzeta", "im_dzeta"])
        for r in range(b.size):
            w.writerow([r, repr(float(b[r].real)), repr(float(b[r].imag)), repr(float(p[r])),
                        repr(float(z[r].real)), repr(float(z[r].imag))])
