import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from sgi_contrast import noise, qfho
from sgi_contrast.core import TimeGrid
from sgi_contrast.noise import NoiseSeries, White
from sgi_contrast.qfho import Branch, DriveSpec, Mode


def drive(mode, u, sigma=0.0, seed=0, steps=4096):
    g = TimeGrid(steps)
    ns = noise.synthesize(White(sigma), g, seed) if sigma else NoiseSeries.zeros(g)
    return DriveSpec(u, ns, mode)


def both(d):
    return qfho.solve_branch(d, Branch.LEFT), qfho.solve_branch(d, Branch.RIGHT)


def test_no_drive_stays_at_origin():
    l, _ = both(drive(Mode.SPIN_INDEPENDENT, 0.0))
    assert not np.any(l.zeta) and not np.any(l.phi)


def test_noise_free_trajectory():
    u = 1.7
    l, r = both(drive(Mode.SPIN_INDEPENDENT, u, steps=8192))
    tau = l.grid.tau
    # zeta(tau) = -u (e^{i tau} - 1) on the left arm
    np.testing.assert_allclose(l.zeta, -u * (np.exp(1j * tau) - 1), atol=2e-7 * u)
    np.testing.assert_allclose(r.zeta, u * (np.exp(1j * tau) - 1), atol=2e-7 * u)
    assert abs(l.zeta_final) < 1e-12
    assert l.phi_final == pytest.approx(2 * np.pi * u ** 2, rel=1e-7)


def test_phase_against_double_quadrature():
    # independent O(N^2)-free check: phi = int_0^T ds int_0^s dt g(s) g(t) sin(s - t)
    g = lambda t: 0.4 + 0.3 * np.cos(1.3 * t)
    ref = integrate.dblquad(lambda t, s: g(s) * g(t) * np.sin(s - t), 0, 2 * np.pi,
                            0, lambda s: s, epsabs=1e-13)[0]
    grid = TimeGrid(8192)
    d = DriveSpec(1.0, NoiseSeries(grid, g(grid.tau) - 1.0), Mode.SPIN_INDEPENDENT)
    sol = qfho.solve_branch(d, Branch.LEFT)
    assert sol.phi_final == pytest.approx(ref, rel=1e-7)
    zref = -1j * integrate.quad(lambda t: g(t) * np.cos(t), 0, 2 * np.pi)[0] \
        + integrate.quad(lambda t: g(t) * np.sin(t), 0, 2 * np.pi)[0]
    assert abs(sol.zeta_final - zref) < 1e-7


def test_batched_integration_matches_single():
    grid = TimeGrid(256)
    gs = np.random.default_rng(0).normal(size=(4, 257))
    zb, pb = qfho.integrate_drive(gs, grid.tau, full=False)
    for i in range(4):
        z, p = qfho.integrate_drive(gs[i], grid.tau)
        assert zb[i] == pytest.approx(z[-1], rel=1e-13)
        assert pb[i] == pytest.approx(p[-1], rel=1e-12, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32), u=st.floats(0.0, 300.0), sigma=st.floats(1e-6, 0.5))
def test_full_period_cancellation(seed, u, sigma):
    d = drive(Mode.SPIN_INDEPENDENT, u, sigma, seed)
    l, r = both(d)
    assert abs(l.zeta_final - r.zeta_final) < 1e-10 * (1 + np.max(np.abs(d.noise.values)))
    ov = qfho.overlap(l, r, 0.3 - 0.7j)
    assert abs(abs(ov.overlap_at_alpha) - 1) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32), u=st.floats(0.0, 300.0), sigma=st.floats(1e-6, 0.5))
def test_spin_dependent_phase_equality_and_antisymmetry(seed, u, sigma):
    d = drive(Mode.SPIN_DEPENDENT, u, sigma, seed)
    l, r = both(d)
    assert abs(l.phi_final - r.phi_final) < 1e-10 * (1 + u ** 2)
    assert np.array_equal(l.zeta, -r.zeta)
    assert qfho.overlap(l, r).bch_phase == 0.0


def test_second_order_convergence():
    vals = []
    for steps in (64, 128, 256, 512):
        grid = TimeGrid(steps)
        ns = NoiseSeries(grid, 0.2 * np.sin(3.1 * grid.tau) + 0.05 * grid.tau)
        s = qfho.solve_branch(DriveSpec(0.8, ns, Mode.SPIN_INDEPENDENT), Branch.LEFT)
        vals.append((s.zeta_final, s.phi_final))
    for k in (0, 1):
        d = [abs(vals[i][k] - vals[i + 1][k]) for i in range(3)]
        assert d[0] / d[1] == pytest.approx(4, rel=0.1)
        assert d[1] / d[2] == pytest.approx(4, rel=0.1)


def test_identical_arms_give_unit_overlap():
    d = drive(Mode.SPIN_INDEPENDENT, 0.0, 0.1, 1)
    l = qfho.solve_branch(d, Branch.LEFT)
    assert qfho.overlap(l, l, 1 + 1j).overlap_at_alpha == 1.0


def _pair(dz, dphi=0.0, steps=16):
    # two synthetic solutions with prescribed final zeta difference
    g = TimeGrid(steps)
    zl = np.zeros(steps + 1, complex)
    zr = np.zeros(steps + 1, complex)
    zl[-1], zr[-1] = dz / 2, -dz / 2
    pl = np.zeros(steps + 1)
    pl[-1] = dphi
    return (qfho.BranchSolution(Branch.LEFT, g, zl, pl),
            qfho.BranchSolution(Branch.RIGHT, g, zr, np.zeros(steps + 1)))


def test_vacuum_overlap_magnitude():
    l, r = _pair(0.3 + 0.4j, dphi=0.7)
    ov = qfho.overlap(l, r)
    assert abs(ov.overlap_at_alpha) == pytest.approx(math.exp(-0.125), rel=1e-15)
    assert np.angle(ov.overlap_at_alpha) == pytest.approx(0.7)


def test_thermal_beta_values():
    l, r = _pair(0.0, dphi=0.4)
    b = qfho.thermal_beta(l, r, 50).beta_thermal
    assert b == pytest.approx(np.exp(0.4j), rel=1e-15)
    l, r = _pair(0.1)
    assert qfho.thermal_beta(l, r, 100).beta_thermal == pytest.approx(math.exp(-1.005), rel=1e-14)
    assert qfho.thermal_beta(l, r, 0).beta_thermal == pytest.approx(math.exp(-0.005), rel=1e-14)
    with pytest.raises(ValueError):
        qfho.thermal_beta(l, r, -1)


def test_bch_phase_for_general_drive():
    grid = TimeGrid(64)
    za = np.zeros(65, complex)
    zb = np.zeros(65, complex)
    za[-1], zb[-1] = 1.0 + 0.5j, 0.2 - 0.3j
    a = qfho.BranchSolution(Branch.LEFT, grid, za, np.zeros(65))
    b = qfho.BranchSolution(Branch.RIGHT, grid, zb, np.zeros(65))
    ov = qfho.overlap(a, b)
    assert ov.bch_phase == pytest.approx((zb[-1] * np.conj(za[-1])).imag)
    assert ov.bch_phase != 0


@settings(max_examples=30, deadline=None)
@given(re=st.floats(-0.5, 0.5), im=st.floats(-0.5, 0.5), n=st.floats(0.0, 50.0),
       dphi=st.floats(-3, 3))
def test_alpha_average_matches_closed_form(re, im, n, dphi):
    l, r = _pair(complex(re, im), dphi)
    with warnings.catch_warnings():
        warnings.simplefilter("error", qfho.QuadratureWarning)
        num = qfho.alpha_average_numeric(l, r, n)
    ref = qfho.thermal_beta(l, r, n).beta_thermal
    assert abs(num - ref) <= 1e-8 * max(abs(ref), 1e-300) or abs(num - ref) < 1e-14


def test_alpha_average_degenerate_cases():
    l, r = _pair(0.0, 0.3)
    assert qfho.alpha_average_numeric(l, r, 7.0) == pytest.approx(np.exp(0.3j), abs=1e-10)
    l, r = _pair(0.2 - 0.1j, 0.3)
    assert qfho.alpha_average_numeric(l, r, 0.0) == qfho.overlap(l, r).overlap_at_alpha


def test_alpha_average_flags_nonconvergence():
    l, r = _pair(0.5)
    with pytest.warns(qfho.QuadratureWarning):
        qfho.alpha_average_numeric(l, r, 1e4, max_order=32)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32), sigma=st.floats(1e-4, 0.3))
def test_beta_monotone_in_occupation(seed, sigma):
    l, r = both(drive(Mode.SPIN_DEPENDENT, 5.0, sigma, seed, steps=256))
    mags = [abs(qfho.thermal_beta(l, r, n).beta_thermal) for n in (0, 0.5, 3, 40, 900)]
    assert all(b <= a for a, b in zip(mags, mags[1:]))
    assert mags[0] <= 1.0


def test_grid_mismatch_rejected():
    a = qfho.solve_branch(drive(Mode.SPIN_INDEPENDENT, 1.0, steps=64), Branch.LEFT)
    b = qfho.solve_branch(drive(Mode.SPIN_INDEPENDENT, 1.0, steps=32), Branch.RIGHT)
    with pytest.raises(ValueError):
        qfho.overlap(a, b)
    with pytest.raises(ValueError):
        qfho.solve_branch(drive(Mode.SPIN_INDEPENDENT, 1.0, steps=64), Branch.LEFT, TimeGrid(32))


def test_drive_spec():
    d = drive(Mode.SPIN_DEPENDENT, 2.0, 0.1, 3, steps=32)
    np.testing.assert_array_equal(d.drive(Branch.RIGHT), -(2.0 + d.noise.values))
    d = drive("spin-independent", 2.0, 0.1, 3, steps=32)
    np.testing.assert_array_equal(d.drive(Branch.RIGHT), -2.0 + d.noise.values)
    with pytest.raises(ValueError):
        drive(Mode.SPIN_DEPENDENT, -1.0)
    with pytest.raises(ValueError):
        Mode.parse("sideways")


def test_solution_csv(tmp_path):
    l, _ = both(drive(Mode.SPIN_INDEPENDENT, 1.0, steps=16))
    p = tmp_path / "sol.csv"
    qfho.write_solution_csv(l, p)
    lines = p.read_text().splitlines()
    assert lines[1] == "t,re_zeta,im_zeta,phi" and len(lines) == 19
