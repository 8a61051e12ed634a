"""Truncated number-basis propagator used as an independent oracle.

States are propagated under ``H(tau) = a^dag a + g(tau) (a + a^dag)`` with
no knowledge of displacement operators: each substep applies
``exp(-i h H(tau_mid))`` with the drive evaluated at the substep midpoint
(linear interpolation between grid nodes).  The exponential acts on the
state through a Taylor series of the tridiagonal generator, summed until the
next term falls below machine precision.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .core import TimeGrid
from .noise import NoiseSeries, White, synthesize
from .qfho import Branch, DriveSpec, Mode, overlap, solve_branch

__all__ = ["FockState", "PropagatorConfig", "TruncationError", "coherent_state",
           "propagate", "overlap_numeric", "OracleCase", "case_drive", "refined",
           "analytic_overlap", "numeric_overlaps", "run_oracle",
           "DEFAULT_MATRIX", "write_oracle_report"]

TOP_THRESHOLD = 1e-8


class TruncationError(RuntimeError):
    """The truncated basis is too small for the state being propagated."""


@dataclass(frozen=True)
class PropagatorConfig:
    dim: int = 128
    substeps: int = 8

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("dim must be >= 8")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


@dataclass(frozen=True)
class FockState:
    amplitudes: np.ndarray = field(repr=False)
    renorm_error: float = 0.0

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def top_population(self) -> float:
        return float(abs(self.amplitudes[-1]) ** 2)

    def expect_a(self) -> complex:
        c = self.amplitudes
        return complex(np.vdot(c[:-1], np.sqrt(np.arange(1, c.size)) * c[1:]))


def coherent_state(alpha: complex, dim: int) -> FockState:
    """``|alpha>`` expanded on ``dim`` number states.

    Requires ``|alpha|^2 <= dim/4``; the norm lost to truncation is
    reported as ``renorm_error`` and the state is left unnormalized.
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        raise TruncationError(f"|alpha|^2 = {abs(alpha)**2:.3g} exceeds dim/4 = {dim/4}")
    k = np.arange(dim)
    if alpha == 0:
        c = np.zeros(dim, complex)
        c[0] = 1.0
    else:
        logmag = -0.5 * abs(alpha) ** 2 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
        c = np.exp(logmag + 1j * k * np.angle(alpha))
    return FockState(c, renorm_error=1.0 - float(np.linalg.norm(c)))


def _apply_generator(psi, diag, off, g):
    # (a^dag a + g (a + a^dag)) psi; psi is (dim, m), g is (m,)
    out = diag[:, None] * psi
    out[:-1] += off[:, None] * (psi[1:] * g)
    out[1:] += off[:, None] * (psi[:-1] * g)
    return out


def _step(psi, diag, off, g, h):
    acc = psi.copy()
    term = psi
    scale = np.max(np.abs(psi))
    for k in range(1, 80):
        term = _apply_generator(term, diag, off, g) * (-1j * h / k)
        acc += term
        if np.max(np.abs(term)) <= 1e-17 * scale:
            break
    return acc


def _propagate_many(psi, g_nodes, tau, cfg: PropagatorConfig, check_every: int = 64):
    """Propagate the columns of ``psi`` (dim, m), column ``i`` driven by ``g_nodes[i]``."""
    dim = psi.shape[0]
    g_nodes = np.atleast_2d(g_nodes)
    diag = np.arange(dim, dtype=float)
    off = np.sqrt(np.arange(1, dim, dtype=float))
    s = cfg.substeps
    frac = (np.arange(s) + 0.5) / s
    for j in range(tau.size - 1):
        h = (tau[j + 1] - tau[j]) / s
        g0, g1 = g_nodes[:, j], g_nodes[:, j + 1]
        for f in frac:
            psi = _step(psi, diag, off, g0 + (g1 - g0) * f, h)
        if j % check_every == 0 or j == tau.size - 2:
            top = np.max(np.abs(psi[-1]) ** 2)
            if top > TOP_THRESHOLD:
                raise TruncationError(f"top level population {top:.2e} at node {j}; increase dim")
    return psi


def propagate(state: FockState, drive: DriveSpec, branch: Branch,
              grid: TimeGrid | None = None, cfg: PropagatorConfig = PropagatorConfig()) -> FockState:
    """Evolve ``state`` over one trap period on the arm ``branch``."""
    grid = drive.grid if grid is None else grid
    if grid != drive.grid:
        raise ValueError("drive noise lives on a different grid")
    if state.top_population > TOP_THRESHOLD:
        raise TruncationError("input state already populates the top level")
    psi = _propagate_many(state.amplitudes[:, None].astype(complex),
                          drive.drive(branch)[None, :], grid.tau, cfg)
    return FockState(psi[:, 0], renorm_error=state.renorm_error)


def overlap_numeric(left: FockState, right: FockState) -> complex:
    """``<right|left>``."""
    if left.dim != right.dim:
        raise ValueError("states have different dimensions")
    return complex(np.vdot(right.amplitudes, left.amplitudes))


@dataclass(frozen=True)
class OracleCase:
    name: str
    u: float
    alpha: complex
    sigma: float = 0.0
    mode: Mode = Mode.SPIN_INDEPENDENT
    seed: int = 11


# u <= 2, |alpha| <= 2, sigma <= 0.1
DEFAULT_MATRIX = (
    OracleCase("free-u0.5-a0", 0.5, 0.0),
    OracleCase("free-u1-a0.5", 1.0, 0.5),
    OracleCase("free-u2-a2", 2.0, 2.0),
    OracleCase("si-u1-s0.01", 1.0, 0.5, 1e-2, Mode.SPIN_INDEPENDENT),
    OracleCase("si-u2-s0.1", 2.0, 1.0 - 1.0j, 1e-1, Mode.SPIN_INDEPENDENT),
    OracleCase("sd-u1-s0.01", 1.0, 0.5, 1e-2, Mode.SPIN_DEPENDENT),
    OracleCase("sd-u2-s0.1", 2.0, 2.0j, 1e-1, Mode.SPIN_DEPENDENT),
    OracleCase("sd-u0.5-s0.1", 0.5, -1.5 + 0.5j, 1e-1, Mode.SPIN_DEPENDENT),
)


def case_drive(case: OracleCase, steps: int) -> DriveSpec:
    grid = TimeGrid(steps)
    if case.sigma > 0:
        noise = synthesize(White(case.sigma), grid, case.seed)
    else:
        noise = NoiseSeries.zeros(grid)
    return DriveSpec(case.u, noise, case.mode)


def refined(drive: DriveSpec, factor: int) -> DriveSpec:
    """Same piecewise-linear drive sampled on a grid ``factor`` times finer."""
    fine = TimeGrid(drive.grid.steps * factor, drive.grid.omega)
    values = np.interp(fine.tau, drive.grid.tau, drive.noise.values)
    return DriveSpec(drive.u, NoiseSeries(fine, values), drive.mode)


def analytic_overlap(case: OracleCase, steps: int, refine: int = 16) -> complex:
    drive = refined(case_drive(case, steps), refine)
    return overlap(solve_branch(drive, Branch.LEFT), solve_branch(drive, Branch.RIGHT),
                   case.alpha).overlap_at_alpha


def numeric_overlaps(matrix, steps: int, cfg: PropagatorConfig) -> list:
    """Propagate both arms of every case in one batched run."""
    grid = TimeGrid(steps)
    psi, g = [], []
    for case in matrix:
        drive = case_drive(case, steps)
        c = coherent_state(case.alpha, cfg.dim).amplitudes
        for b in (Branch.LEFT, Branch.RIGHT):
            psi.append(c)
            g.append(drive.drive(b))
    psi0 = np.array(psi, dtype=complex).T
    out = _propagate_many(psi0.copy(), np.array(g), grid.tau, cfg)
    res = []
    for i in range(len(matrix)):
        left, right = out[:, 2 * i], out[:, 2 * i + 1]
        drift = max(abs(np.linalg.norm(v) - np.linalg.norm(psi0[:, 2 * i])) for v in (left, right))
        res.append((complex(np.vdot(right, left)), drift))
    return res


def run_oracle(matrix=DEFAULT_MATRIX, cfg: PropagatorConfig = PropagatorConfig(),
               steps: int = 1024, refine: int = 16, tol: float = 1e-5,
               convergence_tol: float = 1e-6, check_convergence: bool = True) -> list:
    """Numeric vs analytic ``<psi_R|psi_L>`` for every case of ``matrix``.

    The drive between grid nodes is the linear interpolation of the noise
    samples; the analytic side integrates it on a ``refine`` times finer grid.
    With ``check_convergence`` the propagation is repeated with doubled
    ``dim`` and ``substeps`` and the shift of the numeric overlap recorded.
    """
    matrix = tuple(matrix)
    base = numeric_overlaps(matrix, steps, cfg)
    fine = (numeric_overlaps(matrix, steps, PropagatorConfig(2 * cfg.dim, 2 * cfg.substeps))
            if check_convergence else None)
    rows = []
    for i, case in enumerate(matrix):
        ana = analytic_overlap(case, steps, refine)
        num, drift = base[i]
        row = {"case": case.name, "u": case.u, "alpha": complex(case.alpha),
               "sigma": case.sigma, "mode": case.mode.value,
               "analytic": ana, "numeric": num, "abs_diff": abs(num - ana),
               "norm_drift": drift}
        row["passed"] = row["abs_diff"] < tol
        if fine is not None:
            row["refinement_shift"] = abs(fine[i][0] - num)
            row["passed"] = row["passed"] and row["refinement_shift"] < convergence_tol
        rows.append(row)
    return rows


def write_oracle_report(rows, path: str | Path):
    """JSON list of ``case, analytic, numeric, abs_diff, passed`` records."""
    def enc(v):
        if isinstance(v, complex):
            return {"re": v.real, "im": v.imag}
        if isinstance(v, (np.floating, np.bool_)):
            return v.item()
        return v
    doc = {"schema": "sgi-contrast/oracle-report/1",
           "cases": [{k: enc(v) for k, v in r.items()} for r in rows]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
