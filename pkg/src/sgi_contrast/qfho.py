"""Forced harmonic oscillator per interferometer arm.

In dimensionless time ``tau = omega t`` each arm evolves under
``H = a^dag a + g(tau) (a + a^dag)`` and, in the interaction picture, the
propagator is ``exp(i phi) D(zeta)`` with

    zeta(tau) = -i int_0^tau g(s) exp(i s) ds
    phi(tau)  = int_0^tau ds' int_0^s' ds'' g(s') g(s'') sin(s' - s'')

The Schroedinger-picture factor ``exp(-i tau a^dag a)`` is the identity at
``tau = 2 pi`` and cancels in every overlap.
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import TimeGrid
from .noise import NoiseSeries

__all__ = [
    "Mode", "Branch", "DriveSpec", "BranchSolution", "OverlapResult",
    "QuadratureWarning", "solve_branch", "integrate_drive", "overlap",
    "thermal_beta", "alpha_average_numeric", "write_solution_csv",
]


class Mode(enum.Enum):
    SPIN_INDEPENDENT = "spin-independent"
    SPIN_DEPENDENT = "spin-dependent"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        key = {"si": "spin-independent", "sd": "spin-dependent"}.get(key, key)
        for m in cls:
            if m.value == key or m.value.replace("-", "") == key.replace("-", ""):
                return m
        raise ValueError(f"unknown noise mode {value!r}")


class Branch(enum.IntEnum):
    LEFT = 1     # S_z = +1
    RIGHT = -1   # S_z = -1


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DriveSpec:
    """Coupling ``u`` plus one noise realization acting in ``mode``.

    Spin-independent: ``g = s*u + du``; spin-dependent: ``g = s*(u + du)``,
    with ``s = +1`` on the left arm and ``-1`` on the right arm.
    """

    u: float
    noise: NoiseSeries
    mode: Mode = Mode.SPIN_INDEPENDENT

    def __post_init__(self):
        if self.u < 0:
            raise ValueError("u must be >= 0")
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    @property
    def grid(self) -> TimeGrid:
        return self.noise.grid

    def drive(self, branch: Branch) -> np.ndarray:
        s = float(Branch(branch))
        du = self.noise.values
        if self.mode is Mode.SPIN_INDEPENDENT:
            return s * self.u + du
        return s * (self.u + du)


@dataclass(frozen=True)
class BranchSolution:
    branch: Branch
    grid: TimeGrid
    zeta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    @property
    def zeta_final(self) -> complex:
        return complex(self.zeta[-1])

    @property
    def phi_final(self) -> float:
        return float(self.phi[-1])


@dataclass(frozen=True)
class OverlapResult:
    delta_zeta: complex
    delta_phi: float
    bch_phase: float
    overlap_at_alpha: complex | None = None
    beta_thermal: complex | None = None


def _cumtrapz(f: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(f)
    np.cumsum(0.5 * dx * (f[..., 1:] + f[..., :-1]), axis=-1, out=out[..., 1:])
    return out


def integrate_drive(g: np.ndarray, tau: np.ndarray, full: bool = True):
    """Trapezoidal ``zeta`` and ``phi`` for drive samples ``g`` on uniform ``tau``.

    ``g`` may carry leading batch axes.  The double integral for ``phi`` is
    reduced to O(N) with the running sums ``C = int g cos`` and
    ``S = int g sin``: ``phi = int g(s) [sin(s) C(s) - cos(s) S(s)] ds``.
    Returns full time series, or only the final values when ``full`` is false.
    """
    g = np.asarray(g, dtype=float)
    dx = float(tau[1] - tau[0])
    c, s = np.cos(tau), np.sin(tau)
    C = _cumtrapz(g * c, dx)
    S = _cumtrapz(g * s, dx)
    inner = g * (s * C - c * S)
    if full:
        zeta = S - 1j * C
        phi = _cumtrapz(inner, dx)
        return zeta, phi
    w = np.full(tau.shape, dx)
    w[0] = w[-1] = 0.5 * dx
    return S[..., -1] - 1j * C[..., -1], inner @ w


def solve_branch(drive: DriveSpec, branch: Branch, grid: TimeGrid | None = None) -> BranchSolution:
    """Displacement ``zeta(tau)`` and phase ``phi(tau)`` for one arm."""
    grid = drive.grid if grid is None else grid
    if grid != drive.grid:
        raise ValueError("drive noise lives on a different grid")
    zeta, phi = integrate_drive(drive.drive(branch), grid.tau)
    return BranchSolution(Branch(branch), grid, zeta, phi)


def _arm_terms(solL: BranchSolution, solR: BranchSolution):
    if solL.grid != solR.grid:
        raise ValueError("branch solutions live on different grids")
    zp, zm = solL.zeta_final, solR.zeta_final
    dzeta = zp - zm
    dphi = solL.phi_final - solR.phi_final
    # D(-zeta_-) D(zeta_+) = exp(-i Im(zeta_- conj(zeta_+))) D(zeta_+ - zeta_-)
    bch = (zm * zp.conjugate()).imag
    return dzeta, dphi, bch


def overlap(solL: BranchSolution, solR: BranchSolution, alpha: complex = 0.0) -> OverlapResult:
    """``<psi_R|psi_L>`` for the initial coherent state ``|alpha>`` at one period."""
    dzeta, dphi, bch = _arm_terms(solL, solR)
    alpha = complex(alpha)
    expo = (1j * (dphi - bch) - 0.5 * abs(dzeta) ** 2
            + dzeta * alpha.conjugate() - dzeta.conjugate() * alpha)
    return OverlapResult(dzeta, dphi, bch, overlap_at_alpha=complex(np.exp(expo)))


def thermal_beta(solL: BranchSolution, solR: BranchSolution, n: float) -> OverlapResult:
    """Overlap averaged over the thermal coherent-state distribution of occupation ``n``."""
    if n < 0:
        raise ValueError("occupation must be >= 0")
    dzeta, dphi, bch = _arm_terms(solL, solR)
    beta = np.exp(1j * (dphi - bch) - (0.5 + n) * abs(dzeta) ** 2)
    return OverlapResult(dzeta, dphi, bch, beta_thermal=complex(beta))


def _gauss_hermite_average(dzeta, n, order):
    # alpha = sqrt(n) (x + i y), weight exp(-x^2 - y^2)/pi
    x, w = np.polynomial.hermite.hermgauss(order)
    a = math.sqrt(n) * (x[:, None] + 1j * x[None, :])
    phase = np.exp(dzeta * a.conjugate() - dzeta.conjugate() * a)
    return complex(np.sum(w[:, None] * w[None, :] * phase) / np.pi)


def alpha_average_numeric(solL: BranchSolution, solR: BranchSolution, n: float,
                          order: int = 32, max_order: int = 512, rtol: float = 1e-8) -> complex:
    """Thermal overlap by explicit 2D Gauss-Hermite quadrature over ``alpha``.

    The order doubles until two successive estimates agree to ``rtol``; a
    :class:`QuadratureWarning` is issued when ``max_order`` is reached first.
    """
    if n < 0:
        raise ValueError("occupation must be >= 0")
    base = overlap(solL, solR, 0.0).overlap_at_alpha
    if n == 0:
        return base
    dzeta = overlap(solL, solR).delta_zeta
    prev = _gauss_hermite_average(dzeta, n, order)
    while order < max_order:
        order *= 2
        cur = _gauss_hermite_average(dzeta, n, order)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return base * cur
        prev = cur
    warnings.warn(f"alpha quadrature not converged to {rtol} at order {order}",
                  QuadratureWarning, stacklevel=2)
    return base * prev


def write_solution_csv(sol: BranchSolution, path: str | Path):
    """Export as ``t,re_zeta,im_zeta,phi`` (t in seconds)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# branch={int(sol.branch)} steps={sol.grid.steps}\n")
        w = csv.writer(fh)
        w.writerow(["t", "re_zeta", "im_zeta", "phi"])
        for t, z, p in zip(sol.grid.times, sol.zeta, sol.phi):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag)), repr(float(p))])
