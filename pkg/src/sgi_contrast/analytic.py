"""Closed-form and quadrature contrast pipeline.

Dimensionless frequency ``x = Omega/omega``.  Transfer functions:

* dephasing  ``F(x)    = (32 u^2/pi) sin^2(pi x) / (x^3 - x)^2``
* location   ``F_re(x) = 16 sin^2(pi x) / (x^2 - 1)^2``
* momentum   ``F_im(x) = 16 sin^2(pi x) / (x - 1/x)^2``

and ``Gamma = int_0^inf S(Omega) F(Omega/omega) dOmega`` (likewise for the
mismatch variances).  ``convention="wk2pi"`` multiplies every such integral
by ``1/(2 pi)``, the alternative Wiener-Khinchin normalization; the default
``"standard"`` uses ``R(tau) = int_0^inf S(Omega) cos(Omega tau) dOmega``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .noise import PsdModel, Tabulated, White, _kappa, psd_eval
from .qfho import Mode, QuadratureWarning

__all__ = [
    "Dephase", "MismatchRe", "MismatchIm", "TransferKind", "ContrastResult",
    "transfer_eval", "response_integral", "gamma_spin_independent",
    "mismatch_variances", "contrast_spin_dependent", "contrast",
    "tolerance_solve",
]

SERIES_RADIUS = 1e-3
X_CUTOFF = 40.0


@dataclass(frozen=True)
class Dephase:
    u: float

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError("u must be positive")


@dataclass(frozen=True)
class MismatchRe:
    pass


@dataclass(frozen=True)
class MismatchIm:
    pass


TransferKind = Dephase | MismatchRe | MismatchIm


def _sinc_series(h):
    # sin(pi h)/(pi h) to O(h^8)
    z = (np.pi * h) ** 2
    return 1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0)))


def _sinc(h, series):
    return _sinc_series(h) if series else np.sinc(h)


def _prefactor(kind) -> float:
    return 32.0 * kind.u ** 2 / np.pi if isinstance(kind, Dephase) else 16.0


def _transfer_near(kind, x, x0, series=True):
    # sin(pi x) = +-pi h sinc(h), h = x - x0, cancels the removable zero at x0
    h = x - x0
    s = np.pi * _sinc(h, series)
    if x0 == 0.0:
        if isinstance(kind, Dephase):
            q = s / (x * x - 1.0)
        elif isinstance(kind, MismatchRe):
            q = s * x / (x * x - 1.0)
        else:
            q = s * x * x / (x * x - 1.0)
    else:
        if isinstance(kind, Dephase):
            q = s / (x * (x + 1.0))
        elif isinstance(kind, MismatchRe):
            q = s / (x + 1.0)
        else:
            q = s * x / (x + 1.0)
    return _prefactor(kind) * q * q


def _transfer_direct(kind, x):
    x = np.asarray(x, dtype=float)
    s2 = np.sin(np.pi * x) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(kind, Dephase):
            return _prefactor(kind) * s2 / (x ** 3 - x) ** 2
        if isinstance(kind, MismatchRe):
            return 16.0 * s2 / (x * x - 1.0) ** 2
        return 16.0 * s2 / (x - 1.0 / x) ** 2


def transfer_eval(kind, x):
    """Transfer function at ``x >= 0`` with the removable points patched.

    Within ``SERIES_RADIUS`` of ``x = 0`` and ``x = 1`` the vanishing factor
    ``sin(pi x)`` is divided out analytically (series for ``sin(pi h)/(pi h)``).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("transfer functions are defined for x >= 0")
    out = np.asarray(_transfer_direct(kind, x), dtype=float)
    for x0 in (0.0, 1.0):
        near = np.abs(x - x0) < SERIES_RADIUS
        if np.any(near):
            out = np.where(near, _transfer_near(kind, np.where(near, x, x0 + 0.5 * SERIES_RADIUS), x0), out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ContrastResult:
    """Outcome of one contrast evaluation.

    ``gamma`` is the dephasing variance, ``var_re``/``var_im`` the variances of
    the location/momentum mismatch.  ``error`` is the quadrature (or
    statistical) error estimate on the reported numbers.  ``convention`` is
    the PSD normalization the numbers were computed under.
    """

    gamma: float = 0.0
    var_re: float = 0.0
    var_im: float = 0.0
    beta: complex = 1.0
    contrast: float = 1.0
    method: str = "closed-form"
    error: float = 0.0
    converged: bool = True
    mode: Optional[Mode] = None
    psd: Optional[PsdModel] = None
    u: Optional[float] = None
    n: Optional[float] = None
    convention: str = "standard"


def _rational(kind, x):
    # transfer function with sin^2(pi x) removed; used for the oscillatory tail
    if isinstance(kind, Dephase):
        return _prefactor(kind) / (x ** 3 - x) ** 2
    if isinstance(kind, MismatchRe):
        return 16.0 / (x * x - 1.0) ** 2
    return 16.0 / (x - 1.0 / x) ** 2


def response_integral(psd: PsdModel, kind, tol_scale: float = 1.0):
    """``int_0^inf S(Omega) F(Omega/omega) dOmega`` by adaptive quadrature.

    ``[0, 40]`` (in ``x``) is integrated panel-wise with breakpoints at every
    integer, the transfer function patched near 0 and 1.  Beyond ``x = 40``
    the identity ``sin^2 = (1 - cos(2 pi x))/2`` splits the tail into a plain
    and a Fourier (QAWF) integral.  Tabulated PSDs have compact support and
    are integrated by composite Gauss-Legendre over the table segments.
    Returns ``(value, abserr, converged)``.
    """
    if isinstance(psd, Tabulated):
        return _tabulated_integral(psd, kind, tol_scale)
    w = psd.omega
    epsabs = 1e-10 * tol_scale

    def f(x):
        return float(psd_eval(psd, x * w)) * w * transfer_eval(kind, x)

    def g(x):
        return float(psd_eval(psd, x * w)) * w * _rational(kind, x) * 0.5

    total, err, ok = 0.0, 0.0, True
    edges = np.arange(int(X_CUTOFF) + 1, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                val, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=200)
            except integrate.IntegrationWarning:
                val, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=200,
                                        full_output=1)[:2]
                ok = False
            total += val
            err += e
        try:
            smooth, e1 = integrate.quad(g, X_CUTOFF, np.inf, epsabs=epsabs, epsrel=1e-10, limit=200)
            osc, e2 = integrate.quad(g, X_CUTOFF, np.inf, weight="cos", wvar=2.0 * np.pi,
                                     limlst=200)
        except integrate.IntegrationWarning:
            smooth, e1 = integrate.quad(g, X_CUTOFF, np.inf, limit=200, full_output=1)[:2]
            osc, e2 = integrate.quad(g, X_CUTOFF, np.inf, weight="cos", wvar=2.0 * np.pi,
                                     full_output=1)[:2]
            ok = False
        total += smooth - osc
        err += e1 + e2
    return total, err, ok


def _tabulated_integral(psd: Tabulated, kind, tol_scale: float):
    # piecewise-linear S with compact support: composite Gauss-Legendre on the
    # segments between table nodes and integer x, error from a lower-order rule
    w = psd.omega
    f = np.asarray(psd.frequency) / w
    edges = np.union1d(f, np.arange(math.ceil(f[0]), math.floor(f[-1]) + 1, dtype=float))
    edges = edges[(edges >= f[0]) & (edges <= f[-1])]
    a, b = edges[:-1], edges[1:]
    est = []
    for order in (12, 24):
        t, wt = np.polynomial.legendre.leggauss(order)
        x = 0.5 * (a[:, None] + b[:, None]) + 0.5 * (b - a)[:, None] * t
        y = np.asarray(psd_eval(psd, x.ravel() * w)).reshape(x.shape) * w
        y = y * np.asarray(transfer_eval(kind, x.ravel())).reshape(x.shape)
        est.append(float(np.sum(0.5 * (b - a) * (y @ wt))))
    err = abs(est[1] - est[0])
    return est[1], err, err <= max(1e-10 * tol_scale, 1e-10 * abs(est[1]))


def _flag(value, err, ok, what):
    if not ok:
        warnings.warn(f"{what}: quadrature did not converge (estimated error {err:.3g})",
                      QuadratureWarning, stacklevel=3)


def gamma_spin_independent(psd: PsdModel, u: float, convention: str = "standard") -> ContrastResult:
    """Dephasing variance and ``C = exp(-Gamma/2)`` for spin-independent noise.

    Contrast does not depend on the thermal occupation in this mode, so no
    ``n`` is taken.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    kappa = _kappa(convention)
    if isinstance(psd, White):
        gamma, err, ok, method = 24.0 * np.pi * u ** 2 * psd.sigma2, 0.0, True, "closed-form"
    else:
        scale = 32.0 * u ** 2 * max(getattr(psd, "sigma2", 1.0), 1e-300)
        gamma, err, ok = response_integral(psd, Dephase(u), tol_scale=scale)
        method = "quadrature"
        _flag(gamma, err, ok, "Gamma")
    gamma, err = kappa * max(gamma, 0.0), kappa * err
    c = math.exp(-0.5 * gamma)
    return ContrastResult(gamma=gamma, beta=complex(c), contrast=c, method=method,
                          error=err, converged=ok, mode=Mode.SPIN_INDEPENDENT,
                          psd=psd, u=u, convention=convention)


def mismatch_variances(psd: PsdModel, convention: str = "standard") -> ContrastResult:
    """``E[Re^2 dzeta]`` and ``E[Im^2 dzeta]`` for spin-dependent noise."""
    kappa = _kappa(convention)
    if isinstance(psd, White):
        v = kappa * 4.0 * np.pi ** 2 * psd.sigma2
        return ContrastResult(var_re=v, var_im=v, method="closed-form",
                              mode=Mode.SPIN_DEPENDENT, psd=psd, convention=convention)
    scale = 16.0 * max(getattr(psd, "sigma2", 1.0), 1e-300)
    vr, er, okr = response_integral(psd, MismatchRe(), tol_scale=scale)
    vi, ei, oki = response_integral(psd, MismatchIm(), tol_scale=scale)
    _flag(vr, er, okr, "E[Re^2]")
    _flag(vi, ei, oki, "E[Im^2]")
    return ContrastResult(var_re=kappa * max(vr, 0.0), var_im=kappa * max(vi, 0.0),
                          method="quadrature", error=kappa * (er + ei), converged=okr and oki,
                          mode=Mode.SPIN_DEPENDENT, psd=psd, convention=convention)


def contrast_spin_dependent(psd: PsdModel, n: float, convention: str = "standard") -> ContrastResult:
    """``C = ([1 + (1+2n) E[Re^2]] [1 + (1+2n) E[Im^2]])^(-1/2)``."""
    if n < 0:
        raise ValueError("occupation must be >= 0")
    var = mismatch_variances(psd, convention)
    k = 1.0 + 2.0 * n
    c = 1.0 / math.sqrt((1.0 + k * var.var_re) * (1.0 + k * var.var_im))
    return replace(var, beta=complex(c), contrast=c, n=float(n))


def contrast(mode, psd: PsdModel, u: float = 1.0, n: float = 0.0,
             convention: str = "standard") -> ContrastResult:
    """Effective contrast in either noise mode (``n`` is ignored when spin-independent)."""
    mode = Mode.parse(mode)
    if mode is Mode.SPIN_INDEPENDENT:
        return replace(gamma_spin_independent(psd, u, convention), n=float(n))
    return replace(contrast_spin_dependent(psd, n, convention), u=u)


def tolerance_solve(mode, psd: PsdModel, target: float = 0.95, u: float = 1.0,
                    n: float = 0.0, bracket=(1e-12, 1.0), rtol: float = 1e-4,
                    convention: str = "standard") -> float:
    """Largest noise amplitude ``sigma`` keeping the contrast at ``target``.

    ``psd`` is a template whose ``sigma`` is varied (white or Lorentzian).
    Bisection in ``log(sigma)`` to relative ``rtol``.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target contrast must lie in (0, 1), got {target}")
    if not hasattr(psd, "sigma"):
        raise TypeError("tolerance inversion needs a PSD family parametrized by sigma")
    lo, hi = bracket

    def excess(logs):
        return contrast(mode, replace(psd, sigma=math.exp(logs)), u=u, n=n,
                        convention=convention).contrast - target

    if excess(math.log(lo)) < 0:
        raise ValueError(f"contrast already below {target} at sigma={lo}")
    if excess(math.log(hi)) > 0:
        raise ValueError(f"target {target} not reached for sigma <= {hi}")
    logs = optimize.bisect(excess, math.log(lo), math.log(hi), xtol=rtol / 4, rtol=1e-15)
    return math.exp(logs)
