"""One-sided noise PSD models and reproducible Gaussian noise synthesis.

The noise ``du(t)`` is the dimensionless coupling fluctuation
``Delta lambda(t) / (hbar omega)``.  PSDs are one-sided, in units of
1/(rad/s), and relate to the autocorrelation through

    R(tau) = kappa * int_0^inf S(Omega) cos(Omega tau) dOmega

with ``kappa = 1`` for the default ``"standard"`` convention and
``kappa = 1/(2 pi)`` for ``"wk2pi"``.  The convention only changes how a
PSD is turned into realizations and autocorrelations; the analytic transfer
function integrals in :mod:`sgi_contrast.analytic` are fixed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import signal

from .core import TimeGrid

__all__ = [
    "CONVENTIONS", "White", "Lorentzian", "Tabulated", "PsdModel",
    "NoiseSeries", "Autocorrelation", "AutocorrEstimate",
    "psd_eval", "autocorr", "synthesize", "synthesize_batch",
    "estimate_autocorr", "load_tabulated", "write_series_csv",
    "spawn_generator",
]

CONVENTIONS = ("standard", "wk2pi")

# spectral synthesis defaults, in units of omega
SPECTRAL_RESOLUTION = 1.0 / 64.0
SPECTRAL_CUTOFF = 40.0
MIN_STEPS = 16


def _kappa(convention: str) -> float:
    if convention == "standard":
        return 1.0
    if convention == "wk2pi":
        return 1.0 / (2.0 * np.pi)
    raise ValueError(f"unknown PSD convention {convention!r}; use one of {CONVENTIONS}")


@dataclass(frozen=True)
class White:
    """Flat PSD ``S = sigma**2 / omega``."""

    sigma: float
    omega: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.omega <= 0:
            raise ValueError("omega must be positive")

    @property
    def sigma2(self) -> float:
        return self.sigma ** 2


@dataclass(frozen=True)
class Lorentzian:
    """Lorentzian PSD of linewidth ``gamma`` (units of omega) centred on ``omega0``."""

    sigma: float
    gamma: float
    omega0: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.omega <= 0:
            raise ValueError("omega must be positive")

    @property
    def sigma2(self) -> float:
        return self.sigma ** 2


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear PSD through ``(frequency, density)`` samples; zero outside."""

    frequency: tuple
    density: tuple
    omega: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        s = np.asarray(self.density, dtype=float)
        if f.ndim != 1 or f.shape != s.shape or f.size < 2:
            raise ValueError("tabulated PSD needs two equal-length 1D columns (>= 2 rows)")
        if np.any(np.diff(f) <= 0):
            raise ValueError("tabulated frequencies must be strictly increasing")
        if np.any(f < 0):
            raise ValueError("tabulated frequencies must be >= 0")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("tabulated densities must be finite and >= 0")
        object.__setattr__(self, "frequency", tuple(f.tolist()))
        object.__setattr__(self, "density", tuple(s.tolist()))


PsdModel = Union[White, Lorentzian, Tabulated]


def psd_eval(model: PsdModel, Omega):
    """One-sided PSD in 1/(rad/s) at angular frequency ``Omega`` (rad/s)."""
    Omega = np.asarray(Omega, dtype=float)
    if np.any(Omega < 0):
        raise ValueError("PSD is one-sided; Omega must be >= 0")
    if isinstance(model, White):
        out = np.full_like(Omega, model.sigma2 / model.omega)
    elif isinstance(model, Lorentzian):
        x = (Omega - model.omega0) / model.omega
        out = (model.sigma2 / model.omega) * (2.0 * model.gamma / np.pi) / (x * x + model.gamma ** 2)
    elif isinstance(model, Tabulated):
        out = np.interp(Omega, model.frequency, model.density, left=0.0, right=0.0)
    else:
        raise TypeError(f"not a PSD model: {model!r}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Autocorrelation:
    """Autocorrelation value; ``delta`` marks a Dirac-delta weight (white noise)."""

    value: float
    delta: bool = False


def _cosine_transform_linear(f: np.ndarray, s: np.ndarray, tau: float) -> float:
    # exact int of a piecewise-linear s(f) * cos(f tau) over [f0, f_end]
    if tau == 0.0:
        return float(np.sum(0.5 * (s[1:] + s[:-1]) * np.diff(f)))
    a, b = f[:-1], f[1:]
    sa, sb = s[:-1], s[1:]
    slope = (sb - sa) / (b - a)
    sin_b, sin_a = np.sin(b * tau), np.sin(a * tau)
    cos_b, cos_a = np.cos(b * tau), np.cos(a * tau)
    part = (sb * sin_b - sa * sin_a) / tau + slope * (cos_b - cos_a) / tau ** 2
    return float(np.sum(part))


def autocorr(model: PsdModel, tau: float, convention: str = "standard") -> Autocorrelation:
    """Autocorrelation ``R(tau)`` (``tau`` in seconds) implied by the PSD.

    White noise has no finite autocorrelation; the weight ``c`` of
    ``R(t) = c * delta(t)`` is returned with ``delta=True``.
    """
    k = _kappa(convention)
    if isinstance(model, White):
        return Autocorrelation(k * np.pi * model.sigma2 / model.omega, delta=True)
    if isinstance(model, Lorentzian):
        if model.omega0 != 0.0:
            raise NotImplementedError(
                "closed-form autocorrelation only for omega0 == 0; tabulate the PSD instead")
        # int_0^inf (2g/pi)/(x^2+g^2) cos(x s) dx = exp(-g |s|)
        return Autocorrelation(k * model.sigma2 * math.exp(-model.gamma * model.omega * abs(tau)))
    if isinstance(model, Tabulated):
        f = np.asarray(model.frequency)
        s = np.asarray(model.density)
        return Autocorrelation(k * _cosine_transform_linear(f, s, float(tau)))
    raise TypeError(f"not a PSD model: {model!r}")


@dataclass(frozen=True)
class NoiseSeries:
    """One sampled realization ``du_k`` on the nodes of ``grid``."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ValueError(f"expected {len(self.grid)} samples, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("noise samples must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "NoiseSeries":
        return cls(grid, np.zeros(len(grid)))


def spawn_generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based Philox generator for realization ``stream`` of ``seed``.

    Each stream is keyed independently, so realization ``r`` is the same no
    matter how an ensemble is batched or scheduled.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def _check_grid(grid: TimeGrid):
    if grid.steps < MIN_STEPS:
        raise ValueError(f"grid with {grid.steps} steps cannot resolve the trap period "
                         f"(need >= {MIN_STEPS})")


def _spectral_components(model, resolution, cutoff):
    dx = resolution
    x = (np.arange(int(round(cutoff / dx))) + 0.5) * dx
    S = np.asarray(psd_eval(model, x * model.omega))
    return x, S * dx * model.omega


def synthesize_batch(model: PsdModel, grid: TimeGrid, seed: int, streams: Sequence[int],
                     convention: str = "standard",
                     resolution: float = SPECTRAL_RESOLUTION,
                     cutoff: float = SPECTRAL_CUTOFF) -> np.ndarray:
    """Realizations for several streams stacked as an array ``(len(streams), N+1)``.

    Row ``i`` is bit-identical to ``synthesize(model, grid, seed, streams[i]).values``.
    """
    _check_grid(grid)
    k = _kappa(convention)
    streams = list(streams)
    npts = len(grid)
    out = np.zeros((len(streams), npts))
    if model.omega != grid.omega:
        raise ValueError("PSD reference omega and grid omega differ")
    sigma2 = getattr(model, "sigma2", None)
    if sigma2 == 0.0:
        return out
    dtau = grid.dtau

    if isinstance(model, White):
        scale = math.sqrt(k * np.pi * sigma2 / dtau)
        for i, r in enumerate(streams):
            out[i] = scale * spawn_generator(seed, r).standard_normal(npts)
        return out

    if isinstance(model, Lorentzian) and model.omega0 == 0.0:
        a = math.exp(-model.gamma * dtau)
        var = k * sigma2
        for i, r in enumerate(streams):
            xi = spawn_generator(seed, r).standard_normal(npts)
            xi[0] *= math.sqrt(var)
            xi[1:] *= math.sqrt(var * -math.expm1(-2.0 * model.gamma * dtau))
            out[i] = xi
        # du_{k+1} = a du_k + b xi_k, with du_0 ~ N(0, var)
        return signal.lfilter([1.0], [1.0, -a], out, axis=1)

    # spectral synthesis: sum of cosines with random phases
    x, power = _spectral_components(model, resolution, cutoff)
    amp = np.sqrt(2.0 * k * power)
    keep = amp > 0
    x, amp = x[keep], amp[keep]
    theta = np.array([spawn_generator(seed, r).uniform(0.0, 2.0 * np.pi, x.size) for r in streams])
    return _cosine_sum(grid, x, amp, theta, resolution)


def _cosine_sum(grid, x, amp, theta, resolution):
    # sum_j amp_j cos(tau_k x_j + theta_j).  On the uniform grid x_j = (j + 1/2) dx
    # the phase tau_k j dx = 2 pi k j / M with M = N/dx, so the sum is one
    # zero-padded inverse DFT per realization whenever M is an integer.
    tau = grid.tau
    n = grid.steps
    m = int(round(n / resolution))
    if abs(m * resolution - n) > 1e-9 * n or m < x.size:
        return np.array([np.cos(np.outer(tau, x) + th) @ amp for th in theta])
    spec = np.fft.ifft(amp * np.exp(1j * theta), n=m, axis=-1)[:, : n + 1] * m
    return np.real(np.exp(0.5j * resolution * tau) * spec)


def synthesize(model: PsdModel, grid: TimeGrid, seed: int, stream: int = 0,
               convention: str = "standard", **kw) -> NoiseSeries:
    """Stationary zero-mean Gaussian realization of ``model`` on ``grid``.

    White noise is i.i.d. with per-sample variance ``kappa*pi*sigma^2/(omega dt)``;
    Lorentzian noise with ``omega0 == 0`` uses the exact Ornstein-Uhlenbeck
    recursion; anything else is synthesized spectrally (cosines at
    ``(j+1/2)*resolution*omega`` up to ``cutoff*omega`` with uniform phases).
    """
    values = synthesize_batch(model, grid, seed, [stream], convention=convention, **kw)[0]
    return NoiseSeries(grid, values, seed=int(seed), stream=int(stream))


@dataclass(frozen=True)
class AutocorrEstimate:
    value: float
    stderr: float
    lag: int
    count: int


def estimate_autocorr(ensemble, lag: int) -> AutocorrEstimate:
    """Cross-realization estimate of ``R(lag*dt)`` with its standard error.

    Accepts a sequence of :class:`NoiseSeries` or a 2D array
    ``(realizations, nodes)``.  Node pairs ``(j, j+lag)`` are averaged within
    each realization first, so the standard error is taken over independent
    realizations.
    """
    if isinstance(ensemble, np.ndarray):
        data = np.atleast_2d(ensemble)
    else:
        ensemble = list(ensemble)
        grids = {s.grid for s in ensemble}
        if len(grids) != 1:
            raise ValueError("all series must share the same grid")
        data = np.stack([s.values for s in ensemble])
    if data.shape[0] < 2:
        raise ValueError("need at least two realizations")
    lag = int(lag)
    if not 0 <= lag < data.shape[1]:
        raise ValueError(f"lag {lag} outside the grid")
    prod = data[:, : data.shape[1] - lag] * data[:, lag:]
    per_run = prod.mean(axis=1)
    m = per_run.size
    return AutocorrEstimate(value=float(per_run.mean()),
                            stderr=float(per_run.std(ddof=1) / math.sqrt(m)),
                            lag=lag, count=m)


def load_tabulated(path: str | Path, omega: float) -> Tabulated:
    """Read a two-column CSV ``omega_rad_per_s,psd`` into a :class:`Tabulated` model."""
    freq, dens = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = (row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#"))
        header = next(rows, None)
        if header is None or [h.strip() for h in header] != ["omega_rad_per_s", "psd"]:
            raise ValueError(f"{path}: expected header 'omega_rad_per_s,psd', got {header}")
        for row in rows:
            freq.append(float(row[0]))
            dens.append(float(row[1]))
    return Tabulated(tuple(freq), tuple(dens), omega=omega)


def write_series_csv(series: NoiseSeries, path: str | Path):
    """Export a realization as ``t,du`` (t in seconds)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# seed={series.seed} stream={series.stream} steps={series.grid.steps}\n")
        w = csv.writer(fh)
        w.writerow(["t", "du"])
        for t, v in zip(series.grid.times, series.values):
            w.writerow([repr(float(t)), repr(float(v))])
