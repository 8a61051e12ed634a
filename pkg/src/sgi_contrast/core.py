"""Physical constants, laboratory parameters and the derived trap quantities.

Everything downstream of this module works in dimensionless units: time is
measured in units of ``1/omega`` (one trap period is ``2*pi``), the coupling
and the noise are measured in units of ``hbar*omega``.  SI values only appear
here and in the configuration / CLI layer.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

__all__ = [
    "HBAR", "MU0", "K_B", "MU_B", "G_S",
    "ConfigError", "PhysicalParams", "TrapParams", "ThermalState", "TimeGrid",
    "derive_trap", "thermal_occupation", "susceptibility_for_frequency",
    "load_config",
]

# CODATA 2018, 10 significant digits
HBAR = 1.054571817e-34     # J s
MU0 = 1.256637062e-6       # T m / A
K_B = 1.380649000e-23      # J / K
MU_B = 9.274010078e-24     # J / T
G_S = 2.0                  # NV electron spin, S_z = +-1


class ConfigError(ValueError):
    """Invalid physical parameters or configuration content."""


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory inputs of the diamagnetically levitated particle.

    Parameters
    ----------
    mass : float
        Particle mass in kg.
    chi_rho : float
        Mass magnetic susceptibility in m^3/kg (negative for diamagnets).
    gradient : float
        Magnetic field gradient ``eta`` in T/m.
    moment : float
        Magnetic moment of the embedded spin in J/T.  Defaults to
        ``G_S * MU_B``.
    bias_field : float
        Homogeneous bias field ``B0`` in T.  Only enters ``z0``.
    """

    mass: float
    chi_rho: float
    gradient: float
    moment: float = G_S * MU_B
    bias_field: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if not self.chi_rho < 0:
            raise ConfigError(
                f"chi_rho must be negative (diamagnet), got {self.chi_rho}; "
                "the trap frequency is undefined otherwise")
        if not self.gradient > 0:
            raise ConfigError(f"gradient must be positive, got {self.gradient}")
        if not self.moment > 0:
            raise ConfigError(f"moment must be positive, got {self.moment}")
        if not self.bias_field >= 0:
            raise ConfigError(f"bias_field must be >= 0, got {self.bias_field}")


@dataclass(frozen=True)
class TrapParams:
    omega: float          # rad/s
    coupling: float       # lambda, J
    u: float              # lambda / (hbar omega)
    width: float          # Delta z, m
    superposition: float  # delta z_max, m
    z0: float             # m


@dataclass(frozen=True)
class ThermalState:
    n: float
    temperature: float
    omega: float

    @classmethod
    def from_occupation(cls, n: float, omega: float) -> "ThermalState":
        if n < 0:
            raise ConfigError(f"occupation must be >= 0, got {n}")
        return cls(n=float(n), temperature=n * HBAR * omega / K_B, omega=omega)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid over exactly one trap period ``2*pi/omega``.

    ``times`` are in seconds, ``tau`` is the dimensionless phase ``omega*t``.
    """

    steps: int
    omega: float = 1.0
    _tau: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"grid needs at least 2 steps, got {self.steps}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        tau = 2.0 * np.pi * np.arange(self.steps + 1) / self.steps
        tau[-1] = 2.0 * np.pi
        tau.flags.writeable = False
        object.__setattr__(self, "_tau", tau)

    @property
    def tau(self) -> np.ndarray:
        return self._tau

    @property
    def dtau(self) -> float:
        return 2.0 * np.pi / self.steps

    @property
    def times(self) -> np.ndarray:
        return self._tau / self.omega

    @property
    def dt(self) -> float:
        return self.dtau / self.omega

    @property
    def duration(self) -> float:
        return 2.0 * np.pi / self.omega

    def __len__(self):
        return self.steps + 1


def derive_trap(p: PhysicalParams) -> TrapParams:
    """Trap frequency, coupling and length scales of the 1D interferometer.

    ``omega = sqrt(-chi_rho/mu0) * eta``, ``lambda = mu*eta*sqrt(hbar/2 m omega)``,
    ``delta z_max = 4 u Delta z`` with ``u = lambda/(hbar omega)``.
    """
    if not p.chi_rho < 0:
        raise ConfigError("chi_rho must be negative")
    omega = math.sqrt(-p.chi_rho / MU0) * p.gradient
    width = math.sqrt(HBAR / (2.0 * p.mass * omega))
    coupling = p.moment * p.gradient * width
    u = coupling / (HBAR * omega)
    return TrapParams(omega=omega, coupling=coupling, u=u, width=width,
                      superposition=4.0 * u * width,
                      z0=p.bias_field / p.gradient)


def susceptibility_for_frequency(omega: float, gradient: float) -> float:
    """Inverse of the trap-frequency relation: chi_rho giving ``omega``."""
    if omega <= 0 or gradient <= 0:
        raise ConfigError("omega and gradient must be positive")
    return -MU0 * (omega / gradient) ** 2


def thermal_occupation(temperature: float, omega: float) -> ThermalState:
    """``n = k_B T / (hbar omega)``."""
    if temperature < 0:
        raise ConfigError(f"temperature must be >= 0, got {temperature}")
    if omega <= 0:
        raise ConfigError(f"omega must be positive, got {omega}")
    n = K_B * temperature / (HBAR * omega)
    return ThermalState(n=n, temperature=float(temperature), omega=omega)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a TOML configuration file.

    Recognised sections (all optional except where a command needs them)::

        [physical]  mass, chi_rho | omega, gradient, moment, bias_field
        [grid]      steps
        [thermal]   n | temperature
        [noise]     model = "white" | "lorentzian" | "tabulated", sigma,
                    gamma, omega0, table (CSV path), convention
        [sweep] [mc] [oracle] [tolerance]   command specific keys

    A ``physical.omega`` entry (rad/s) is turned into ``chi_rho`` through
    :func:`susceptibility_for_frequency` when ``chi_rho`` is absent.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            cfg = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg.setdefault("_dir", str(path.parent))
    return cfg


def physical_from_config(section: dict[str, Any]) -> PhysicalParams:
    known = {"mass", "chi_rho", "omega", "gradient", "moment", "bias_field",
             "moment_bohr"}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown [physical] keys: {sorted(unknown)}")
    try:
        mass = float(section["mass"])
        gradient = float(section["gradient"])
    except KeyError as exc:
        raise ConfigError(f"[physical] is missing {exc}") from None
    if "chi_rho" in section:
        chi = float(section["chi_rho"])
    elif "omega" in section:
        chi = susceptibility_for_frequency(float(section["omega"]), gradient)
    else:
        raise ConfigError("[physical] needs chi_rho or omega")
    if "moment" in section:
        moment = float(section["moment"])
    else:
        moment = float(section.get("moment_bohr", G_S)) * MU_B
    return PhysicalParams(mass=mass, chi_rho=chi, gradient=gradient,
                          moment=moment,
                          bias_field=float(section.get("bias_field", 0.0)))


def thermal_from_config(section: dict[str, Any], omega: float) -> ThermalState:
    if "n" in section:
        return ThermalState.from_occupation(float(section["n"]), omega)
    return thermal_occupation(float(section.get("temperature", 0.0)), omega)
