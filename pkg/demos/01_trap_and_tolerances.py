"""
Trap parameters and noise tolerances
====================================

From the particle and field gradient to the dimensionless coupling ``u``,
then the largest white-noise amplitude that keeps 95% contrast.
"""

# %%
import numpy as np

from sgi_contrast import core, analytic
from sgi_contrast.noise import White
from sgi_contrast.qfho import Mode

# A 1e-17 kg diamond with a two-Bohr-magneton spin in a 1.4e4 T/m gradient.
# The susceptibility is chosen so the trap sits at exactly 1e3 rad/s.
chi = core.susceptibility_for_frequency(1e3, 1.4e4)
p = core.PhysicalParams(mass=1e-17, chi_rho=chi, gradient=1.4e4)
trap = core.derive_trap(p)
print(f"omega = {trap.omega:.4g} rad/s, u = {trap.u:.4g}")
print(f"ground-state width {trap.width * 1e9:.3g} nm, "
      f"maximal splitting {trap.superposition * 1e9:.3g} nm")

# %%
# 100 phonons at this frequency is well under a microkelvin.
th = core.ThermalState.from_occupation(100, trap.omega)
print(f"n = 100  ->  T = {th.temperature * 1e6:.3f} uK")
print(f"same n at 2 pi kHz: {core.ThermalState.from_occupation(100, 2 * np.pi * 1e3).temperature * 1e6:.2f} uK")

# %%
# Tolerances.  Spin-independent noise dephases, spin-dependent noise spoils
# the recombination.  The first scales with u, the second with n.
si = analytic.tolerance_solve(Mode.SPIN_INDEPENDENT, White(1.0), 0.95, u=trap.u)
sd = analytic.tolerance_solve(Mode.SPIN_DEPENDENT, White(1.0), 0.95, n=th.n)
print(f"sigma_max spin-independent: {si:.3g}")
print(f"sigma_max spin-dependent:   {sd:.3g}")
