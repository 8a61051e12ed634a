"""
Noise spectra and contrast
==========================

White and Lorentzian spectra pushed through the transfer functions.
"""

# %%
import numpy as np

from sgi_contrast import analytic, noise
from sgi_contrast.core import TimeGrid
from sgi_contrast.noise import Lorentzian, White

u, sigma = 100.0, 1e-4
print("white   Gamma =", analytic.gamma_spin_independent(White(sigma), u).gamma,
      " 24 pi u^2 sigma^2 =", 24 * np.pi * u ** 2 * sigma ** 2)

# %%
# Narrow lines keep their power near DC where the dephasing kernel is flat;
# broad lines spread it over the zeros and the fast decaying tail.
for gam in (0.1, 1.0, 10.0, 100.0):
    r = analytic.gamma_spin_independent(Lorentzian(sigma, gam), u)
    print(f"gamma = {gam:6g}: Gamma = {r.gamma:.4g}, C = {r.contrast:.6f}")

# %%
# Spin-dependent noise hurts most when its linewidth matches the trap.
for gam in (1e-2, 1e-1, 1.0, 10.0, 1e2):
    print(f"gamma = {gam:6g}: C_sd = {analytic.contrast_spin_dependent(Lorentzian(1e-2, gam), 100).contrast:.4f}")

# %%
# Sample paths.  The Omega0 = 0 line is an Ornstein-Uhlenbeck process.
g = TimeGrid(256)
paths = noise.synthesize_batch(Lorentzian(0.1, 1.0), g, seed=1, streams=range(4000))
est = noise.estimate_autocorr(paths, 20)
print("R(lag 20):", est.value, "+-", est.stderr, " exact:",
      noise.autocorr(Lorentzian(0.1, 1.0), 20 * g.dt).value)
