"""
Transfer functions
==================

Each noise frequency ``x = Omega/omega`` is weighted by a transfer function.
The dephasing kernel peaks at low frequency, the mismatch kernels near
resonance.
"""

# %%
import numpy as np

from sgi_contrast import analytic
from sgi_contrast.analytic import Dephase, MismatchIm, MismatchRe

x = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 10.0])
F = analytic.transfer_eval(Dephase(1.0), x)
Fre = analytic.transfer_eval(MismatchRe(), x)
Fim = analytic.transfer_eval(MismatchIm(), x)
print(f"{'x':>6} {'F/u^2':>12} {'F_re':>12} {'F_im':>12}")
for row in zip(x, F, Fre, Fim):
    print("{:6.2f} {:12.5g} {:12.5g} {:12.5g}".format(*row))

# %%
# Zeros at every integer but 1: a full period of a harmonic drive at an
# integer multiple of the trap frequency averages out.
print(analytic.transfer_eval(Dephase(1.0), np.array([2.0, 3.0, 4.0])))

# %%
# The removable points are evaluated through a series; compare to the raw
# expression just off x = 1.
for h in (1e-3, 1e-5, 1e-7):
    print(h, analytic.transfer_eval(MismatchRe(), 1 + h), 16 * np.sin(np.pi * (1 + h)) ** 2 / ((1 + h) ** 2 - 1) ** 2)
