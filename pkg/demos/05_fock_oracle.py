"""
Number-basis check
==================

Propagate a coherent state through the driven oscillator in a truncated
Fock basis and compare with the displacement-operator result.
"""

# %%
from sgi_contrast import fock
from sgi_contrast.fock import OracleCase, PropagatorConfig
from sgi_contrast.qfho import Mode

cases = (OracleCase("quiet", 1.0, 0.5),
         OracleCase("noisy", 1.0, 0.5, 1e-2, Mode.SPIN_DEPENDENT))
for r in fock.run_oracle(cases, PropagatorConfig(128, 8), steps=512, check_convergence=False):
    print(f"{r['case']:>6}: numeric {r['numeric']:.8f}  analytic {r['analytic']:.8f}  "
          f"|diff| {r['abs_diff']:.1e}")

# %%
# Too small a basis is caught rather than silently renormalized.
try:
    fock.run_oracle((OracleCase("big", 2.0, 2.0),), PropagatorConfig(32, 4), steps=256,
                    check_convergence=False)
except fock.TruncationError as exc:
    print("TruncationError:", exc)
