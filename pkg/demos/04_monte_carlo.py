"""
Monte Carlo against the closed forms
====================================

Seeded ensembles of noisy trajectories, one realization per run.
"""

# %%
from sgi_contrast import analytic, montecarlo
from sgi_contrast.montecarlo import McConfig
from sgi_contrast.noise import White
from sgi_contrast.qfho import Mode

cfg = McConfig(White(1e-2), Mode.SPIN_DEPENDENT, u=100, n=100, runs=4000, steps=1024,
               master_seed=2024)
s = montecarlo.run_ensemble(cfg)
ref = analytic.contrast_spin_dependent(White(1e-2), 100)
print(f"C_mc = {s.contrast:.4f} +- {s.contrast_se:.4f}, C_analytic = {ref.contrast:.4f}")
print(montecarlo.compare_analytic(s, ref).lines())

# %%
# Spin-dependent noise never changes the relative phase, and spin-independent
# noise never separates the arms.
print("max |dphi| :", s.max_abs_dphi)
si = montecarlo.run_ensemble(McConfig(White(1e-4), Mode.SPIN_INDEPENDENT, u=100, runs=2000,
                                      steps=2048, master_seed=3))
print("max |dzeta|:", si.max_abs_dzeta)

# %%
# The dephasing estimate.  Compare with the analytic number and note the ratio.
ref = analytic.gamma_spin_independent(White(1e-4), 100)
print(f"Gamma_mc = {si.gamma_hat:.4g} +- {si.gamma_se:.2g}, Gamma_analytic = {ref.gamma:.4g}, "
      f"ratio = {si.gamma_hat / ref.gamma:.3f}")
