"""Spin-contrast loss of a harmonically trapped Stern-Gerlach interferometer
under linear noise: analytic transfer-function pipeline, Monte Carlo ensembles
and a truncated number-basis oracle."""
from .analytic import (ContrastResult, Dephase, MismatchIm, MismatchRe, contrast,
                       contrast_spin_dependent, gamma_spin_independent, mismatch_variances,
                       response_integral, tolerance_solve, transfer_eval)
from .core import (ConfigError, PhysicalParams, ThermalState, TimeGrid, TrapParams, derive_trap,
                   load_config, susceptibility_for_frequency, thermal_occupation)
from .fock import PropagatorConfig, coherent_state, propagate, run_oracle
from .montecarlo import McConfig, McSummary, compare_analytic, run_ensemble
from .noise import (Lorentzian, NoiseSeries, Tabulated, White, autocorr, psd_eval, synthesize,
                    synthesize_batch)
from .qfho import Branch, DriveSpec, Mode, overlap, solve_branch, thermal_beta

__version__ = "0.1.0"
