"""viscolab: a numerical laboratory for averaged, Halpern-type and
generalized viscosity fixed-point iterations.

Schemes are run at finite horizon in R^m, coefficient sequences are validated
against their declared asymptotic traits, and every desk-checkable
boundedness/convergence property has a theorem-keyed diagnostic check.
"""

from .companion import (MetricSystem, OmegaHistory, PhiPair, banach_pair,
                        companion_distance_series, phi_forcing, step_omega,
                        validate_weak_contraction)
from .config import ConfigError, ExperimentConfig, load_config, preset_names
from .diagnostics import (FixedPointEstimate, NotConverged,
                          check_offset_series, check_permanence,
                          check_residual_vanishes, check_suzuki,
                          check_telescoping, check_thm21_i, check_thm21_ii,
                          check_thm21_iv, check_variational_inequality,
                          check_venter, estimate_fixed_point)
from .iterate import (Coeffs, SchemeConfig, Trajectory, closed_form_solution,
                      run, run_coupled, step_basic, step_coupled_aux,
                      step_generalized, step_halpern, z_of_generalized)
from .mappings import (AffineMap, AmbientSpace, ClipMap, ContractionMap,
                       MapFamily, estimate_lipschitz, family_drift)
from .report import DiagnosticReport, save_convergence_figure, write_lines
from .schedules import (Schedule, ScheduleSet, derive_gamma, gamma_values,
                        trait_holds, validate_assumptions)
from .suites import run_suite

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "AmbientSpace", "ClipMap", "Coeffs", "ConfigError",
    "ContractionMap", "DiagnosticReport", "ExperimentConfig",
    "FixedPointEstimate", "MapFamily", "MetricSystem", "NotConverged",
    "OmegaHistory", "PhiPair", "Schedule", "ScheduleSet", "SchemeConfig",
    "Trajectory", "banach_pair", "check_offset_series", "check_permanence",
    "check_residual_vanishes", "check_suzuki", "check_telescoping",
    "check_thm21_i", "check_thm21_ii", "check_thm21_iv",
    "check_variational_inequality", "check_venter", "closed_form_solution",
    "companion_distance_series", "derive_gamma", "estimate_fixed_point",
    "estimate_lipschitz", "family_drift", "gamma_values", "load_config",
    "phi_forcing", "preset_names", "run", "run_coupled", "run_suite",
    "save_convergence_figure", "step_basic", "step_coupled_aux",
    "step_generalized", "step_halpern", "step_omega", "trait_holds",
    "validate_assumptions", "validate_weak_contraction", "write_lines",
    "z_of_generalized",
]
