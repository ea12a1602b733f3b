"""sympint: area-preserving one-step integrators for Hamiltonian systems,
with a certification battery for their structural invariants."""

from ._backend import COMPILED, backend_name
from .errors import (ConfigError, KindError, SolverFailure, SympintError,
                     UnavailableError)
from .integrators import (ALPHA_DEFAULTS, AREA_PRESERVING, BASELINES,
                          ORDER_OF, LongRun, MethodSpec, Scheme, apply_step,
                          integrate, make_stepper, parse_scheme, run_long)
from .phase_space import (PhaseState, SystemDef, SystemKind, Trajectory,
                          eval_energy, is_scalar, is_separable, make_state,
                          numeric_gradients)
from .reference import (EXACT_SOLUTIONS, make_reference, reference_solution,
                        step_explicit_euler, step_rk4)
from .solvers import (SolveOutcome, SolverMethod, SolverPolicy,
                      contraction_bound, solve_aitken, solve_fixed_point,
                      solve_newton, solve_stage)
from .systems import get_system, list_systems
from .verify import (BracketResiduals, CertReport, ErrorConstantFit,
                     OrderFit, analytic_local_error, brackets_from_jacobian,
                     certify_scheme, local_error_constant, make_polygon,
                     measured_order, phi_operator_eval, poisson_brackets,
                     polygon_area_drift, step_jacobian, symplectic_battery,
                     symplectic_defect)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_DEFAULTS", "AREA_PRESERVING", "BASELINES", "BracketResiduals",
    "CertReport", "COMPILED", "ConfigError", "ErrorConstantFit",
    "EXACT_SOLUTIONS", "KindError", "LongRun", "MethodSpec", "OrderFit",
    "ORDER_OF", "PhaseState", "Scheme", "SolveOutcome", "SolverFailure",
    "SolverMethod", "SolverPolicy", "SympintError", "SystemDef",
    "SystemKind", "Trajectory", "UnavailableError", "analytic_local_error",
    "apply_step", "backend_name", "brackets_from_jacobian", "certify_scheme",
    "contraction_bound", "eval_energy", "get_system", "integrate",
    "is_scalar", "is_separable", "list_systems", "local_error_constant",
    "make_polygon", "make_reference", "make_state", "make_stepper",
    "measured_order", "numeric_gradients", "parse_scheme",
    "phi_operator_eval", "poisson_brackets", "polygon_area_drift",
    "reference_solution", "run_long", "solve_aitken", "solve_fixed_point",
    "solve_newton", "solve_stage", "step_explicit_euler", "step_jacobian",
    "step_rk4", "symplectic_battery", "symplectic_defect",
]
