"""Proximal generalized ADMM with executable convergence diagnostics."""

from .core import (
    ConfigurationError,
    DegenerateInstanceError,
    LinearMap,
    NumericalError,
    Problem,
    ProxOracle,
    SelfAdjointOperator,
    UnsupportedOperationError,
    adjoint_check,
    aug_lagrangian,
    lagrangian,
    primal_residual,
)
from .diagnostics import (
    NuPoint,
    RateReport,
    assemble_xi,
    check_trace,
    descent_gap,
    lyapunov_gap,
    kappa,
    kkt_mapping,
    lyapunov,
    rate_report,
    trace_diagnostics,
    upsilon,
    xi_quadratic_form,
)
from .files import load_problem, problem_from_dict, problem_to_dict
from .generators import generate
from .oracle import OracleSolution, distance_to_oracle, solve_lasso_enumeration, solve_oracle, solve_quadratic_kkt
from .prox import make_oracle, prox_indicator, prox_l1, prox_quadratic
from .solvers import IterateState, SolutionReport, SolverConfig, solve, step_admm, step_gadmm, step_pgadmm

__version__ = "0.1.0"
