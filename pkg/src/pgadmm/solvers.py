"""Classic ADMM, generalized ADMM and proximal generalized ADMM (p-GADMM).

All three share one subproblem primitive: for a block ``u`` coupled through
``M`` (``A`` for y, ``B`` for z) and a proximal weight ``P`` (``S`` or ``T``),
find ``u`` with

    0 in dh(u) + (sigma M M* + P) u - rhs,

either by a dense linear solve (``h`` quadratic) or by one prox evaluation
when ``sigma M M* + P`` is a multiple of the identity.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from .core import (
    ConfigurationError,
    NumericalError,
    Problem,
    SelfAdjointOperator,
    UnsupportedOperationError,
)

__all__ = [
    "SolverConfig",
    "IterateState",
    "SolutionReport",
    "proximal_terms",
    "prepare",
    "initial_state",
    "step_pgadmm",
    "step_gadmm",
    "step_admm",
    "solve",
    "VARIANTS",
    "MODES",
    "FAULTS",
]

log = logging.getLogger(__name__)

VARIANTS = ("classic_admm", "gadmm", "pgadmm")
MODES = ("auto", "quadratic_direct", "prox_linearized", "prox_exact")
FAULTS = ("x_update", "relaxation")
GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass
class SolverConfig:
    """Parameters of one solver run.

    ``S`` and ``T`` (p-GADMM only) are ``None`` for zero, a float ``eps`` for
    ``eps * I``, the string ``"linearized"`` for ``eta I - sigma A A*`` with
    ``eta = linearization_margin * sigma * lambda_max(A A*)``, or a dense
    matrix. Initial data ``x0, y0, z0`` default to zeros; for p-GADMM they are
    the relaxed starting points ``(x~0, y~0, z~1)``. ``order`` selects which
    block classic ADMM minimizes first (``"yz"`` or ``"zy"``).
    """

    variant: str = "pgadmm"
    sigma: float = 1.0
    rho: float = 1.0
    tau: float = 1.0
    S: object = None
    T: object = None
    y_mode: str = "auto"
    z_mode: str = "auto"
    tol: float = 1e-8
    max_iter: int = 1000
    x0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    z0: Optional[np.ndarray] = None
    order: str = "yz"
    linearization_margin: float = 1.05
    seed: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.variant != "classic_admm" and not 0 < self.rho < 2:
            raise ConfigurationError(f"rho must lie in (0, 2), got {self.rho}")
        if self.variant == "classic_admm" and not 0 < self.tau < GOLDEN:
            raise ConfigurationError(f"tau must lie in (0, (1+sqrt5)/2), got {self.tau}")
        for name in ("y_mode", "z_mode"):
            if getattr(self, name) not in MODES:
                raise ConfigurationError(f"{name} must be one of {MODES}")
        if self.order not in ("yz", "zy"):
            raise ConfigurationError(f"order must be 'yz' or 'zy', got {self.order!r}")
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be >= 0")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if self.linearization_margin <= 1:
            raise ConfigurationError("linearization_margin must exceed 1 to keep S, T definite")
        if self.variant != "pgadmm":
            if self.S is not None or self.T is not None:
                raise ConfigurationError(f"{self.variant} takes no proximal terms S, T")
            if "prox_linearized" in (self.y_mode, self.z_mode):
                raise ConfigurationError(f"{self.variant} has no linearized subproblems")
        for op, mode, name in ((self.S, self.y_mode, "S"), (self.T, self.z_mode, "T")):
            is_lin = isinstance(op, str) and op == "linearized"
            if isinstance(op, str) and not is_lin:
                raise ConfigurationError(f"{name} must be None, a float, 'linearized' or a matrix")
            if mode == "prox_linearized" and op is not None and not is_lin:
                raise ConfigurationError(f"prox_linearized mode fixes {name}; leave it unset")
            if is_lin and mode not in ("auto", "prox_linearized"):
                raise ConfigurationError(f"linearized {name} needs mode prox_linearized")
        if self.variant == "pgadmm":
            if self.y_mode == "prox_linearized":
                self.S = "linearized"
            if self.z_mode == "prox_linearized":
                self.T = "linearized"

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class IterateState:
    """Iterates at the end of iteration ``k``.

    For p-GADMM, ``x_tilde, y_tilde`` hold the relaxed points with index k,
    ``z_tilde`` holds z~^k (the one used to compute z^k) and
    ``z_tilde_next`` holds z~^{k+1}. At k = 0 (the initialization half-step)
    there is no ``z`` and no ``z_tilde``.
    """

    k: int
    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray]
    x_tilde: Optional[np.ndarray] = None
    y_tilde: Optional[np.ndarray] = None
    z_tilde: Optional[np.ndarray] = None
    z_tilde_next: Optional[np.ndarray] = None
    prev_y: Optional[np.ndarray] = None

    def vectors(self):
        return {k: v for k, v in self.__dict__.items() if isinstance(v, np.ndarray)}

    def is_finite(self):
        return all(np.all(np.isfinite(v)) for v in self.vectors().values())


@dataclass
class SolutionReport:
    status: str
    state: IterateState
    log: list
    wall_time: float
    trace: list = field(repr=False, default_factory=list)
    config: Optional[SolverConfig] = None
    S: Optional[np.ndarray] = field(repr=False, default=None)
    T: Optional[np.ndarray] = field(repr=False, default=None)
    message: str = ""

    @property
    def iterations(self):
        return self.state.k

    @property
    def final_kkt(self):
        return self.log[-1]["kkt_res"] if self.log else float("nan")


def _weight(spec, M, sigma, margin, dim, name):
    """Resolve an S / T specification into a dense operator and its eta (if linearized)."""
    if spec is None:
        return SelfAdjointOperator.zeros(dim), None
    if isinstance(spec, str):
        gram = M.gram()
        lam = float(np.linalg.eigvalsh(gram)[-1])
        eta = margin * sigma * lam if lam > 0 else 1.0
        return SelfAdjointOperator(eta * np.eye(dim) - sigma * gram, "positive-definite"), eta
    if np.isscalar(spec):
        if spec < 0:
            raise ConfigurationError(f"{name} = eps*I needs eps >= 0, got {spec}")
        return SelfAdjointOperator(float(spec) * np.eye(dim)), None
    mat = np.asarray(spec, dtype=float)
    if mat.shape != (dim, dim):
        raise ConfigurationError(f"{name} must be {dim}x{dim}, got {mat.shape}")
    return SelfAdjointOperator(mat), None


def proximal_terms(problem: Problem, config: SolverConfig):
    """Dense ``S`` and ``T`` implied by ``config`` on ``problem``."""
    S, _ = _weight(config.S, problem.A, config.sigma, config.linearization_margin, problem.Y.dim, "S")
    T, _ = _weight(config.T, problem.B, config.sigma, config.linearization_margin, problem.Z.dim, "T")
    return S, T


class _BlockSolver:
    """Solve ``0 in dh(u) + H u - rhs`` with ``H = sigma M M* + P``."""

    def __init__(self, h, M, P, sigma, mode, eta, name):
        self.h = h
        self.name = name
        H = sigma * M.gram() + P
        dim = H.shape[0]
        if mode == "auto":
            if eta is not None:
                mode = "prox_linearized"
            elif h.quadratic is not None:
                mode = "quadratic_direct"
            else:
                mode = "prox_exact"
        self.mode = mode
        if mode == "quadratic_direct":
            if h.quadratic is None:
                raise UnsupportedOperationError(
                    f"{name}-step: quadratic_direct needs a quadratic description of {h.name}"
                )
            K = h.quadratic.Q + H
            try:
                self._chol = scipy.linalg.cho_factor(K)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(f"{name}-step system is not positive definite") from exc
            self._q = h.quadratic.q
        elif mode == "prox_linearized":
            self.gamma = eta
        else:
            gamma = float(H[0, 0])
            scale = max(1.0, abs(gamma))
            if gamma <= 0 or np.max(np.abs(H - gamma * np.eye(dim))) > 1e-12 * scale:
                raise UnsupportedOperationError(
                    f"{name}-step is not exactly solvable: sigma M M* + P is not a positive "
                    "multiple of the identity and the function has no quadratic description"
                )
            self.gamma = gamma

    def __call__(self, rhs):
        if self.mode == "quadratic_direct":
            return scipy.linalg.cho_solve(self._chol, rhs - self._q)
        return self.h(rhs / self.gamma, 1.0 / self.gamma)


@dataclass
class _Setup:
    problem: Problem
    config: SolverConfig
    S: SelfAdjointOperator
    T: SelfAdjointOperator
    ysolve: _BlockSolver
    zsolve: _BlockSolver


def prepare(problem: Problem, config: SolverConfig) -> _Setup:
    """Resolve proximal terms and factorize both subproblems once."""
    margin = config.linearization_margin
    S, eta_y = _weight(config.S, problem.A, config.sigma, margin, problem.Y.dim, "S")
    T, eta_z = _weight(config.T, problem.B, config.sigma, margin, problem.Z.dim, "T")
    ysolve = _BlockSolver(problem.f, problem.A, S.matrix, config.sigma, config.y_mode, eta_y, "y")
    zsolve = _BlockSolver(problem.g, problem.B, T.matrix, config.sigma, config.z_mode, eta_z, "z")
    return _Setup(problem, config, S, T, ysolve, zsolve)


def _start(problem, config):
    def pick(v, space, what):
        return np.zeros(space.dim) if v is None else space.check(v, what).copy()

    return (
        pick(config.x0, problem.X, "x0"),
        pick(config.y0, problem.Y, "y0"),
        pick(config.z0, problem.Z, "z0"),
    )


def initial_state(problem: Problem, config: SolverConfig, setup: Optional[_Setup] = None):
    """State at k = 0.

    For p-GADMM this runs the initialization half-step: the y- and
    x-updates from ``(x~0, y~0, z~1)``. For the baselines it just packages
    the starting point.
    """
    x0, y0, z0 = _start(problem, config)
    if config.variant != "pgadmm":
        return IterateState(0, x0, y0, z0)
    setup = setup or prepare(problem, config)
    A, B, c, sigma = problem.A, problem.B, problem.c, config.sigma
    y = setup.ysolve(A(x0) - sigma * A(B.adjoint(z0) - c) + setup.S(y0))
    x = x0 - sigma * (A.adjoint(y) + B.adjoint(z0) - c)
    return IterateState(0, x, y, None, x_tilde=x0, y_tilde=y0, z_tilde_next=z0)


def step_pgadmm(problem: Problem, config: SolverConfig, state: IterateState,
                setup: Optional[_Setup] = None, fault: Optional[str] = None) -> IterateState:
    """One pass of sub-steps (a)-(f) of p-GADMM.

    ``fault`` deliberately corrupts a sub-step for negative testing:
    ``"x_update"`` scales the multiplier step by 1.5 and ``"relaxation"``
    over-relaxes y~ by a factor 2.5.
    """
    setup = setup or prepare(problem, config)
    A, B, c = problem.A, problem.B, problem.c
    sigma, rho = config.sigma, config.rho
    z_tilde = state.z_tilde_next

    # (a)
    z = setup.zsolve(B(state.x) - sigma * B(A.adjoint(state.y) - c) + setup.T(z_tilde))
    # (b), (c), (d)
    rho_y = 2.5 * rho if fault == "relaxation" else rho
    y_tilde = state.y_tilde + rho_y * (state.y - state.y_tilde)
    x_tilde = state.x_tilde + rho * (state.x - state.x_tilde)
    z_tilde_next = z_tilde + rho * (z - z_tilde)
    # (e)
    y = setup.ysolve(A(x_tilde) - sigma * A(B.adjoint(z_tilde_next) - c) + setup.S(y_tilde))
    # (f)
    step = 1.5 * sigma if fault == "x_update" else sigma
    x = x_tilde - step * (A.adjoint(y) + B.adjoint(z_tilde_next) - c)
    return IterateState(state.k + 1, x, y, z, x_tilde, y_tilde, z_tilde, z_tilde_next, state.y)


def step_gadmm(problem: Problem, config: SolverConfig, state: IterateState,
               setup: Optional[_Setup] = None) -> IterateState:
    """One iteration of generalized ADMM with relaxation factor ``rho``."""
    setup = setup or prepare(problem, config)
    A, B, c = problem.A, problem.B, problem.c
    sigma, rho = config.sigma, config.rho
    x, z_old = state.x, state.z
    y = setup.ysolve(A(x) - sigma * A(B.adjoint(z_old) - c))
    Bz_old = B.adjoint(z_old)
    relaxed = rho * (A.adjoint(y) + Bz_old - c)
    z = setup.zsolve(B(x) - sigma * B(relaxed - Bz_old))
    x = x - sigma * (relaxed + B.adjoint(z) - Bz_old)
    return IterateState(state.k + 1, x, y, z, prev_y=state.y)


def step_admm(problem: Problem, config: SolverConfig, state: IterateState,
              setup: Optional[_Setup] = None) -> IterateState:
    """One iteration of classic ADMM with step length ``tau``.

    With ``order="zy"`` the z-block is minimized first, which is the same
    scheme applied with the roles of the two blocks exchanged.
    """
    setup = setup or prepare(problem, config)
    A, B, c = problem.A, problem.B, problem.c
    sigma = config.sigma
    x, y, z = state.x, state.y, state.z
    if config.order == "yz":
        y = setup.ysolve(A(x) - sigma * A(B.adjoint(z) - c))
        z = setup.zsolve(B(x) - sigma * B(A.adjoint(y) - c))
    else:
        z = setup.zsolve(B(x) - sigma * B(A.adjoint(y) - c))
        y = setup.ysolve(A(x) - sigma * A(B.adjoint(z) - c))
    x = x - config.tau * sigma * (A.adjoint(y) + B.adjoint(z) - c)
    return IterateState(state.k + 1, x, y, z, prev_y=state.y)


def _step(problem, config, state, setup, fault):
    if config.variant == "pgadmm":
        return step_pgadmm(problem, config, state, setup, fault)
    if fault is not None:
        raise ConfigurationError("fault injection is only defined for pgadmm")
    if config.variant == "gadmm":
        return step_gadmm(problem, config, state, setup)
    return step_admm(problem, config, state, setup)


def solve(problem: Problem, config: SolverConfig, fault: Optional[str] = None) -> SolutionReport:
    """Iterate until ``||R(nu^k)|| / (1 + ||c||) <= tol`` or ``max_iter``.

    The log holds one record per iteration ``k >= 1`` with the primal
    residual norm, the relative KKT residual, and for p-GADMM the value of
    the residual bound ``upsilon``.
    """
    from .diagnostics import kappa, kkt_mapping, NuPoint, upsilon

    if fault is not None and fault not in FAULTS:
        raise ConfigurationError(f"unknown fault {fault!r}; expected one of {FAULTS}")
    t0 = time.perf_counter()
    setup = prepare(problem, config)
    scale = 1.0 + float(np.linalg.norm(problem.c))
    kap = kappa(problem, config, S=setup.S, T=setup.T) if config.variant == "pgadmm" else None

    state = initial_state(problem, config, setup)
    trace = [state]
    records = []
    status, message = "max_iter", ""
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(config.max_iter):
            try:
                new = _step(problem, config, state, setup, fault)
            except ConfigurationError:
                raise
            except (np.linalg.LinAlgError, NumericalError, FloatingPointError, ValueError) as exc:
                # ValueError: scipy refuses non-finite right-hand sides
                status, message = "numerical_failure", str(exc)
                break
            if not new.is_finite():
                status, message = "numerical_failure", f"non-finite iterate at k={new.k}"
                break
            nu = NuPoint.from_state(new)
            r = problem.A.adjoint(new.y) + problem.B.adjoint(new.z) - problem.c
            rec = {
                "k": new.k,
                "primal_res": float(np.linalg.norm(r)),
                "kkt_res": float(np.linalg.norm(kkt_mapping(problem, nu))) / scale,
            }
            if kap is not None:
                rec["upsilon"] = upsilon(problem, config, state, new, kappa_value=kap, S=setup.S, T=setup.T)
            records.append(rec)
            trace.append(new)
            state = new
            if rec["kkt_res"] <= config.tol:
                status = "converged"
                break
    wall = time.perf_counter() - t0
    log.info("%s finished: status=%s k=%d wall=%.3fs", config.variant, status, state.k, wall)
    return SolutionReport(
        status, state, records, wall, trace, config, setup.S.matrix, setup.T.matrix, message
    )
