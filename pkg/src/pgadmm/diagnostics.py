"""Convergence diagnostics for p-GADMM traces.

Everything here works on the analysis space ``V = X x Y x Y x Z x Z`` whose
points are ``nu = (x, y, y~ - y, z, z~ - z)``. Blocks are always laid out in
that order.

Error quantities ``(.)_e`` are differences from an oracle KKT point. Because
the oracle point is feasible, ``A* y_e + B* z_e`` equals the primal residual
``A* y + B* z - c`` and is computed that way.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .core import ConfigurationError, Problem, UnsupportedOperationError
from .solvers import IterateState, SolverConfig, proximal_terms

__all__ = [
    "NuPoint",
    "XiForm",
    "RateReport",
    "Violation",
    "kkt_mapping",
    "kappa",
    "kappa_value",
    "upsilon",
    "upsilon_terms",
    "assemble_xi",
    "xi_quadratic_form",
    "lyapunov",
    "lyapunov_gap",
    "descent_gap",
    "identity_defects",
    "trace_diagnostics",
    "check_trace",
    "rate_report",
    "theoretical_rate",
]


@dataclass
class NuPoint:
    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    z: np.ndarray
    dz: np.ndarray

    @classmethod
    def from_state(cls, state: IterateState):
        if state.z is None:
            raise ConfigurationError("nu^0 is undefined: the half-step produces no z^0")
        dy = np.zeros_like(state.y) if state.y_tilde is None else state.y_tilde - state.y
        dz = np.zeros_like(state.z) if state.z_tilde is None else state.z_tilde - state.z
        return cls(state.x, state.y, dy, state.z, dz)

    @classmethod
    def from_solution(cls, sol):
        """The point ``(x_bar, y_bar, 0, z_bar, 0)``."""
        return cls(sol.x, sol.y, np.zeros_like(sol.y), sol.z, np.zeros_like(sol.z))

    @classmethod
    def from_vector(cls, v, problem: Problem):
        n, m, p = problem.X.dim, problem.Y.dim, problem.Z.dim
        cuts = np.cumsum([n, m, m, p])
        return cls(*np.split(np.asarray(v, dtype=float), cuts))

    def vector(self):
        return np.concatenate([self.x, self.y, self.dy, self.z, self.dz])

    def __sub__(self, other):
        return NuPoint(*(a - b for a, b in zip(self.blocks(), other.blocks())))

    def blocks(self):
        return (self.x, self.y, self.dy, self.z, self.dz)


def kkt_mapping(problem: Problem, nu: NuPoint):
    """KKT residual map ``R(nu)``; its third and fifth blocks are identically zero."""
    A, B = problem.A, problem.B
    r_feas = A.adjoint(nu.y) + B.adjoint(nu.z) - problem.c
    r_y = nu.y - problem.f(nu.y + A(nu.x), 1.0)
    r_z = nu.z - problem.g(nu.z + B(nu.x), 1.0)
    return np.concatenate([r_feas, r_y, np.zeros_like(nu.dy), r_z, np.zeros_like(nu.dz)])


def _lam_max_BB(problem):
    return max(float(np.linalg.eigvalsh(problem.B.gram())[-1]), 0.0)


def kappa_value(norm_S, norm_T, rho, sigma, lam_BB):
    """``max{||S||, 3||T||, 3(2-rho)^2 sigma^2 lam, 3(1-rho)^2 sigma^2 lam + 1}``."""
    s2 = sigma * sigma * lam_BB
    return max(norm_S, 3.0 * norm_T, 3.0 * (2.0 - rho) ** 2 * s2, 3.0 * (1.0 - rho) ** 2 * s2 + 1.0)


def kappa(problem: Problem, config: SolverConfig, S=None, T=None):
    """The constant in the residual bound for this problem and configuration."""
    if S is None or T is None:
        S, T = proximal_terms(problem, config)
    return kappa_value(S.norm, T.norm, config.rho, config.sigma, _lam_max_BB(problem))


def _sq(v):
    return float(v @ v)


def _sqw(W, v):
    return float(v @ (W @ v))


def _matrices(problem, config, S, T):
    if S is None or T is None:
        S0, T0 = proximal_terms(problem, config)
        S = S0 if S is None else S
        T = T0 if T is None else T
    S = getattr(S, "matrix", S)
    T = getattr(T, "matrix", T)
    return np.asarray(S, dtype=float), np.asarray(T, dtype=float)


def upsilon_terms(problem: Problem, state_k: IterateState, state_k1: IterateState, S, T):
    """The four squared norms summed inside ``upsilon(nu^{k+1})``."""
    S, T = getattr(S, "matrix", S), getattr(T, "matrix", T)
    A, B = problem.A, problem.B
    r = A.adjoint(state_k1.y) + B.adjoint(state_k1.z) - problem.c
    return (
        _sqw(S, state_k1.y_tilde - state_k1.y),
        _sqw(T, state_k1.z_tilde - state_k1.z),
        _sq(r),
        _sq(A.adjoint(state_k1.y - state_k.y)),
    )


def upsilon(problem: Problem, config: SolverConfig, state_k: IterateState,
            state_k1: IterateState, kappa_value: Optional[float] = None, S=None, T=None):
    """Upper bound ``upsilon(nu^{k+1}) >= ||R(nu^{k+1})||^2`` from two consecutive states."""
    S, T = _matrices(problem, config, S, T)
    if kappa_value is None:
        kappa_value = kappa(problem, config)
    return kappa_value * sum(upsilon_terms(problem, state_k, state_k1, S, T))


@dataclass
class XiForm:
    matrix: np.ndarray = field(repr=False)
    lambda_max: float
    lambda_min: float
    dims: tuple

    @property
    def positive_definite(self):
        return self.lambda_min > 1e-10 * max(1.0, self.lambda_max)


def assemble_xi(problem: Problem, config: SolverConfig, S=None, T=None) -> XiForm:
    """Dense weighting operator on ``V`` under which p-GADMM contracts.

    Includes the rank-structured term ``0.5 (2 - rho) sigma theta theta*``
    with ``theta* nu = A* y + B* z``.
    """
    S, T = _matrices(problem, config, S, T)
    sigma, rho = config.sigma, config.rho
    A, B = problem.A.dense(), problem.B.dense()
    n, m, p = problem.X.dim, problem.Y.dim, problem.Z.dim
    Sf, Sg = problem.sigma_f, problem.sigma_g
    off = (1.0 - rho) / rho
    ix, iy, idy, iz, idz = (
        slice(0, n), slice(n, n + m), slice(n + m, n + 2 * m),
        slice(n + 2 * m, n + 2 * m + p), slice(n + 2 * m + p, n + 2 * m + 2 * p),
    )
    N = n + 2 * m + 2 * p
    X = np.zeros((N, N))
    X[ix, ix] = np.eye(n) / (sigma * rho)
    X[ix, iy] = off * A.T
    X[iy, ix] = off * A
    X[iy, iy] = (sigma / rho) * (A @ A.T) + S / rho + 2.0 * Sf
    X[iy, idy] = off * S
    X[idy, iy] = off * S
    X[idy, idy] = S / rho
    X[iz, iz] = T / rho + 2.0 * Sg
    X[iz, idz] = off * T
    X[idz, iz] = off * T
    X[idz, idz] = (1.0 - rho) ** 2 / rho * T
    theta_adj = np.zeros((n, N))
    theta_adj[:, iy] = A.T
    theta_adj[:, iz] = B.T
    X += 0.5 * (2.0 - rho) * sigma * (theta_adj.T @ theta_adj)
    X = 0.5 * (X + X.T)
    eig = np.linalg.eigvalsh(X)
    return XiForm(X, float(eig[-1]), float(eig[0]), (n, m, m, p, p))


def xi_quadratic_form(xi: XiForm, v) -> float:
    """``v' Xi v`` for a vector or :class:`NuPoint` in ``V``."""
    if isinstance(v, NuPoint):
        v = v.vector()
    v = np.asarray(v, dtype=float)
    if v.shape != (xi.matrix.shape[0],):
        raise ConfigurationError(f"vector of length {v.shape} does not live in V of dim {xi.matrix.shape[0]}")
    return float(v @ (xi.matrix @ v))


def _require(oracle):
    if oracle is None:
        raise UnsupportedOperationError("this diagnostic needs an oracle KKT point")


def lyapunov(problem: Problem, config: SolverConfig, state: IterateState, oracle,
             y_tilde_next=None, S=None, T=None) -> float:
    """Left-hand side ``M^k`` of the Lyapunov descent inequality.

    ``y~^{k+1}`` is taken from ``y_tilde_next`` when given (so a corrupted
    relaxation step is seen) and otherwise recomputed from the state.
    """
    _require(oracle)
    S, T = _matrices(problem, config, S, T)
    sigma, rho = config.sigma, config.rho
    A = problem.A
    if y_tilde_next is None:
        y_tilde_next = state.y_tilde + rho * (state.y - state.y_tilde)
    xe = state.x - oracle.x
    Aye = A.adjoint(state.y - oracle.y)
    return (
        _sq(xe + sigma * (1.0 - rho) * Aye) / (sigma * rho)
        + _sqw(S, y_tilde_next - oracle.y) / rho
        + _sqw(T, state.z_tilde_next - oracle.z) / rho
        + (2.0 - rho) * _sqw(S, state.y - state.y_tilde)
        + (2.0 - rho) * sigma * _sq(Aye)
    )


def _descent_terms(problem, config, state_k, state_k1, oracle, S, T):
    """Nonnegative terms on the right of the Lyapunov inequality at index k+1."""
    sigma, rho = config.sigma, config.rho
    A = problem.A
    r = A.adjoint(state_k1.y) + problem.B.adjoint(state_k1.z) - problem.c
    return {
        "sigma_f": 2.0 * _sqw(problem.sigma_f, state_k1.y - oracle.y),
        "sigma_g": 2.0 * _sqw(problem.sigma_g, state_k1.z - oracle.z),
        "residual": (2.0 - rho) * sigma * _sq(r),
        "dy": (2.0 - rho) * _sqw(S, state_k1.y_tilde - state_k1.y),
        "dz": (2.0 - rho) * _sqw(T, state_k1.z_tilde - state_k1.z),
        "Ady": sigma / rho * (2.0 - rho) ** 2 * _sq(A.adjoint(state_k1.y - state_k.y)),
    }


def lyapunov_gap(problem: Problem, config: SolverConfig, state_k: IterateState,
                 state_k1: IterateState, oracle, state_k2: Optional[IterateState] = None,
                 S=None, T=None, form="stated") -> float:
    """``M^k - M^{k+1} - D^{k+1}``, nonnegative on every p-GADMM trace.

    ``form="stated"`` carries the Sigma_f / Sigma_g terms only on the right
    at index k+1. ``form="full"`` also adds them (and half of the residual
    term) on the left at index k, which is the variant used when deriving
    the rate; it needs ``z^k`` so it starts at k = 1.
    """
    _require(oracle)
    S, T = _matrices(problem, config, S, T)
    y_t2 = None if state_k2 is None else state_k2.y_tilde
    m_k = lyapunov(problem, config, state_k, oracle, state_k1.y_tilde, S, T)
    m_k1 = lyapunov(problem, config, state_k1, oracle, y_t2, S, T)
    gap = m_k - m_k1 - sum(_descent_terms(problem, config, state_k, state_k1, oracle, S, T).values())
    if form == "full":
        if state_k.z is None:
            raise ConfigurationError("the full form needs z^k (k >= 1)")
        r_k = problem.A.adjoint(state_k.y) + problem.B.adjoint(state_k.z) - problem.c
        gap += (
            0.5 * (2.0 - config.rho) * config.sigma * _sq(r_k)
            + 2.0 * _sqw(problem.sigma_f, state_k.y - oracle.y)
            + 2.0 * _sqw(problem.sigma_g, state_k.z - oracle.z)
        )
    elif form != "stated":
        raise ConfigurationError(f"unknown form {form!r}")
    return gap


def _dist_sq(xi, state, nu_bar):
    return xi_quadratic_form(xi, NuPoint.from_state(state) - nu_bar)


def descent_gap(problem: Problem, config: SolverConfig, state_k: IterateState,
                state_k1: IterateState, oracle, xi: Optional[XiForm] = None,
                S=None, T=None) -> float:
    """Slack of the consolidated Xi-norm descent inequality between k and k+1."""
    _require(oracle)
    S, T = _matrices(problem, config, S, T)
    xi = xi or assemble_xi(problem, config, S, T)
    sigma, rho = config.sigma, config.rho
    nu_bar = NuPoint.from_solution(oracle)
    A = problem.A
    r = A.adjoint(state_k1.y) + problem.B.adjoint(state_k1.z) - problem.c
    decrease = (2.0 - rho) * (
        _sqw(S, state_k1.y_tilde - state_k1.y)
        + _sqw(T, state_k1.z_tilde - state_k1.z)
        + sigma / rho * (2.0 - rho) * _sq(A.adjoint(state_k1.y - state_k.y))
        + 0.5 * sigma * _sq(r)
    )
    return _dist_sq(xi, state_k, nu_bar) - _dist_sq(xi, state_k1, nu_bar) - decrease


def identity_defects(problem: Problem, config: SolverConfig, state_k: IterateState,
                     state_k1: IterateState, S=None, T=None) -> dict:
    """Norm defects of the three iterate identities linking consecutive states.

    ``multiplier`` is the multiplier recursion, ``y_prox`` and ``z_prox`` are the prox
    fixed-point forms of the y- and z-optimality conditions.
    """
    S, T = _matrices(problem, config, S, T)
    sigma, rho = config.sigma, config.rho
    A, B, c = problem.A, problem.B, problem.c
    xk, yk = state_k.x, state_k.y
    x1, y1, z1 = state_k1.x, state_k1.y, state_k1.z
    r1 = A.adjoint(y1) + B.adjoint(z1) - c
    pred_x = xk - sigma * rho * r1 + sigma * (1.0 - rho) * A.adjoint(yk - y1)
    y_fix = problem.f(y1 + A(x1) - S @ (y1 - state_k1.y_tilde), 1.0)
    w = xk - sigma * r1 + sigma * A.adjoint(y1 - yk)
    z_fix = problem.g(z1 + B(w) - T @ (z1 - state_k1.z_tilde), 1.0)
    return {
        "multiplier": float(np.linalg.norm(x1 - pred_x)),
        "y_prox": float(np.linalg.norm(y1 - y_fix)),
        "z_prox": float(np.linalg.norm(z1 - z_fix)),
    }


# default slacks for the trace checker: negative numbers are lower bounds on
# inequality gaps, positive numbers are upper bounds on identity defects
DEFAULT_SLACK = {
    "multiplier": 1e-10,
    "y_prox": 1e-8,
    "z_prox": 1e-8,
    "residual_bound": -1e-10,
    "lyapunov_gap": -1e-9,
    "descent_gap": -1e-9,
}


@dataclass
class Violation:
    k: int
    name: str
    value: float
    slack: float

    def __str__(self):
        return f"k={self.k} {self.name}: value={self.value:.3e} (slack {self.slack:.1e})"


def trace_diagnostics(problem: Problem, config: SolverConfig, trace, oracle=None,
                      S=None, T=None, xi: Optional[XiForm] = None) -> list:
    """One record per transition ``k -> k+1`` of a p-GADMM trace.

    Records are keyed by ``k+1``. Oracle-based columns are ``nan`` when no
    oracle is given.
    """
    if config.variant != "pgadmm":
        raise ConfigurationError("trace diagnostics are defined for pgadmm traces")
    S, T = _matrices(problem, config, S, T)
    kap = kappa(problem, config)
    scale = 1.0 + float(np.linalg.norm(problem.c))
    nan = float("nan")
    if oracle is not None:
        xi = xi or assemble_xi(problem, config, S, T)
        nu_bar = NuPoint.from_solution(oracle)
    rows = []
    prev_dist = None
    # diverging (faulted) traces overflow; the checkers then see inf or nan
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(trace) - 1):
            sk, sk1 = trace[i], trace[i + 1]
            sk2 = trace[i + 2] if i + 2 < len(trace) else None
            nu1 = NuPoint.from_state(sk1)
            rhat = kkt_mapping(problem, nu1)
            r = problem.A.adjoint(sk1.y) + problem.B.adjoint(sk1.z) - problem.c
            ups = kap * sum(upsilon_terms(problem, sk, sk1, S, T))
            row = {
                "k": sk1.k,
                "primal_res": float(np.linalg.norm(r)),
                "kkt_res": float(np.linalg.norm(rhat)) / scale,
                "upsilon": ups,
                "residual_bound": ups - _sq(rhat),
            }
            row.update(identity_defects(problem, config, sk, sk1, S, T))
            if oracle is not None:
                row["lyapunov"] = lyapunov(problem, config, sk1, oracle, None if sk2 is None else sk2.y_tilde, S, T)
                row["lyapunov_gap"] = lyapunov_gap(problem, config, sk, sk1, oracle, sk2, S, T)
                dist = _dist_sq(xi, sk1, nu_bar)
                row["dist_xi_sq"] = dist
                if sk.z is not None:
                    row["lyapunov_full"] = lyapunov_gap(problem, config, sk, sk1, oracle, sk2, S, T, form="full")
                    row["descent_gap"] = descent_gap(problem, config, sk, sk1, oracle, xi, S, T)
                else:
                    row["lyapunov_full"] = row["descent_gap"] = nan
                row["ratio"] = dist / prev_dist if prev_dist else nan
                prev_dist = dist
            else:
                for key in ("lyapunov", "lyapunov_gap", "lyapunov_full", "descent_gap", "dist_xi_sq", "ratio"):
                    row[key] = nan
            rows.append(row)
    return rows


def check_trace(problem: Problem, config: SolverConfig, trace, oracle=None,
                slack: Optional[dict] = None, rows=None) -> list:
    """All identity / inequality violations along a trace, in iteration order."""
    slack = {**DEFAULT_SLACK, **(slack or {})}
    rows = rows if rows is not None else trace_diagnostics(problem, config, trace, oracle)
    out = []
    for row in rows:
        for name in ("multiplier", "y_prox", "z_prox"):
            if row[name] > slack[name]:
                out.append(Violation(row["k"], name, row[name], slack[name]))
        for name in ("residual_bound", "lyapunov_gap", "descent_gap"):
            v = row[name]
            if not math.isnan(v) and v < slack[name]:
                out.append(Violation(row["k"], name, v, slack[name]))
    return out


def theoretical_rate(rho, sigma, lam, kappa_value, lambda_max_xi):
    """``(alpha, beta)`` with ``alpha = 1/(1+beta)`` for calmness modulus ``lam``."""
    beta = (2.0 - rho) * min(1.0, 0.5 * sigma, sigma * (2.0 - rho) / rho) / (
        lam * lam * kappa_value * lambda_max_xi
    )
    return 1.0 / (1.0 + beta), beta


@dataclass
class RateReport:
    dist_xi_sq: list = field(repr=False)
    ratios: list = field(repr=False)
    zeta_hat: float
    tail_geomean: float
    tail_window: int
    kappa_bar_index: Optional[int]
    max_ratio_after_threshold: float
    kappa: float
    lambda_max_xi: float
    lambda_min_xi: float
    lambda_lower_bound: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    calmness_modulus: Optional[float] = None

    @property
    def certified(self):
        return (
            self.kappa_bar_index is not None
            and self.max_ratio_after_threshold < 1.0
            and self.zeta_hat < 1.0
        )

    def to_json(self):
        d = asdict(self)
        d.pop("dist_xi_sq")
        d.pop("ratios")
        d["certified"] = self.certified
        return d


def rate_report(problem: Problem, config: SolverConfig, trace, oracle, lam: Optional[float] = None,
                tail_window: Optional[int] = None, eps: float = 1e-2, xi: Optional[XiForm] = None,
                min_tail=20) -> RateReport:
    """Measured contraction of ``dist_Xi(nu^k, Theta)`` along a trace.

    The threshold index is the first ``k`` with ``||nu^k - nu_bar|| <= eps``.
    ``zeta_hat`` is the largest ratio in the tail window (default: last 25 %
    of ratios, at least ``min_tail``). When ``lam`` is given the
    theoretical ``alpha`` and ``beta`` are filled in as well.
    """
    _require(oracle)
    S, T = _matrices(problem, config, None, None)
    xi = xi or assemble_xi(problem, config, S, T)
    nu_bar = NuPoint.from_solution(oracle)
    states = [s for s in trace if s.z is not None]
    dist = [_dist_sq(xi, s, nu_bar) for s in states]
    ratios = [b / a if a > 0 else float("nan") for a, b in zip(dist[:-1], dist[1:])]
    if tail_window is None:
        tail_window = max(min_tail, math.ceil(0.25 * len(ratios)))
    if len(ratios) < tail_window:
        raise ConfigurationError(
            f"trace has {len(ratios)} ratios, fewer than the tail window {tail_window}"
        )
    tail = np.asarray(ratios[-tail_window:])
    zeta_hat = float(np.max(tail))
    geomean = float(np.exp(np.mean(np.log(tail)))) if np.all(tail > 0) else 0.0

    kbar = None
    lam_lb = 0.0
    for i, s in enumerate(states):
        nu = NuPoint.from_state(s)
        gap = np.linalg.norm((nu - nu_bar).vector())
        res = np.linalg.norm(kkt_mapping(problem, nu))
        if res > 0:
            lam_lb = max(lam_lb, float(gap / res))
        if kbar is None and gap <= eps:
            kbar = i
    after = ratios[kbar:] if kbar is not None else []
    max_after = float(np.max(after)) if len(after) else float("nan")

    kap = kappa(problem, config)
    alpha = beta = None
    if lam is not None:
        alpha, beta = theoretical_rate(config.rho, config.sigma, lam, kap, xi.lambda_max)
    return RateReport(
        dist_xi_sq=dist,
        ratios=ratios,
        zeta_hat=zeta_hat,
        tail_geomean=geomean,
        tail_window=tail_window,
        kappa_bar_index=None if kbar is None else states[kbar].k,
        max_ratio_after_threshold=max_after,
        kappa=kap,
        lambda_max_xi=xi.lambda_max,
        lambda_min_xi=xi.lambda_min,
        lambda_lower_bound=lam_lb,
        alpha=alpha,
        beta=beta,
        calmness_modulus=lam,
    )
