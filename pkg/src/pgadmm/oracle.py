"""Reference KKT points computed without any splitting iteration.

Two independent routes: a dense solve of the KKT system when both
functions are quadratic, and sign-pattern enumeration for small lasso
instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ConfigurationError,
    DegenerateInstanceError,
    NumericalError,
    Problem,
    UnsupportedOperationError,
)
from .diagnostics import NuPoint, XiForm, kkt_mapping, xi_quadratic_form

__all__ = [
    "OracleSolution",
    "solve_quadratic_kkt",
    "solve_lasso_enumeration",
    "distance_to_oracle",
    "solve_oracle",
    "MAX_ENUM_DIM",
]

MAX_ENUM_DIM = 12
CERT_TOL = 1e-10
VERIFY_TOL = 1e-9


@dataclass
class OracleSolution:
    y: np.ndarray
    z: np.ndarray
    x: np.ndarray
    residual: float
    method: str
    patterns: int = 1

    @property
    def unique(self):
        return self.patterns == 1

    def to_json(self):
        return {
            "y": self.y.tolist(),
            "z": self.z.tolist(),
            "x": self.x.tolist(),
            "residual": self.residual,
            "method": self.method,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            np.asarray(d["y"], float), np.asarray(d["z"], float), np.asarray(d["x"], float),
            float(d["residual"]), d["method"],
        )


def _certify(problem, y, z, x, method, patterns=1):
    sol = OracleSolution(y, z, x, 0.0, method, patterns)
    sol.residual = float(np.linalg.norm(kkt_mapping(problem, NuPoint.from_solution(sol))))
    if sol.residual > CERT_TOL:
        raise NumericalError(
            f"{method} oracle failed its certificate: ||R(nu_bar)|| = {sol.residual:.2e}"
        )
    return sol


def solve_quadratic_kkt(problem: Problem) -> OracleSolution:
    """Solve the KKT system directly when ``f`` and ``g`` are both quadratic.

    The system is ``[Qf 0 -A; 0 Qg -B; A* B* 0] (y, z, x) = (-qf, -qg, c)``.
    """
    fq, gq = problem.f.quadratic, problem.g.quadratic
    if fq is None or gq is None:
        raise UnsupportedOperationError("the KKT linear solve needs quadratic f and g")
    A, B = problem.A.dense(), problem.B.dense()
    m, p, n = problem.Y.dim, problem.Z.dim, problem.X.dim
    K = np.block([
        [fq.Q, np.zeros((m, p)), -A],
        [np.zeros((p, m)), gq.Q, -B],
        [A.T, B.T, np.zeros((n, n))],
    ])
    rhs = np.concatenate([-fq.q, -gq.q, problem.c])
    if np.linalg.cond(K) > 1e12:
        raise DegenerateInstanceError("KKT system is singular or too ill-conditioned")
    sol = np.linalg.solve(K, rhs)
    return _certify(problem, sol[:m], sol[m:m + p], sol[m + p:], "kkt_linear_solve")


def _lasso_data(problem: Problem):
    """``(Q, q, mu)`` for the canonical lasso encoding, or raise."""
    n = problem.X.dim
    A, B = problem.A.dense(), problem.B.dense()
    if problem.Y.dim != n or problem.Z.dim != n:
        raise ConfigurationError("lasso encoding needs dim x = dim y = dim z")
    if not (np.array_equal(A, np.eye(n)) and np.array_equal(B, -np.eye(n)) and not np.any(problem.c)):
        raise ConfigurationError("lasso encoding needs A = I, B = -I, c = 0")
    fq = problem.f.quadratic
    spec = getattr(problem.g, "spec", None) or {}
    if fq is None or spec.get("kind") != "l1":
        raise ConfigurationError("lasso encoding needs quadratic f and l1 g")
    return fq.Q, fq.q, float(spec.get("weight", 1.0))


def solve_lasso_enumeration(problem: Problem) -> OracleSolution:
    """Enumerate all ``3^n`` sign patterns of ``z`` for a lasso instance.

    For ``min 0.5 y'Qy + q'y + mu ||z||_1  s.t.  y - z = 0`` a pattern
    ``s in {-1, 0, 1}^n`` fixes the support ``P = {s != 0}``; the reduced
    stationarity system ``Q_PP y_P = -q_P - mu s_P`` gives a candidate that
    is accepted when its signs agree with ``s`` and the inactive
    coordinates satisfy ``|(Q y + q)_i| <= mu``. ``patterns`` counts the
    verified patterns; rate suites require exactly one.
    """
    Q, q, mu = _lasso_data(problem)
    n = Q.shape[0]
    if n > MAX_ENUM_DIM:
        raise ConfigurationError(f"enumeration is limited to n <= {MAX_ENUM_DIM}, got {n}")
    found = []
    for pattern in itertools.product((-1, 0, 1), repeat=n):
        s = np.asarray(pattern, dtype=float)
        act = s != 0
        y = np.zeros(n)
        if act.any():
            Qpp = Q[np.ix_(act, act)]
            try:
                y[act] = np.linalg.solve(Qpp, -q[act] - mu * s[act])
            except np.linalg.LinAlgError:
                continue
        if np.any(s[act] * y[act] < -VERIFY_TOL):
            continue
        grad = Q @ y + q
        if np.any(np.abs(grad[~act]) > mu + VERIFY_TOL):
            continue
        found.append(y)
    if not found:
        raise NumericalError("no sign pattern verified; is Q positive definite?")
    y = found[0]
    x = Q @ y + q  # A x = x must be the gradient of f at y
    return _certify(problem, y, y.copy(), x, "sign_enumeration", len(found))


def solve_oracle(problem: Problem) -> Optional[OracleSolution]:
    """Pick whichever oracle applies, or return ``None``."""
    try:
        return solve_lasso_enumeration(problem)
    except ConfigurationError:
        pass
    try:
        return solve_quadratic_kkt(problem)
    except UnsupportedOperationError:
        return None


def distance_to_oracle(nu: NuPoint, sol: OracleSolution, xi: XiForm) -> float:
    """Xi-weighted distance from ``nu`` to ``(x_bar, y_bar, 0, z_bar, 0)``."""
    d = nu - NuPoint.from_solution(sol)
    return float(np.sqrt(max(xi_quadratic_form(xi, d), 0.0)))
