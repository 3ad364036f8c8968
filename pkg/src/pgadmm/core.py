"""Problem objects for ``min f(y) + g(z)  s.t.  A* y + B* z = c``.

Orientation follows the usual convention for this problem class: ``A`` maps
the multiplier space X into Y and ``A*`` maps Y back into X (likewise ``B``
into Z). With dense backing, ``A`` is stored as an ``(m, n)`` array, so
``A x`` is ``A @ x`` and ``A* y`` is ``A.T @ y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConfigurationError",
    "UnsupportedOperationError",
    "NumericalError",
    "DegenerateInstanceError",
    "VectorSpaceTag",
    "LinearMap",
    "SelfAdjointOperator",
    "ProxOracle",
    "QuadraticDescription",
    "Problem",
    "adjoint_check",
    "power_iteration",
    "lagrangian",
    "aug_lagrangian",
    "primal_residual",
]


class ConfigurationError(ValueError):
    """Invalid parameters, dimensions or file contents."""


class UnsupportedOperationError(NotImplementedError):
    """The requested operation needs data the object does not carry."""


class NumericalError(ArithmeticError):
    """A linear solve or iteration broke down numerically."""


class DegenerateInstanceError(NumericalError):
    """The instance has no unique KKT point the oracle can certify."""


@dataclass(frozen=True)
class VectorSpaceTag:
    dim: int
    label: str

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"space {self.label} needs dim >= 1, got {self.dim}")
        if self.label not in ("X", "Y", "Z"):
            raise ConfigurationError(f"unknown space label {self.label!r}")

    def check(self, v, what="vector"):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ConfigurationError(
                f"{what} has shape {v.shape}, expected ({self.dim},) in space {self.label}"
            )
        return v


def power_iteration(apply, dim, tol=1e-10, max_iter=500):
    """Largest eigenvalue of a positive semidefinite operator.

    Starts from the normalised all-ones vector so the result is
    deterministic. Stops once the Rayleigh quotient changes by less than
    ``tol`` relative to its value.
    """
    v = np.ones(dim) / np.sqrt(dim)
    lam = 0.0
    for _ in range(max_iter):
        w = apply(v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


class LinearMap:
    """Linear map from X (``cols``) into Y or Z (``rows``) with its adjoint.

    Dense by default. A matrix-free map can be built with
    :meth:`from_callables`; it must still pass :func:`adjoint_check`.
    """

    def __init__(self, matrix=None, *, forward=None, adjoint=None, shape=None):
        if matrix is not None:
            matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
            if matrix.ndim != 2:
                raise ConfigurationError("linear map matrix must be 2-D")
            self.matrix = matrix
            self.rows, self.cols = matrix.shape
            self._forward = lambda x: self.matrix @ x
            self._adjoint = lambda y: self.matrix.T @ y
        else:
            if forward is None or adjoint is None or shape is None:
                raise ConfigurationError("matrix-free map needs forward, adjoint and shape")
            self.matrix = None
            self.rows, self.cols = shape
            self._forward = forward
            self._adjoint = adjoint

    @classmethod
    def from_callables(cls, forward, adjoint, shape):
        return cls(forward=forward, adjoint=adjoint, shape=shape)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    def __call__(self, x):
        return self.forward(x)

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ConfigurationError(f"map expects input of length {self.cols}, got {x.shape}")
        return self._forward(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise ConfigurationError(f"adjoint expects input of length {self.rows}, got {y.shape}")
        return self._adjoint(y)

    def dense(self):
        """Dense ``(rows, cols)`` array, materialised column by column if needed."""
        if self.matrix is not None:
            return self.matrix
        return np.column_stack([self._forward(e) for e in np.eye(self.cols)])

    def gram(self):
        """Dense ``M M*`` on the codomain."""
        M = self.dense()
        return M @ M.T

    @property
    def shape(self):
        return (self.rows, self.cols)


def adjoint_check(lmap: LinearMap, trials: int = 10, seed=0) -> float:
    """Largest relative defect of ``<A x, y> = <x, A* y>`` over random probes."""
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(lmap.cols)
        y = rng.standard_normal(lmap.rows)
        lhs = float(lmap.forward(x) @ y)
        rhs = float(x @ lmap.adjoint(y))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return worst


class SelfAdjointOperator:
    """Dense symmetric positive semidefinite operator (S, T, Sigma_f, ...).

    ``definiteness`` is one of ``"positive-definite"``, ``"positive-semidefinite"``
    or ``"zero"``; if given it is checked against the spectrum.
    """

    _KINDS = ("positive-definite", "positive-semidefinite", "zero")

    def __init__(self, matrix, definiteness=None, sym_tol=1e-12):
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ConfigurationError(f"self-adjoint operator must be square, got {M.shape}")
        scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
        if np.max(np.abs(M - M.T), initial=0.0) > sym_tol * scale:
            raise ConfigurationError("operator is not symmetric")
        self.matrix = 0.5 * (M + M.T)
        self.dim = M.shape[0]
        eig = np.linalg.eigvalsh(self.matrix)
        self.lambda_min = float(eig[0])
        self.lambda_max = float(eig[-1])
        tol = 1e-12 * max(1.0, abs(self.lambda_max))
        if not np.any(self.matrix):
            found = "zero"
        elif self.lambda_min > tol:
            found = "positive-definite"
        elif self.lambda_min >= -tol:
            found = "positive-semidefinite"
        else:
            raise ConfigurationError(
                f"operator is indefinite (lambda_min = {self.lambda_min:.3e})"
            )
        if definiteness is not None:
            if definiteness not in self._KINDS:
                raise ConfigurationError(f"unknown definiteness {definiteness!r}")
            # indefinite spectra were rejected above, so any PSD declaration holds
            if definiteness != "positive-semidefinite" and definiteness != found:
                raise ConfigurationError(
                    f"declared {definiteness} but spectrum says {found}"
                )
        self.definiteness = found

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros((n, n)))

    @classmethod
    def scaled_identity(cls, n, eps):
        return cls(eps * np.eye(n))

    def __call__(self, v):
        return self.matrix @ v

    @property
    def norm(self):
        return max(self.lambda_max, 0.0)

    def sqnorm(self, v):
        """``||v||^2_G = <v, G v>``."""
        return float(v @ (self.matrix @ v))


@dataclass(frozen=True)
class QuadraticDescription:
    """``h(u) = 0.5 u'Qu + q'u + const`` with ``Q`` positive semidefinite."""

    Q: np.ndarray
    q: np.ndarray
    const: float = 0.0

    def value(self, u):
        return float(0.5 * u @ (self.Q @ u) + self.q @ u + self.const)

    def gradient(self, u):
        return self.Q @ u + self.q


@dataclass
class ProxOracle:
    """Proximal access to a closed proper convex function.

    ``prox(v, t)`` returns ``argmin_u h(u) + ||u - v||^2 / (2 t)``.
    """

    dim: int
    prox: Callable[[np.ndarray, float], np.ndarray]
    value: Optional[Callable[[np.ndarray], float]] = None
    sigma: Optional[np.ndarray] = None
    quadratic: Optional[QuadraticDescription] = None
    name: str = "h"
    spec: Optional[dict] = None

    def __post_init__(self):
        if self.sigma is None:
            self.sigma = np.zeros((self.dim, self.dim))

    def __call__(self, v, t=1.0):
        if t <= 0:
            raise ConfigurationError(f"prox scale must be positive, got {t}")
        return self.prox(np.asarray(v, dtype=float), float(t))

    def evaluate(self, u):
        if self.value is None:
            raise UnsupportedOperationError(f"{self.name} has no function-value evaluator")
        return self.value(np.asarray(u, dtype=float))


@dataclass
class Problem:
    """``min f(y) + g(z)  s.t.  A* y + B* z = c``.

    ``sigma_f`` and ``sigma_g`` are the strong-monotonicity moduli of the
    subdifferentials; they default to the ones carried by the oracles, which
    default to zero.
    """

    f: ProxOracle
    g: ProxOracle
    A: LinearMap
    B: LinearMap
    c: np.ndarray
    sigma_f: Optional[np.ndarray] = None
    sigma_g: Optional[np.ndarray] = None
    name: str = "problem"
    X: VectorSpaceTag = field(init=False)
    Y: VectorSpaceTag = field(init=False)
    Z: VectorSpaceTag = field(init=False)

    def __post_init__(self):
        if not isinstance(self.A, LinearMap):
            self.A = LinearMap(self.A)
        if not isinstance(self.B, LinearMap):
            self.B = LinearMap(self.B)
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = self.c.shape[0]
        if self.A.cols != n or self.B.cols != n:
            raise ConfigurationError(
                f"A and B must act on X of dim {n}; got A {self.A.shape}, B {self.B.shape}"
            )
        if self.f.dim != self.A.rows:
            raise ConfigurationError(f"f lives on dim {self.f.dim} but A maps into dim {self.A.rows}")
        if self.g.dim != self.B.rows:
            raise ConfigurationError(f"g lives on dim {self.g.dim} but B maps into dim {self.B.rows}")
        self.X = VectorSpaceTag(n, "X")
        self.Y = VectorSpaceTag(self.A.rows, "Y")
        self.Z = VectorSpaceTag(self.B.rows, "Z")
        self.sigma_f = SelfAdjointOperator(
            self.f.sigma if self.sigma_f is None else self.sigma_f
        ).matrix
        self.sigma_g = SelfAdjointOperator(
            self.g.sigma if self.sigma_g is None else self.sigma_g
        ).matrix
        if self.sigma_f.shape != (self.Y.dim,) * 2 or self.sigma_g.shape != (self.Z.dim,) * 2:
            raise ConfigurationError("Sigma_f / Sigma_g dimensions do not match Y / Z")

    @property
    def dims(self):
        return {"x": self.X.dim, "y": self.Y.dim, "z": self.Z.dim}

    def cross_check_quadratic(self, trials=20, seed=0, tol=1e-8):
        """Largest mismatch between a quadratic description and its prox oracle."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for h in (self.f, self.g):
            if h.quadratic is None:
                continue
            Q, q = h.quadratic.Q, h.quadratic.q
            for _ in range(trials):
                v = rng.standard_normal(h.dim)
                t = float(rng.uniform(0.1, 10.0))
                direct = np.linalg.solve(np.eye(h.dim) + t * Q, v - t * q)
                worst = max(worst, float(np.linalg.norm(h(v, t) - direct)))
        if worst > tol:
            raise ConfigurationError(
                f"quadratic description disagrees with prox oracle (defect {worst:.2e})"
            )
        return worst


def primal_residual(problem: Problem, y, z):
    """``A* y + B* z - c``, an element of X."""
    y = problem.Y.check(y, "y")
    z = problem.Z.check(z, "z")
    return problem.A.adjoint(y) + problem.B.adjoint(z) - problem.c


def lagrangian(problem: Problem, y, z, x):
    """``f(y) + g(z) - <x, A* y + B* z - c>``."""
    x = problem.X.check(x, "x")
    r = primal_residual(problem, y, z)
    return problem.f.evaluate(y) + problem.g.evaluate(z) - float(x @ r)


def aug_lagrangian(problem: Problem, sigma, y, z, x):
    """Lagrangian plus ``(sigma/2) ||A* y + B* z - c||^2``."""
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be positive, got {sigma}")
    r = primal_residual(problem, y, z)
    return lagrangian(problem, y, z, x) + 0.5 * sigma * float(r @ r)
