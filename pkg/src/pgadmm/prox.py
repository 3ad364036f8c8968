"""Proximal operators for the function families used to build instances.

Every prox here solves ``argmin_u h(u) + ||u - v||^2 / (2 t)``.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigurationError, NumericalError, ProxOracle, QuadraticDescription

__all__ = [
    "prox_l1",
    "prox_squared_l2",
    "prox_quadratic",
    "prox_indicator",
    "make_oracle",
    "oracle_from_spec",
    "spec_to_json",
    "UNBOUNDED",
]

# file-format sentinel for an infinite box bound
UNBOUNDED = "unbounded"

_COND_LIMIT = 1e14


def _check_t(t):
    if not t > 0:
        raise ConfigurationError(f"prox scale t must be positive, got {t}")


def prox_l1(v, t, mu):
    """Soft thresholding, the prox of ``mu * ||u||_1``."""
    _check_t(t)
    if mu < 0:
        raise ConfigurationError(f"l1 weight must be nonnegative, got {mu}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t * mu, 0.0)


def prox_squared_l2(v, t, mu):
    """Prox of ``(mu/2) ||u||^2``: shrink by ``1 / (1 + t mu)``."""
    _check_t(t)
    if mu < 0:
        raise ConfigurationError(f"squared-l2 weight must be nonnegative, got {mu}")
    return np.asarray(v, dtype=float) / (1.0 + t * mu)


def prox_quadratic(v, t, Q, q):
    """Prox of ``0.5 u'Qu + q'u``: solve ``(I + t Q) u = v - t q``."""
    _check_t(t)
    v = np.asarray(v, dtype=float)
    Q = np.asarray(Q, dtype=float)
    M = np.eye(v.shape[0]) + t * Q
    if np.linalg.cond(M) > _COND_LIMIT:
        raise NumericalError("prox_quadratic system is too ill-conditioned")
    return np.linalg.solve(M, v - t * np.asarray(q, dtype=float))


def prox_indicator(v, t, lo, hi):
    """Projection onto the box ``[lo, hi]`` (independent of ``t``)."""
    _check_t(t)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ConfigurationError("box needs lo <= hi in every component")
    return np.clip(np.asarray(v, dtype=float), lo, hi)


def _bound(value, dim, default):
    """Decode a box bound from its file form (scalar, list, or sentinel)."""
    if value is None or (isinstance(value, str) and value == UNBOUNDED):
        return np.full(dim, default)
    arr = np.asarray(
        [default if (isinstance(b, str) and b == UNBOUNDED) else b for b in np.atleast_1d(value)],
        dtype=object,
    ).astype(float)
    if arr.shape == (1,):
        arr = np.full(dim, arr[0])
    if arr.shape != (dim,):
        raise ConfigurationError(f"box bound has length {arr.shape[0]}, expected {dim}")
    return arr


def make_oracle(kind, dim, **params):
    """Build a :class:`ProxOracle` for one of the supported function kinds.

    Supported kinds and their parameters:

    ``l1`` (``weight``), ``squared_l2`` (``weight``), ``quadratic`` (``Q``,
    ``q``, optional ``const``), ``nonneg``, ``box`` (``lo``, ``hi``), ``zero``.
    """
    oracle = _build(kind, dim, params)
    oracle.spec = {"kind": kind, **params}
    return oracle


def _build(kind, dim, params):
    if dim < 1:
        raise ConfigurationError("oracle dimension must be >= 1")
    if kind == "l1":
        mu = float(params.get("weight", 1.0))
        if mu < 0:
            raise ConfigurationError(f"l1 weight must be nonnegative, got {mu}")
        return ProxOracle(
            dim,
            prox=lambda v, t: prox_l1(v, t, mu),
            value=lambda u: mu * float(np.abs(u).sum()),
            name=f"{mu}*l1",
        )
    if kind == "squared_l2":
        mu = float(params.get("weight", 1.0))
        if mu < 0:
            raise ConfigurationError(f"squared-l2 weight must be nonnegative, got {mu}")
        quad = QuadraticDescription(mu * np.eye(dim), np.zeros(dim))
        return ProxOracle(
            dim,
            prox=lambda v, t: prox_squared_l2(v, t, mu),
            value=quad.value,
            quadratic=quad,
            name=f"{mu}/2*sq_l2",
        )
    if kind == "quadratic":
        Q = np.atleast_2d(np.asarray(params["Q"], dtype=float))
        q = np.asarray(params.get("q", np.zeros(dim)), dtype=float)
        if Q.shape != (dim, dim) or q.shape != (dim,):
            raise ConfigurationError(f"quadratic needs Q ({dim},{dim}) and q ({dim},)")
        if np.max(np.abs(Q - Q.T)) > 1e-12 * max(1.0, np.max(np.abs(Q))):
            raise ConfigurationError("quadratic Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        if np.linalg.eigvalsh(Q)[0] < -1e-12 * max(1.0, np.max(np.abs(Q))):
            raise ConfigurationError("quadratic Q must be positive semidefinite")
        quad = QuadraticDescription(Q, q, float(params.get("const", 0.0)))
        return ProxOracle(
            dim,
            prox=lambda v, t: prox_quadratic(v, t, Q, q),
            value=quad.value,
            quadratic=quad,
            name="quadratic",
        )
    if kind in ("nonneg", "box"):
        if kind == "nonneg":
            lo, hi = np.zeros(dim), np.full(dim, np.inf)
        else:
            lo = _bound(params.get("lo"), dim, -np.inf)
            hi = _bound(params.get("hi"), dim, np.inf)
        if np.any(lo > hi):
            raise ConfigurationError("box needs lo <= hi in every component")

        def value(u):
            return 0.0 if np.all((u >= lo) & (u <= hi)) else np.inf

        return ProxOracle(
            dim, prox=lambda v, t: prox_indicator(v, t, lo, hi), value=value, name=kind
        )
    if kind == "zero":
        quad = QuadraticDescription(np.zeros((dim, dim)), np.zeros(dim))
        return ProxOracle(
            dim,
            prox=lambda v, t: np.array(v, dtype=float),
            value=lambda u: 0.0,
            quadratic=quad,
            name="zero",
        )
    raise ConfigurationError(f"unknown prox kind {kind!r}")


def oracle_from_spec(spec, dim):
    """Build an oracle from a tagged JSON fragment such as ``{"kind": "l1", "weight": 0.5}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError(f"prox spec must be an object with a 'kind' field, got {spec!r}")
    params = {k: v for k, v in spec.items() if k != "kind"}
    return make_oracle(spec["kind"], dim, **params)


def _encode_bound(arr):
    return [UNBOUNDED if np.isinf(b) else float(b) for b in arr]


def spec_to_json(kind, **params):
    """Inverse of :func:`oracle_from_spec` for array-valued parameters."""
    out = {"kind": kind}
    for key, val in params.items():
        if key in ("lo", "hi"):
            out[key] = _encode_bound(np.atleast_1d(np.asarray(val, dtype=float)))
        elif isinstance(val, np.ndarray):
            out[key] = val.tolist()
        else:
            out[key] = val
    return out
