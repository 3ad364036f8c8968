"""Seeded instance generators.

Each generator returns a problem-file document (plain JSON types), so the
same seed always produces byte-identical files. Use
:func:`pgadmm.files.problem_from_dict` to turn one into a :class:`Problem`.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigurationError

__all__ = ["scalar_toy", "lasso", "sep_qp", "basis_pursuit", "generate", "FAMILIES", "MAX_TOTAL_DIM"]

MAX_TOTAL_DIM = 500


def _doc(name, A, B, c, f, g, **extra):
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    doc = {
        "name": name,
        "dims": {"x": int(A.shape[1]), "y": int(A.shape[0]), "z": int(B.shape[0])},
        "A": A.tolist(),
        "B": B.tolist(),
        "c": np.asarray(c, dtype=float).tolist(),
        "f": f,
        "g": g,
    }
    doc.update(extra)
    total = sum(doc["dims"].values())
    if total > MAX_TOTAL_DIM:
        raise ConfigurationError(f"instance has {total} variables, above the desk-scale cap {MAX_TOTAL_DIM}")
    return doc


def scalar_toy():
    """``min y^2/2 + z^2/2  s.t.  y + z = 2``; the KKT point is ``(1, 1, 1)``."""
    return _doc(
        "scalar_toy", [[1.0]], [[1.0]], [2.0],
        {"kind": "squared_l2", "weight": 1.0},
        {"kind": "squared_l2", "weight": 1.0},
        sigma_f=[[1.0]], sigma_g=[[1.0]],
    )


def _spd(rng, n, cond):
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.logspace(0.0, np.log10(cond), n)
    return (U * eig) @ U.T


def lasso(n=8, seed=0, mu=None, rows=None, mu_ratio=0.2):
    """``min ||D y - b||^2 / 2 + mu ||z||_1  s.t.  y - z = 0``.

    Encoded with ``A = I``, ``B = -I``, ``c = 0``. ``D`` has ``rows >= n``
    Gaussian rows (default ``2n``), so it has full column rank and the
    solution is unique. Unless given, ``mu`` is ``mu_ratio * ||D'b||_inf``.
    """
    rows = 2 * n if rows is None else rows
    if rows < n:
        raise ConfigurationError("lasso needs rows >= n for a unique solution")
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((rows, n)) / np.sqrt(rows)
    b = rng.standard_normal(rows)
    if mu is None:
        mu = mu_ratio * float(np.max(np.abs(D.T @ b)))
    Q = D.T @ D
    f = {"kind": "quadratic", "Q": Q.tolist(), "q": (-D.T @ b).tolist(), "const": 0.5 * float(b @ b)}
    g = {"kind": "l1", "weight": float(mu)}
    return _doc(
        f"lasso_n{n}_seed{seed}", np.eye(n), -np.eye(n), np.zeros(n), f, g,
        sigma_f=Q.tolist(), meta={"D": D.tolist(), "b": b.tolist(), "seed": seed},
    )


def sep_qp(dims=(4, 3, 3), seed=0, conditioning=10.0):
    """Separable strongly convex QP with dims ``(x, y, z)``.

    Requires ``y + z >= x`` so that the coupling ``(y, z) -> A* y + B* z``
    is onto X, which together with ``Q_f, Q_g > 0`` makes the KKT system
    nonsingular.
    """
    n, m, p = (int(d) for d in dims)
    if m + p < n:
        raise ConfigurationError("sep_qp needs dim y + dim z >= dim x")
    rng = np.random.default_rng(seed)
    Qf, Qg = _spd(rng, m, conditioning), _spd(rng, p, conditioning)
    A = rng.standard_normal((m, n)) / np.sqrt(n)
    B = rng.standard_normal((p, n)) / np.sqrt(n)
    c = rng.standard_normal(n)
    f = {"kind": "quadratic", "Q": Qf.tolist(), "q": rng.standard_normal(m).tolist()}
    g = {"kind": "quadratic", "Q": Qg.tolist(), "q": rng.standard_normal(p).tolist()}
    return _doc(f"sep_qp_{n}x{m}x{p}_seed{seed}", A, B, c, f, g, sigma_f=Qf.tolist(), sigma_g=Qg.tolist())


def basis_pursuit(dims=(6, 12), seed=0, delta=1e-2, sparsity=None):
    """``min ||y||_1  s.t.  ||M y - d||_inf <= delta`` with ``M`` of shape ``(r, N)``.

    Encoded as ``f = ||.||_1`` on Y = R^N, ``g`` the indicator of
    ``[-delta, delta]^r`` on Z = R^r, ``A* = M``, ``B* = -I`` and
    ``c = M y0 - z0`` for a sparse ``y0`` and an interior ``z0``, so a
    Slater point exists by construction. ``delta -> 0`` recovers exact
    basis pursuit.
    """
    r, N = (int(d) for d in dims)
    if delta <= 0:
        raise ConfigurationError("basis_pursuit needs delta > 0 for a Slater point")
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((r, N)) / np.sqrt(r)
    k = max(1, r // 3) if sparsity is None else int(sparsity)
    y0 = np.zeros(N)
    y0[rng.choice(N, size=k, replace=False)] = rng.standard_normal(k)
    z0 = rng.uniform(-0.5 * delta, 0.5 * delta, size=r)
    c = M @ y0 - z0
    f = {"kind": "l1", "weight": 1.0}
    g = {"kind": "box", "lo": [-float(delta)] * r, "hi": [float(delta)] * r}
    return _doc(
        f"basis_pursuit_{r}x{N}_seed{seed}", M.T, -np.eye(r), c, f, g,
        meta={"y0": y0.tolist(), "z0": z0.tolist(), "seed": seed},
    )


FAMILIES = {"lasso": lasso, "sep_qp": sep_qp, "basis_pursuit": basis_pursuit, "scalar_toy": scalar_toy}


def generate(family, dims=None, seed=0, **params):
    """Dispatch on ``family``; ``dims`` is an int (lasso) or a tuple."""
    if family not in FAMILIES:
        raise ConfigurationError(f"unsupported family {family!r}; expected one of {sorted(FAMILIES)}")
    try:
        if family == "scalar_toy":
            return scalar_toy(**params)
        if family == "lasso":
            n = dims if np.isscalar(dims) or dims is None else dims[0]
            return lasso(8 if n is None else int(n), seed, **params)
        if dims is None:
            return FAMILIES[family](seed=seed, **params)
        return FAMILIES[family](tuple(np.atleast_1d(dims)), seed, **params)
    except TypeError as exc:
        raise ConfigurationError(f"{family}: {exc}") from None
