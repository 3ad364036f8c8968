"""Independent reference computations shared by the test modules."""

import numpy as np

from pgadmm import make_oracle

GRID_STEP = 1e-5


def grid_prox_1d(h, v, t, half_width=6.0):
    """Minimize ``h(u) + (u - v)^2 / (2t)`` over a uniform grid around ``v``."""
    u = np.arange(v - half_width, v + half_width + GRID_STEP, GRID_STEP)
    obj = h(u) + (u - v) ** 2 / (2.0 * t)
    return float(u[np.argmin(obj)])


# elementwise function values for separable kinds
def separable_value(kind, **p):
    if kind == "l1":
        return lambda u: p.get("weight", 1.0) * np.abs(u)
    if kind == "squared_l2":
        return lambda u: 0.5 * p.get("weight", 1.0) * u * u
    if kind == "nonneg":
        return lambda u: np.where(u >= 0, 0.0, np.inf)
    if kind == "box":
        lo, hi = p["lo"], p["hi"]
        return lambda u: np.where((u >= lo) & (u <= hi), 0.0, np.inf)
    if kind == "zero":
        return lambda u: np.zeros_like(u)
    raise KeyError(kind)


def conjugate_prox(kind, v, **p):
    """``Prox_{h*}(v)`` at unit scale, written from the conjugate directly."""
    if kind == "l1":
        mu = p.get("weight", 1.0)
        return np.clip(v, -mu, mu)
    if kind == "squared_l2":
        mu = p.get("weight", 1.0)
        return v * mu / (1.0 + mu)
    if kind == "quadratic":
        Qinv = np.linalg.inv(p["Q"])
        return np.linalg.solve(Qinv + np.eye(len(v)), v + Qinv @ p["q"])
    if kind == "nonneg":
        return np.minimum(v, 0.0)
    if kind == "box":
        lo, hi = np.asarray(p["lo"], float), np.asarray(p["hi"], float)
        return np.where(v > hi, v - hi, np.where(v < lo, v - lo, 0.0))
    if kind == "zero":
        return np.zeros_like(v)
    raise KeyError(kind)


def prox_cases(dim=4, seed=0):
    """One ``(kind, params)`` pair per supported kind."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim))
    return [
        ("l1", {"weight": 0.7}),
        ("squared_l2", {"weight": 2.0}),
        ("quadratic", {"Q": G @ G.T + 0.5 * np.eye(dim), "q": rng.standard_normal(dim)}),
        ("nonneg", {}),
        ("box", {"lo": -np.linspace(0.5, 1.5, dim), "hi": np.linspace(0.2, 2.0, dim)}),
        ("zero", {}),
    ]


def firm_nonexpansive_slack(kind, params, n_pairs=1000, dim=4, seed=1, scale=3.0):
    """Smallest ``<P(u)-P(v), u-v> - ||P(u)-P(v)||^2`` over random pairs."""
    h = make_oracle(kind, dim, **params)
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(n_pairs):
        u, v = rng.standard_normal((2, dim)) * scale
        d = h(u) - h(v)
        worst = min(worst, float(d @ (u - v) - d @ d))
    return worst


def moreau_defect(kind, params, n=1000, dim=4, seed=2, scale=3.0):
    """Largest ``|Prox_h(v) + Prox_{h*}(v) - v|`` over random ``v``."""
    h = make_oracle(kind, dim, **params)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        v = rng.standard_normal(dim) * scale
        worst = max(worst, float(np.max(np.abs(h(v) + conjugate_prox(kind, v, **params) - v))))
    return worst
