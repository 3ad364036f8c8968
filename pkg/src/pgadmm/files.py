"""JSON formats for problems, solver configurations and oracle solutions."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import ConfigurationError, LinearMap, Problem
from .prox import oracle_from_spec
from .solvers import SolverConfig

__all__ = [
    "problem_from_dict",
    "problem_to_dict",
    "load_problem",
    "load_json",
    "dump_json",
    "atomic_write",
    "config_from_dict",
    "config_to_dict",
]


def load_json(path):
    """Read a JSON file, turning syntax errors into a located ConfigurationError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(doc):
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def atomic_write(path, text):
    """Write ``text`` to a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _matrix(doc, key, shape):
    try:
        M = np.asarray(doc[key], dtype=float)
    except KeyError:
        raise ConfigurationError(f"field {key!r} is missing") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"field {key!r}: {exc}") from None
    if M.ndim == 1 and len(shape) == 2 and shape[0] == 1:
        M = M.reshape(1, -1)
    if M.shape != shape:
        raise ConfigurationError(f"field {key!r} has shape {M.shape}, expected {shape}")
    return M


def problem_from_dict(doc) -> Problem:
    """Build a :class:`Problem` from the problem-file document."""
    if not isinstance(doc, dict):
        raise ConfigurationError("problem document must be a JSON object")
    try:
        dims = doc["dims"]
        n, m, p = int(dims["x"]), int(dims["y"]), int(dims["z"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"field 'dims' must hold integer x, y, z ({exc})") from None
    A = _matrix(doc, "A", (m, n))
    B = _matrix(doc, "B", (p, n))
    c = _matrix(doc, "c", (n,))
    oracles = {}
    for key, dim in (("f", m), ("g", p)):
        if key not in doc:
            raise ConfigurationError(f"field {key!r} is missing")
        try:
            oracles[key] = oracle_from_spec(doc[key], dim)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"field {key!r}: {exc}") from None
    sigma_f = _matrix(doc, "sigma_f", (m, m)) if "sigma_f" in doc else None
    sigma_g = _matrix(doc, "sigma_g", (p, p)) if "sigma_g" in doc else None
    return Problem(
        oracles["f"], oracles["g"], LinearMap(A), LinearMap(B), c,
        sigma_f=sigma_f, sigma_g=sigma_g, name=doc.get("name", "problem"),
    )


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def problem_to_dict(problem: Problem) -> dict:
    for h in (problem.f, problem.g):
        if h.spec is None:
            raise ConfigurationError(f"{h.name} was not built from a prox spec and cannot be saved")
    doc = {
        "name": problem.name,
        "dims": problem.dims,
        "A": problem.A.dense().tolist(),
        "B": problem.B.dense().tolist(),
        "c": problem.c.tolist(),
        "f": _jsonable(problem.f.spec),
        "g": _jsonable(problem.g.spec),
    }
    if np.any(problem.sigma_f):
        doc["sigma_f"] = problem.sigma_f.tolist()
    if np.any(problem.sigma_g):
        doc["sigma_g"] = problem.sigma_g.tolist()
    return doc


def load_problem(path) -> Problem:
    doc = load_json(path)
    try:
        return problem_from_dict(doc)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def _weight_from_dict(spec, name):
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError(f"field {name!r} must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "zero":
        return None
    if kind == "scaled_identity":
        return float(spec["eps"])
    if kind == "linearized":
        return "linearized"
    if kind == "dense":
        return np.asarray(spec["M"], dtype=float)
    raise ConfigurationError(f"field {name!r}: unknown kind {kind!r}")


def _weight_to_dict(op):
    if op is None:
        return {"kind": "zero"}
    if isinstance(op, str):
        return {"kind": "linearized"}
    if np.isscalar(op):
        return {"kind": "scaled_identity", "eps": float(op)}
    return {"kind": "dense", "M": np.asarray(op).tolist()}


_CONFIG_KEYS = {
    "variant", "sigma", "rho", "tau", "tol", "max_iter", "y_mode", "z_mode",
    "S", "T", "seed", "order", "x0", "y0", "z0", "linearization_margin", "name",
}


def config_from_dict(d) -> SolverConfig:
    """Build a :class:`SolverConfig` from its JSON form.

    Unknown fields are rejected so that typos do not silently fall back to
    defaults.
    """
    if not isinstance(d, dict):
        raise ConfigurationError("solver config must be a JSON object")
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
    kw = {k: v for k, v in d.items() if k not in ("S", "T", "name")}
    kw["S"] = _weight_from_dict(d.get("S"), "S")
    kw["T"] = _weight_from_dict(d.get("T"), "T")
    for key in ("x0", "y0", "z0"):
        if key in kw and kw[key] is not None:
            kw[key] = np.asarray(kw[key], dtype=float)
    try:
        return SolverConfig(**kw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def config_to_dict(cfg: SolverConfig) -> dict:
    d = {
        "variant": cfg.variant,
        "sigma": cfg.sigma,
        "rho": cfg.rho,
        "tau": cfg.tau,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "y_mode": cfg.y_mode,
        "z_mode": cfg.z_mode,
        "order": cfg.order,
        "S": _weight_to_dict(cfg.S),
        "T": _weight_to_dict(cfg.T),
        "seed": cfg.seed,
    }
    return d
