"""Experiment runner.

    pgadmm run --spec experiment.json --out results/
    pgadmm check --spec experiment.json [--inject-fault x_update|relaxation]
    pgadmm generate --family lasso --dims 8 --seed 7 --out lasso.json

Log verbosity is read from ``PGADMM_LOG`` (``DEBUG``, ``INFO``, ...).
Exit codes: 0 success, 1 check violations or failed runs, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import ConfigurationError, NumericalError, UnsupportedOperationError
from .diagnostics import check_trace, rate_report, trace_diagnostics
from .files import (
    atomic_write, config_from_dict, config_to_dict, dump_json, load_json, load_problem,
    problem_from_dict,
)
from .generators import generate
from .oracle import solve_oracle
from .solvers import FAULTS, solve

log = logging.getLogger("pgadmm")

CSV_COLUMNS = ["k", "primal_res", "kkt_res", "upsilon", "lyapunov", "descent_gap", "dist_xi_sq", "ratio"]
PLOT_COLUMNS = ["kkt_res", "primal_res", "dist_xi_sq", "ratio", "lyapunov"]


@dataclass
class ExperimentSpec:
    problem: object
    configs: list
    diagnostics: dict = field(default_factory=lambda: {"lyapunov": True, "rate": True, "identities": True})
    output: str = None
    calmness_modulus: float = None
    tail_window: int = None
    threshold_eps: float = 1e-2
    base_dir: Path = Path(".")

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        doc = load_json(path)
        return cls.from_dict(doc, base_dir=path.parent)

    @classmethod
    def from_dict(cls, doc, base_dir=Path(".")):
        if not isinstance(doc, dict):
            raise ConfigurationError("experiment spec must be a JSON object")
        if "problem" not in doc:
            raise ConfigurationError("experiment spec: field 'problem' is missing")
        configs = doc.get("configs")
        if not configs:
            raise ConfigurationError("experiment spec: field 'configs' must list at least one solver config")
        src = doc["problem"]
        if isinstance(src, dict) and "family" in src and "seed" not in src and src["family"] != "scalar_toy":
            raise ConfigurationError("experiment spec: generated problems need an explicit 'seed'")
        parsed = []
        for i, c in enumerate(configs):
            try:
                parsed.append((c.get("name") or f"{i:02d}_{c.get('variant', 'pgadmm')}", config_from_dict(c)))
            except ConfigurationError as exc:
                raise ConfigurationError(f"experiment spec: configs[{i}]: {exc}") from None
        diag = {"lyapunov": True, "rate": True, "identities": True}
        diag.update(doc.get("diagnostics", {}))
        return cls(
            problem=src,
            configs=parsed,
            diagnostics=diag,
            output=doc.get("output"),
            calmness_modulus=doc.get("calmness_modulus"),
            tail_window=doc.get("tail_window"),
            threshold_eps=doc.get("threshold_eps", 1e-2),
            base_dir=Path(base_dir),
        )

    def load_problem(self):
        src = self.problem
        if isinstance(src, str):
            p = Path(src)
            return load_problem(p if p.is_absolute() else self.base_dir / p)
        if isinstance(src, dict) and "family" in src:
            params = {k: v for k, v in src.items() if k not in ("family", "dims", "seed", "params")}
            params.update(src.get("params", {}))
            doc = generate(src["family"], src.get("dims"), src.get("seed", 0), **params)
            return problem_from_dict(doc)
        if isinstance(src, dict):
            return problem_from_dict(src)
        raise ConfigurationError("experiment spec: 'problem' must be a path, a generator spec or an inline problem")


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def _csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, float("nan"))) for c in columns])
    return buf.getvalue()


def _rows(problem, cfg, report, oracle, diagnostics):
    if cfg.variant == "pgadmm" and (diagnostics.get("lyapunov") or diagnostics.get("identities")):
        return trace_diagnostics(problem, cfg, report.trace, oracle if diagnostics.get("lyapunov") else None)
    return report.log


def run_experiment(spec: ExperimentSpec, out_dir, fault=None):
    """Run every config; write per-config artifacts and a comparison table."""
    out_dir = Path(out_dir)
    problem = spec.load_problem()
    oracle = solve_oracle(problem)
    if oracle is None:
        log.warning("no oracle applies to %s; oracle-based diagnostics skipped", problem.name)
    table = []
    for name, cfg in spec.configs:
        report = solve(problem, cfg, fault=fault)
        rows = _rows(problem, cfg, report, oracle, spec.diagnostics)
        sub = out_dir / name
        atomic_write(sub / "trace.csv", _csv(rows, CSV_COLUMNS))
        for col in PLOT_COLUMNS:
            pts = [r for r in rows if col in r and not math.isnan(r[col])]
            if pts:
                atomic_write(sub / f"{col}.dat", "".join(f"{r['k']} {_fmt(r[col])}\n" for r in pts))
        summary = {
            "name": name,
            "config": config_to_dict(cfg),
            "problem": problem.name,
            "status": report.status,
            "iterations": report.iterations,
            "final_kkt_res": report.final_kkt,
            "wall_time": report.wall_time,
            "y": report.state.y.tolist(),
            "z": None if report.state.z is None else report.state.z.tolist(),
            "x": report.state.x.tolist(),
        }
        if oracle is not None:
            summary["oracle_error"] = max(
                float(abs(report.state.y - oracle.y).max()),
                float(abs(report.state.z - oracle.z).max()) if report.state.z is not None else float("nan"),
                float(abs(report.state.x - oracle.x).max()),
            )
        atomic_write(sub / "summary.json", dump_json(summary))
        entry = {k: summary[k] for k in ("name", "status", "iterations", "final_kkt_res")}
        entry["variant"] = cfg.variant
        if spec.diagnostics.get("rate") and cfg.variant == "pgadmm":
            if oracle is None:
                log.warning("%s: rate diagnostics requested but no oracle applies; skipped", name)
            else:
                try:
                    rr = rate_report(problem, cfg, report.trace, oracle, lam=spec.calmness_modulus,
                                     tail_window=spec.tail_window, eps=spec.threshold_eps)
                except ConfigurationError as exc:
                    log.warning("%s: rate report skipped: %s", name, exc)
                else:
                    atomic_write(sub / "rate.json", dump_json(rr.to_json()))
                    entry["zeta_hat"] = rr.zeta_hat
                    entry["certified"] = rr.certified
        table.append(entry)
    cols = ["name", "variant", "status", "iterations", "final_kkt_res", "zeta_hat", "certified"]
    atomic_write(out_dir / "comparison.csv", _csv(table, cols))
    return table


def check_experiment(spec: ExperimentSpec, fault=None):
    """Run the pgadmm configs and return ``{config name: [Violation, ...]}``."""
    problem = spec.load_problem()
    oracle = solve_oracle(problem) if spec.diagnostics.get("lyapunov", True) else None
    found = {}
    for name, cfg in spec.configs:
        if cfg.variant != "pgadmm":
            log.info("%s: checkers apply to pgadmm only; skipped", name)
            continue
        report = solve(problem, cfg, fault=fault)
        found[name] = check_trace(problem, cfg, report.trace, oracle)
    return found


def _parse_params(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigurationError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = float(v) if any(ch in v for ch in ".eE") else int(v)
        except ValueError:
            out[k] = v
    return out


def _parser():
    p = argparse.ArgumentParser(prog="pgadmm", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run every solver config of an experiment")
    r.add_argument("--spec", required=True)
    r.add_argument("--out", default=None)
    c = sub.add_parser("check", help="run the identity and inequality checkers")
    c.add_argument("--spec", required=True)
    c.add_argument("--inject-fault", choices=FAULTS, default=None)
    g = sub.add_parser("generate", help="write a seeded problem file")
    g.add_argument("--family", required=True)
    g.add_argument("--dims", default=None, help="comma-separated, e.g. 8 or 10,8,6")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--param", action="append", help="extra generator parameter key=value")
    g.add_argument("--out", required=True)
    return p


def _configure_logging():
    name = os.environ.get("PGADMM_LOG", "WARNING").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        print(f"warning: PGADMM_LOG={name!r} is not a log level; using WARNING", file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("pgadmm").setLevel(level)


def main(argv=None):
    _configure_logging()
    args = _parser().parse_args(argv)
    try:
        if args.command == "generate":
            dims = None if args.dims is None else tuple(int(d) for d in args.dims.split(","))
            if dims is not None and len(dims) == 1:
                dims = dims[0]
            doc = generate(args.family, dims, args.seed, **_parse_params(args.param))
            atomic_write(args.out, dump_json(doc))
            return 0
        spec = ExperimentSpec.from_file(args.spec)
        if args.command == "run":
            out = args.out or spec.output
            if out is None:
                raise ConfigurationError("no output directory: pass --out or set 'output' in the experiment file")
            table = run_experiment(spec, out)
            for e in table:
                print(" ".join(f"{k}={_fmt(v)}" for k, v in e.items()))
            return 0 if all(e["status"] != "numerical_failure" for e in table) else 1
        found = check_experiment(spec, fault=args.inject_fault)
        total = 0
        for name, viol in found.items():
            print(f"{name}: {len(viol)} violation(s)")
            for v in viol:
                print(f"  {v}")
            total += len(viol)
        return 1 if total else 0
    except (ConfigurationError, UnsupportedOperationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
