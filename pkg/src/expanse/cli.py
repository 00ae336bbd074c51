"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error,
3 invalid input data (metric axioms violated, map leaves the space).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from . import dial_rotation as dial
from . import gallery
from . import sparse_builder as sb
from .expansion_analysis import classify, range_density
from .metric_core import (
    DEFAULT_TOL,
    FiniteMetricSpace,
    MapError,
    MetricStructureError,
    SelfMap,
    validate_metric,
)
from .suites import SUITES
from .theorem_harness import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    enumerate_expansive_maps,
    recurrence_search,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tolerance: float | None = None
    budget: int = DEFAULT_BUDGET
    format: str = "json"
    workers: int = 1

    def __post_init__(self):
        if self.tolerance is not None and self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


class UsageError(Exception):
    pass


def _emit(report: dict, cfg: RunConfig, rows: list[list] | None = None,
          header: list[str] | None = None, out=None) -> None:
    out = out or sys.stdout
    if cfg.format == "json":
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows is None:
            header, rows = ["key", "value"], [[k, json.dumps(v, sort_keys=True)]
                                              for k, v in sorted(report.items())]
        if header:
            w.writerow(header)
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        for key, value in report.items():
            if key in ("artifact", "version", "config"):
                continue
            if isinstance(value, list) and value and isinstance(value[0], dict) and "passed" in value[0]:
                for item in value:
                    out.write(f"{'PASS' if item['passed'] else 'FAIL'}  {item['name']}\n")
            else:
                out.write(f"{key}: {json.dumps(value, sort_keys=True)}\n")


def _envelope(cfg: RunConfig, command: str, body: dict) -> dict:
    return {"artifact": "expanse", "version": __version__, "command": command,
            "config": asdict(cfg), **body}


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_space(path: str) -> FiniteMetricSpace:
    try:
        return FiniteMetricSpace.from_json(_read(path))
    except (json.JSONDecodeError, MetricStructureError, ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load_map(path: str, size: int) -> SelfMap:
    try:
        return SelfMap.from_json(_read(path), size)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _invalid(space: FiniteMetricSpace, cfg: RunConfig):
    rep = validate_metric(space, cfg.tolerance)
    return None if rep.ok else rep


# commands

def cmd_validate(args, cfg):
    space = _load_space(args.space)
    rep = validate_metric(space, cfg.tolerance)
    _emit(_envelope(cfg, "validate", rep.to_json_obj()), cfg)
    return EXIT_OK if rep.ok else EXIT_DATA


def cmd_classify(args, cfg):
    space = _load_space(args.space)
    bad = _invalid(space, cfg)
    if bad:
        _emit(_envelope(cfg, "classify", bad.to_json_obj()), cfg)
        return EXIT_DATA
    m = _load_map(args.map, space.n)
    cls = classify(space, m, cfg.tolerance)
    _emit(_envelope(cfg, "classify", cls.to_json_obj()), cfg)
    return EXIT_OK


def cmd_enumerate(args, cfg):
    space = _load_space(args.space)
    bad = _invalid(space, cfg)
    if bad:
        _emit(_envelope(cfg, "enumerate", bad.to_json_obj()), cfg)
        return EXIT_DATA
    try:
        maps = enumerate_expansive_maps(space, cfg.budget, cfg.tolerance, cfg.workers)
    except BudgetExceeded as exc:
        _emit(_envelope(cfg, "enumerate", {"error": str(exc), "required_budget": exc.required}),
              cfg)
        return EXIT_USAGE
    body = {"n": space.n, "expansive": [t.to_json_obj() for t in maps]}
    rows = [[" ".join(map(str, t.map.table)), t.cls.tag.value] for t in maps]
    _emit(_envelope(cfg, "enumerate", body), cfg, rows, ["image", "class"])
    return EXIT_OK


def cmd_recurrence(args, cfg):
    if args.dial:
        res = recurrence_search(dial.chord, dial.rotate, dial.dial_point(args.x),
                                args.epsilon, args.max_iter)
    else:
        if not (args.space and args.map):
            raise UsageError("recurrence needs SPACE and MAP files, or --dial")
        space = _load_space(args.space)
        bad = _invalid(space, cfg)
        if bad:
            _emit(_envelope(cfg, "recurrence", bad.to_json_obj()), cfg)
            return EXIT_DATA
        m = _load_map(args.map, space.n)
        if not 0 <= args.x < space.n:
            raise UsageError(f"start point {args.x} outside the space")
        res = recurrence_search(space, m, args.x, args.epsilon, args.max_iter)
    _emit(_envelope(cfg, "recurrence", res.to_json_obj()), cfg)
    return EXIT_OK if res.found else EXIT_CHECK


def cmd_dial(args, cfg):
    if args.dial_cmd == "approach":
        seq = dial.approach_sequence(args.target, args.count, args.radius)
        _emit(_envelope(cfg, "dial approach", seq.to_json_obj()), cfg,
              [list(r) for r in dial.approach_rows(seq)], ["n", "cos_n", "sin_n", "error"])
        return EXIT_CHECK if seq.truncated else EXIT_OK
    if args.dial_cmd == "density":
        space = dial.dial_space(args.points)
        rep = range_density(space, dial.rotation_map(), args.epsilon,
                            domain=range(args.points - 1))
        gaps = space.as_array()[:, 1:].min(axis=1)
        rows = [[n, dial.dial_point(n).x, dial.dial_point(n).y, float(gaps[n])]
                for n in range(args.points)]
        _emit(_envelope(cfg, "dial density", {"points": args.points, "epsilon": args.epsilon,
                                              **rep.to_json_obj()}),
              cfg, rows, ["n", "cos_n", "sin_n", "error"])
        return EXIT_OK if rep.dense else EXIT_CHECK
    rep = dial.find_limit_point(args.epsilon, args.points)
    rows = [[n, dial.dial_point(n).x, dial.dial_point(n).y,
             2 * abs(math.sin((dial.angle(n) - rep.theta) / 2))] for n in rep.witnesses]
    _emit(_envelope(cfg, "dial limit-point", {"epsilon": args.epsilon, "points": args.points,
                                              **rep.to_json_obj()}),
          cfg, rows, ["n", "cos_n", "sin_n", "error"])
    return EXIT_OK if rep.found else EXIT_CHECK


def cmd_sparse(args, cfg):
    if args.oracle not in sb.ORACLES:
        raise UsageError(f"unknown oracle {args.oracle!r}; choose from {sorted(sb.ORACLES)}")
    oracle = sb.ORACLES[args.oracle]()
    s = sb.greedy_sparse(oracle, args.count, args.scan_budget, args.multiplier,
                         cfg.tolerance if cfg.tolerance is not None else DEFAULT_TOL)
    body = {"oracle": oracle.name, "set": s.to_json_obj(), "certificate": None}
    code = EXIT_CHECK
    if s.complete and len(s) >= 3:
        try:
            body["certificate"] = sb.certify_anticontraction(s).to_json_obj()
            code = EXIT_OK
        except sb.CertificateError as exc:
            body["error"] = str(exc)
    elif s.complete:
        code = EXIT_OK
    _emit(_envelope(cfg, "sparse", body), cfg)
    return code


def cmd_gallery(args, cfg):
    if args.gallery_cmd == "list":
        entries = [{"name": k, "description": v[0]} for k, v in gallery.GALLERY.items()]
        _emit(_envelope(cfg, "gallery list", {"entries": entries}), cfg,
              [[e["name"], e["description"]] for e in entries], ["name", "description"])
        return EXIT_OK
    if args.name not in gallery.GALLERY:
        raise UsageError(f"unknown gallery entry {args.name!r}")
    params = {k: v for k, v in (("max_n", args.max_n), ("k", args.k), ("max_x", args.max_x),
                                ("samples", args.samples)) if v is not None}
    if cfg.tolerance is not None:
        params["tol"] = cfg.tolerance
    res = gallery.run_entry(args.name, **params)
    _emit(_envelope(cfg, "gallery run", res), cfg)
    return EXIT_OK if res["passed"] else EXIT_CHECK


def cmd_verify(args, cfg):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    params = {"seed": cfg.seed, "budget": cfg.budget, "tol": cfg.tolerance,
              "workers": cfg.workers}
    for key in ("max_size", "random_instances", "n", "epsilon", "points", "scan_budget"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    checks = SUITES[args.suite](**params)
    passed = all(c.passed for c in checks)
    body = {"suite": args.suite, "parameters": {k: v for k, v in sorted(params.items())},
            "checks": [c.to_json_obj() for c in checks], "passed": passed}
    _emit(_envelope(cfg, "verify", body), cfg,
          [[c.name, "pass" if c.passed else "fail"] for c in checks], ["check", "result"])
    return EXIT_OK if passed else EXIT_CHECK


# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=s, help="64-bit seed for random generation")
    p.add_argument("--tol", type=float, default=s, help="relative tolerance (default 1e-9, "
                                                        "0 for exact-mode spaces)")
    p.add_argument("--budget", type=int, default=s, help="max self-maps for a full scan")
    p.add_argument("--format", choices=("json", "csv", "text"), default=s)
    p.add_argument("--workers", type=int, default=s)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="expanse", parents=[common],
                                     description="Expansive self-maps of metric spaces.")
    parser.add_argument("--version", action="version", version=f"expanse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the metric axioms")
    p.add_argument("space")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", parents=[common], help="classify a self-map")
    p.add_argument("space")
    p.add_argument("map")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("enumerate", parents=[common], help="list every expansive self-map")
    p.add_argument("space")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("recurrence", parents=[common], help="first near-return of an orbit")
    p.add_argument("space", nargs="?")
    p.add_argument("map", nargs="?")
    p.add_argument("--dial", action="store_true", help="use the dial rotation")
    p.add_argument("--x", type=int, default=0, help="start point index")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--max-iter", type=int, default=1000)
    p.set_defaults(func=cmd_recurrence)

    p = sub.add_parser("dial", parents=[common], help="dial set computations")
    dsub = p.add_subparsers(dest="dial_cmd", required=True)
    q = dsub.add_parser("approach", parents=[common])
    q.add_argument("--target", type=int, default=0)
    q.add_argument("--count", type=int, default=3)
    q.add_argument("--radius", type=float, default=0.1)
    q = dsub.add_parser("density", parents=[common])
    q.add_argument("--epsilon", type=float, default=0.05)
    q.add_argument("--points", type=int, default=1000)
    q = dsub.add_parser("limit-point", parents=[common])
    q.add_argument("--epsilon", type=float, default=0.05)
    q.add_argument("--points", type=int, default=1000)
    p.set_defaults(func=cmd_dial)

    p = sub.add_parser("sparse", parents=[common], help="greedy sparse set from an oracle")
    p.add_argument("--oracle", default="integers", help=f"one of {', '.join(sb.ORACLES)}")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--scan-budget", type=int, default=100_000)
    p.add_argument("--multiplier", type=int, default=2)
    p.set_defaults(func=cmd_sparse)

    p = sub.add_parser("gallery", parents=[common], help="closed-form example maps")
    gsub = p.add_subparsers(dest="gallery_cmd", required=True)
    gsub.add_parser("list", parents=[common])
    q = gsub.add_parser("run", parents=[common])
    q.add_argument("name")
    q.add_argument("--max-n", type=int)
    q.add_argument("--k", type=int)
    q.add_argument("--max-x", type=float)
    q.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", help=f"one of {', '.join(SUITES)}")
    p.add_argument("--max-size", type=int)
    p.add_argument("--random-instances", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--scan-budget", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(getattr(args, "seed", 0), getattr(args, "tol", None),
                        getattr(args, "budget", DEFAULT_BUDGET),
                        getattr(args, "format", "json"), getattr(args, "workers", 1))
    except ValueError as exc:
        print(f"expanse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"expanse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MapError as exc:
        print(f"expanse: invalid map: {exc}", file=sys.stderr)
        return EXIT_DATA


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
