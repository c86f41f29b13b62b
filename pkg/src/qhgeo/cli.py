"""Command line entry point ``qhgeo``.

Exit codes: 0 success, 1 a verdict failed, 2 bad input or configuration,
3 numerical or runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (ConfigError, InvalidDomainError, InvalidParameterError, PointOutsideDomainError,
                     PreconditionError, QhGeoError)
from .pipeline import COMMANDS, RunConfig, run, verdict_ok
from .report import dumps

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _point(text: str) -> list[float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return [x, y]


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value but got {text!r}")
    k, v = text.split("=", 1)
    try:
        val = json.loads(v)
    except json.JSONDecodeError:
        val = v
    return k, val


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="preset domain kind (disk, square, slit_disk, L_shape, comb, ...)")
    src.add_argument("--domain", help="domain JSON file")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="K=V",
                   help="preset parameter, repeatable")
    p.add_argument("--config", help="JSON config; command line flags override its values")
    p.add_argument("--resolution", type=float)
    p.add_argument("--pairs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--csv", help="write per-pair records here")
    p.add_argument("--svg", help="write an SVG drawing here")
    p.add_argument("--override-tags", dest="override_tags", action="store_true", default=None,
                   help="run the verifications even when domain tags rule them out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhgeo", description="Quasihyperbolic geometry of planar domains")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name in ("distance", "geodesic"):
            p.add_argument("points", nargs=2, type=_point, metavar="X,Y")
        if name == "bound":
            for k in ("a", "c", "M", "a1", "a3"):
                p.add_argument(f"--{k}", type=float)
        _common(p)
    r = sub.add_parser("run", help="execute a config file as is")
    r.add_argument("config_file")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--cache-dir", dest="cache_dir")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "run":
        cfg = RunConfig.load(args.config_file)
        for k in ("seed", "out", "cache_dir"):
            if getattr(args, k) is not None:
                setattr(cfg, k, getattr(args, k))
        cfg.check()
        return cfg
    data = {}
    if args.config:
        data = RunConfig.load(args.config).to_dict()
    data["command"] = args.command
    for k in ("preset", "domain", "resolution", "pairs", "seed", "epsilon", "threads",
              "cache_dir", "out", "csv", "svg", "override_tags"):
        v = getattr(args, k, None)
        if v is not None:
            data[k] = v
    if args.preset is not None and not args.config:
        data.setdefault("params", {})
    if args.param:
        data["params"] = {**data.get("params", {}), **dict(args.param)}
    if args.domain is not None:
        data["preset"] = None
    if args.preset is not None:
        data["domain"] = None
    if getattr(args, "points", None) is not None:
        data["points"] = args.points
    if args.command == "bound":
        given = {k: getattr(args, k) for k in ("a", "c", "M", "a1", "a3") if getattr(args, k) is not None}
        data["bound"] = {**data.get("bound", {}), **given}
    if isinstance(data.get("resolution"), float) and data["resolution"].is_integer():
        data["resolution"] = int(data["resolution"])
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = config_from_args(args)
        report = run(cfg)
    except (ConfigError, InvalidParameterError, InvalidDomainError, PointOutsideDomainError,
            PreconditionError) as exc:
        print(f"qhgeo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QhGeoError as exc:
        print(f"qhgeo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not cfg.out:
        sys.stdout.write(dumps(report))
    return EXIT_OK if verdict_ok(report) else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
