"""Command-line front end.

Subcommands::

    points    write a point set and print its projection profile per axis
    approx    fit every marginal of a distribution on one point set
    converge  run a convergence study over a schedule of point sets
    compare   grid with point-wise means against a Korobov lattice

Settings may come from a JSON config file (``--config``) whose keys are
the long flag names with underscores; flags given on the command line win.

Exit codes: 0 success, 2 configuration error, 3 numerical or domain
error, 4 trend failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import __version__
from .analysis import DEFAULT_GRID_SIZE, build_points, compare_grid_vs_lattice, convergence_study
from .distributions import joint_density, load_distribution, true_marginal
from .errors import AlgorithmChoiceError, ArgumentError, CapacityError, EmptyPartitionError, EvaluationError
from .evaluation import evaluate, project
from .marginal import NodeRule, PartitionFit, approximate, write_poly_csv, write_poly_json
from .pointset import korobov_search, write_points_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_TREND = 4

DEFAULTS = {
    "dims": None,
    "dist": None,
    "algorithm": "auto",
    "partitions": None,
    "seed": 0,
    "seeds": 1,
    "eval_grid": DEFAULT_GRID_SIZE,
    "out": "out",
    "strict": False,
    "threads": 1,
    "fit": PartitionFit.PROJECTIONS.value,
    "node_rule": NodeRule.LEFT.value,
    "alpha": None,
    "auto_alpha": False,
    "z": None,
    "grid": None,
    "korobov": None,
    "maximal": None,
    "random": None,
    "schedule": None,
}


def _count(text: str) -> int:
    """Parse ``32``, ``N=32`` or ``2^16``."""
    t = str(text).strip()
    t = re.sub(r"^[A-Za-z]+=", "", t)
    m = re.fullmatch(r"(\d+)\^(\d+)", t)
    try:
        value = int(m.group(1)) ** int(m.group(2)) if m else int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_common(p: argparse.ArgumentParser, multi: bool = False) -> None:
    nargs = "+" if multi else None
    p.add_argument("--config", help="JSON file with settings; flags override it")
    p.add_argument("--grid", type=_count, nargs=nargs, default=None, metavar="n", help="grid with n nodes per axis")
    p.add_argument("--korobov", type=_count, nargs=nargs, default=None, metavar="N", help="Korobov lattice with N points")
    p.add_argument("--alpha", type=int, default=None, help="Korobov generator")
    p.add_argument("--auto-alpha", action="store_true", default=None, help="search the Korobov generator")
    p.add_argument("--maximal", type=_count, nargs=2, default=None, metavar=("l", "r"),
                   help="maximal-rank lattice with l*r nodes per axis")
    p.add_argument("--z", type=int, nargs="+", default=None, help="generating vector for --maximal")
    p.add_argument("--random", type=_count, nargs=nargs, default=None, metavar="N", help="N pseudo-random points")
    p.add_argument("--dims", type=_count, default=None, metavar="s")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, metavar="dir")
    p.add_argument("--threads", type=_count, default=None, metavar="t", help="worker threads; results do not depend on it")


def _add_fit(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", default=None, help="distribution JSON file or preset:name")
    p.add_argument("--algorithm", choices=["auto", "I", "II"], default=None)
    p.add_argument("--partitions", type=_count, default=None, metavar="n")
    p.add_argument("--fit", choices=[f.value for f in PartitionFit], default=None,
                   help="Algorithm II target: raw projections or bin means")
    p.add_argument("--node-rule", choices=[r.value for r in NodeRule], default=None,
                   help="node placement for --fit bin_means")
    p.add_argument("--eval-grid", type=_count, default=None, metavar="g")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmcmarginal", description="Marginal shapes from grid, lattice and random point sets.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("points", help="write a point set and its projection profile")
    _add_common(p)

    p = sub.add_parser("approx", help="fit every marginal on one point set")
    _add_common(p)
    _add_fit(p)

    p = sub.add_parser("converge", help="convergence study over a schedule")
    _add_common(p, multi=True)
    _add_fit(p)
    p.add_argument("--seeds", type=_count, default=None, metavar="k", help="random sets: seeds seed..seed+k-1")
    p.add_argument("--strict", action="store_true", default=None, help="exit 4 unless errors decrease")

    p = sub.add_parser("compare", help="grid against Korobov lattice")
    _add_common(p)
    _add_fit(p)
    p.add_argument("--strict", action="store_true", default=None, help="exit 4 unless the lattice wins on every axis")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and the command line, in that order."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ArgumentError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ArgumentError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ArgumentError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key != "config":
            cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _kinds(cfg) -> list[str]:
    return [k for k in ("grid", "korobov", "maximal", "random") if cfg.get(k) is not None]


def _descriptor(cfg, kind, value) -> dict:
    if kind == "grid":
        return {"kind": "grid", "n": int(value)}
    if kind == "korobov":
        alpha = None if cfg.get("auto_alpha") else cfg.get("alpha")
        return {"kind": "korobov", "N": int(value), "alpha": alpha}
    if kind == "maximal":
        l, r = value
        return {"kind": "maximal", "l": int(l), "r": int(r), "z": cfg.get("z")}
    return {"kind": "random", "N": int(value), "seed": int(cfg["seed"])}


def single_descriptor(cfg) -> dict:
    kinds = _kinds(cfg)
    if len(kinds) != 1:
        raise ArgumentError("give exactly one of --grid, --korobov, --maximal, --random")
    kind = kinds[0]
    value = cfg[kind]
    if kind != "maximal" and isinstance(value, list):
        if len(value) != 1:
            raise ArgumentError(f"--{kind} takes one value here")
        value = value[0]
    return _descriptor(cfg, kind, value)


def _dims(cfg) -> int:
    if not cfg.get("dims"):
        raise ArgumentError("--dims is required")
    return int(cfg["dims"])


def _distribution(cfg):
    if not cfg.get("dist"):
        raise ArgumentError("--dist is required")
    try:
        return load_distribution(cfg["dist"])
    except (OSError, json.JSONDecodeError) as exc:
        raise ArgumentError(f"cannot read distribution {cfg['dist']}: {exc}") from None


def _resolve_alpha(desc, s):
    if desc["kind"] == "korobov" and desc.get("alpha") is None:
        desc = {**desc, "alpha": korobov_search(desc["N"], s)}
    return desc


def _outdir(cfg) -> str:
    out = str(cfg["out"])
    os.makedirs(out, exist_ok=True)
    return out


def _profile_line(prof) -> str:
    if prof.m is not None:
        m = str(prof.m)
    else:
        m = f"{int(prof.multiplicities.min())}..{int(prof.multiplicities.max())}"
    return f"axis {prof.axis}: n={prof.n} m={m} fully_projection_regular={prof.fully_projection_regular}"


def cmd_points(cfg) -> int:
    s = _dims(cfg)
    desc = _resolve_alpha(single_descriptor(cfg), s)
    ps = build_points(desc, s)
    out = _outdir(cfg)
    path = os.path.join(out, "points.csv")
    write_points_csv(ps, path)
    print(ps.describe())
    from .pointset import projection_profile

    for j in range(s):
        print(_profile_line(projection_profile(ps, j)))
    print(f"wrote {path}")
    return EXIT_OK


def _fit_options(cfg):
    try:
        return dict(fit=PartitionFit(cfg["fit"]), node_rule=NodeRule(cfg["node_rule"]))
    except ValueError as exc:
        raise ArgumentError(str(exc)) from None


def cmd_approx(cfg) -> int:
    dist = _distribution(cfg)
    s = dist.s if not cfg.get("dims") else _dims(cfg)
    if s != dist.s:
        raise ArgumentError(f"--dims {s} does not match the {dist.s}-dimensional distribution")
    desc = _resolve_alpha(single_descriptor(cfg), s)
    ps = build_points(desc, s)
    threads = int(cfg["threads"])
    es = evaluate(joint_density(dist), ps, workers=threads, vectorized=True)
    n = cfg.get("partitions")
    polys = approximate(es, cfg["algorithm"], n, workers=threads, **_fit_options(cfg))
    out = _outdir(cfg)
    print(ps.describe())
    for j, poly in enumerate(polys):
        truth = true_marginal(dist, j)
        write_poly_json(poly, os.path.join(out, f"marginal_{j}.json"))
        write_poly_csv(poly, os.path.join(out, f"marginal_{j}.csv"), int(cfg["eval_grid"]), truth)
        print(f"{_profile_line(project(es, j).profile)} mode={poly.mode} degree={poly.degree}")
    print(f"wrote {len(polys)} marginals to {out}")
    return EXIT_OK


def _report_lines(report) -> None:
    for r in report.rows:
        errs = " ".join(f"{e.sup_error:.6g}" for e in r.errors)
        print(f"{r.kind} N={r.N} n={r.n} m={r.m} sup_error=[{errs}]")


def _write_report(report, out, stem) -> None:
    report.write_csv(os.path.join(out, f"{stem}.csv"))
    report.write_json(os.path.join(out, f"{stem}.json"))
    print(f"wrote {os.path.join(out, stem)}.csv and .json")


def _schedule(cfg, s) -> list[dict]:
    if cfg.get("schedule") is not None:
        sched = list(cfg["schedule"])
    else:
        sched = []
        for kind in _kinds(cfg):
            values = cfg[kind]
            if kind == "maximal":
                sched.append(_descriptor(cfg, kind, values))
                continue
            for v in values if isinstance(values, list) else [values]:
                sched.append(_descriptor(cfg, kind, v))
    if not sched:
        raise ArgumentError("empty schedule: give --grid/--korobov/--maximal/--random values or a config schedule")
    return [_resolve_alpha(d, s) for d in sched]


def cmd_converge(cfg) -> int:
    dist = _distribution(cfg)
    sched = _schedule(cfg, dist.s)
    nseeds = int(cfg["seeds"])
    seeds = list(range(int(cfg["seed"]), int(cfg["seed"]) + nseeds)) if nseeds > 1 else None
    report = convergence_study(
        dist, sched, cfg["algorithm"], cfg.get("partitions"), int(cfg["eval_grid"]),
        seeds=seeds, workers=int(cfg["threads"]), label="convergence", **_fit_options(cfg),
    )
    _report_lines(report)
    flags = report.trend_flags()
    print("trend " + " ".join(f"axis{j}={'ok' if f else 'FAIL'}" for j, f in enumerate(flags)))
    _write_report(report, _outdir(cfg), "convergence")
    if cfg.get("strict") and not all(flags):
        return EXIT_TREND
    return EXIT_OK


def cmd_compare(cfg) -> int:
    dist = _distribution(cfg)
    grid, kor = cfg.get("grid"), cfg.get("korobov")
    grid = grid[0] if isinstance(grid, list) else grid
    kor = kor[0] if isinstance(kor, list) else kor
    if grid is None or kor is None or cfg.get("partitions") is None:
        raise ArgumentError("compare needs --grid n, --korobov N and --partitions n")
    alpha = None if cfg.get("auto_alpha") else cfg.get("alpha")
    if alpha is None:
        alpha = korobov_search(int(kor), dist.s)
    report = compare_grid_vs_lattice(
        dist, int(grid), int(kor), int(cfg["partitions"]), alpha=alpha,
        grid_size=int(cfg["eval_grid"]), workers=int(cfg["threads"]), **_fit_options(cfg),
    )
    _report_lines(report)
    g, lat = report.rows
    wins = [le.sup_error < ge.sup_error for ge, le in zip(g.errors, lat.errors)]
    print("lattice better " + " ".join(f"axis{j}={'yes' if w else 'no'}" for j, w in enumerate(wins)))
    _write_report(report, _outdir(cfg), "compare")
    if cfg.get("strict") and not all(wins):
        return EXIT_TREND
    return EXIT_OK


COMMANDS = {"points": cmd_points, "approx": cmd_approx, "converge": cmd_converge, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ArgumentError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, EmptyPartitionError, AlgorithmChoiceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
