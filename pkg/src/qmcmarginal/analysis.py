"""Error metrics, the equidistant interpolation bound, and convergence studies."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import ProductDistribution, joint_density, true_marginal
from .errors import ArgumentError
from .evaluation import evaluate, project
from .marginal import DEFAULT_NODE_RULE, PartitionFit, approximate
from .pointset import (
    grid_points,
    korobov_lattice,
    korobov_search,
    maximal_rank_lattice,
    random_points,
    rank1_lattice,
)

__all__ = [
    "ErrorReport",
    "StudyRow",
    "ConvergenceReport",
    "sup_error",
    "theorem_bound",
    "build_points",
    "run_row",
    "convergence_study",
    "compare_grid_vs_lattice",
    "TREND_SLACK",
    "DEFAULT_GRID_SIZE",
]

#: Relative increase between consecutive rows tolerated by the trend flags.
TREND_SLACK = 0.10

DEFAULT_GRID_SIZE = 1001

CSV_COLUMNS = ["kind", "N", "n", "m", "axis", "sup_error", "l2_error", "sup_std", "truth_max"]


@dataclass
class ErrorReport:
    """Discrepancy between a fitted marginal and the truth on an equidistant grid.

    The sup over a grid is a lower bound on the true sup norm.
    """

    axis: Optional[int]
    sup_error: float
    l2_error: float
    grid_size: int
    truth_max: float = float("nan")
    sup_std: float = 0.0

    @property
    def relative_sup(self) -> float:
        return self.sup_error / self.truth_max


def sup_error(poly: Callable, truth: Callable, grid_size: int = DEFAULT_GRID_SIZE, axis=None) -> ErrorReport:
    """Max and RMS of ``poly - truth`` over ``grid_size`` equidistant points of [0, 1]."""
    if grid_size < 2:
        raise ArgumentError(f"grid_size must be >= 2, got {grid_size}")
    x = np.linspace(0.0, 1.0, grid_size)
    t = np.asarray(truth(x), dtype=float) * np.ones_like(x)
    diff = np.asarray(poly(x), dtype=float) - t
    if axis is None:
        axis = getattr(poly, "axis", None)
    return ErrorReport(
        axis,
        float(np.max(np.abs(diff))),
        float(np.sqrt(np.mean(diff**2))),
        grid_size,
        float(np.max(np.abs(t))),
    )


def theorem_bound(C: float, n: int) -> float:
    """``C / (4 n (n-1)**n)``: sup error bound for interpolation at n equidistant nodes.

    ``C`` bounds the n-th derivative of the marginal on [0, 1].
    """
    if n < 2:
        raise ArgumentError(f"bound needs n >= 2, got {n}")
    if C < 0:
        raise ArgumentError(f"derivative bound must be >= 0, got {C}")
    return C / (4.0 * n * float(n - 1) ** n)


def build_points(desc: dict, s: int):
    """Point set from a descriptor such as ``{"kind": "korobov", "N": 1024}``.

    Kinds: ``grid`` (``n``), ``korobov`` (``N``, optional ``alpha``),
    ``rank1`` (``N``, ``z``), ``maximal`` (``l``, ``r``, optional ``z``),
    ``random`` (``N``, ``seed``). A Korobov descriptor without ``alpha``
    runs :func:`korobov_search`.
    """
    kind = desc.get("kind")
    if kind == "grid":
        return grid_points(int(desc["n"]), s)
    if kind == "korobov":
        N = int(desc["N"])
        alpha = desc.get("alpha")
        if alpha is None:
            alpha = korobov_search(N, s)
        return korobov_lattice(N, int(alpha), s)
    if kind == "rank1":
        return rank1_lattice(int(desc["N"]), desc["z"])
    if kind == "maximal":
        z = desc.get("z") or [1] * s
        return maximal_rank_lattice(int(desc["l"]), int(desc["r"]), z)
    if kind == "random":
        return random_points(int(desc["N"]), s, int(desc.get("seed", 0)))
    raise ArgumentError(f"unknown point-set kind {kind!r}")


@dataclass
class StudyRow:
    kind: str
    N: int
    n: int
    m: int
    errors: list
    params: dict = field(default_factory=dict)


def run_row(
    dist: ProductDistribution,
    desc: dict,
    algorithm: str = "auto",
    partitions: Optional[int] = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    fit=PartitionFit.PROJECTIONS,
    node_rule=DEFAULT_NODE_RULE,
    workers: Optional[int] = None,
    seeds: Optional[Sequence[int]] = None,
) -> StudyRow:
    """Approximate every marginal on one point set and measure the errors.

    A ``random`` descriptor with ``seeds`` repeats the run per seed and
    reports the mean sup/L2 errors and the sample standard deviation of
    the sup error.
    """
    n = desc.get("partitions", partitions)
    if desc.get("kind") == "random" and seeds:
        runs = [run_row(dist, {**desc, "seed": sd}, algorithm, n, grid_size, fit, node_rule, workers) for sd in seeds]
        merged = []
        for j in range(dist.s):
            sups = np.array([r.errors[j].sup_error for r in runs])
            l2s = np.array([r.errors[j].l2_error for r in runs])
            merged.append(ErrorReport(
                j, float(sups.mean()), float(l2s.mean()), grid_size, runs[0].errors[j].truth_max,
                float(sups.std(ddof=1)) if len(sups) > 1 else 0.0,
            ))
        first = runs[0]
        return StudyRow(first.kind, first.N, first.n, first.m, merged, {**first.params, "seeds": list(seeds)})

    ps = build_points(desc, dist.s)
    es = evaluate(joint_density(dist), ps, workers=workers, vectorized=True)
    polys = approximate(es, desc.get("algorithm", algorithm), n, fit=fit, node_rule=node_rule, workers=workers)
    errors = [sup_error(p, true_marginal(dist, j), grid_size, axis=j) for j, p in enumerate(polys)]
    if polys[0].mode == "pointwise":
        prof = project(es, 0).profile
        nodes, m = prof.n, prof.m or int(prof.multiplicities.min())
    else:
        nodes, m = n, ps.N // n
    return StudyRow(ps.kind, ps.N, nodes, m, errors, dict(ps.params))


@dataclass
class ConvergenceReport:
    """Study rows in schedule order plus per-axis trend flags."""

    rows: list
    label: str = ""

    def sorted_by_N(self) -> "ConvergenceReport":
        return ConvergenceReport(sorted(self.rows, key=lambda r: r.N), self.label)

    def sup_errors(self, relative: bool = False) -> np.ndarray:
        """Array of shape (rows, s)."""
        attr = "relative_sup" if relative else "sup_error"
        return np.array([[getattr(e, attr) for e in r.errors] for r in self.rows])

    def trend_flags(self, slack: float = TREND_SLACK) -> list[bool]:
        """Per axis: True when no row's sup error exceeds the previous one by more than ``slack``."""
        err = self.sup_errors()
        if len(err) < 2:
            return [True] * (err.shape[1] if err.size else 0)
        return [bool(np.all(err[1:, j] <= (1.0 + slack) * err[:-1, j])) for j in range(err.shape[1])]

    def to_records(self) -> list[dict]:
        recs = []
        for r in self.rows:
            for e in r.errors:
                recs.append({
                    "kind": r.kind, "N": r.N, "n": r.n, "m": r.m, "axis": e.axis,
                    "sup_error": e.sup_error, "l2_error": e.l2_error,
                    "sup_std": e.sup_std, "truth_max": e.truth_max,
                })
        return recs

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in self.to_records():
                writer.writerow([
                    f"{v:.17g}" if isinstance(v, float) else v for v in (rec[c] for c in CSV_COLUMNS)
                ])

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "rows": [
                {"kind": r.kind, "N": r.N, "n": r.n, "m": r.m, "params": r.params,
                 "errors": [asdict(e) for e in r.errors]}
                for r in self.rows
            ],
            "trend_flags": self.trend_flags(),
        }

    def write_json(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def convergence_study(
    dist: ProductDistribution,
    schedule: Sequence[dict],
    algorithm: str = "auto",
    partitions: Optional[int] = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    fit=PartitionFit.PROJECTIONS,
    node_rule=DEFAULT_NODE_RULE,
    seeds: Optional[Sequence[int]] = None,
    workers: Optional[int] = None,
    label: str = "",
) -> ConvergenceReport:
    """Run :func:`run_row` for every descriptor and sort the rows by N.

    Each descriptor may override ``partitions`` and ``algorithm``.
    """
    if not schedule:
        raise ArgumentError("convergence study needs a non-empty schedule")
    rows = [
        run_row(dist, desc, algorithm, partitions, grid_size, fit, node_rule, workers, seeds)
        for desc in schedule
    ]
    return ConvergenceReport(rows, label).sorted_by_N()


def compare_grid_vs_lattice(
    dist: ProductDistribution,
    grid_n: int,
    lattice_N: int,
    partitions: int,
    alpha: Optional[int] = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    fit=PartitionFit.PROJECTIONS,
    node_rule=DEFAULT_NODE_RULE,
    workers: Optional[int] = None,
) -> ConvergenceReport:
    """Grid with point-wise means against a Korobov lattice with partitions.

    Returns a two-row report (grid first). For ``s == 1`` both sides are
    plain interpolation/regression on one axis and the grid row is fitted
    through its node values directly.
    """
    grid_desc = {"kind": "grid", "n": grid_n, "algorithm": "I"}
    if dist.s == 1:
        # a 1-d grid has m = 1, which Algorithm I rejects; interpolate directly
        from .marginal import fit_ls_poly

        ps = grid_points(grid_n, 1)
        es = evaluate(joint_density(dist), ps, vectorized=True)
        poly = fit_ls_poly(project(es, 0))
        grid_row = StudyRow("grid", ps.N, grid_n, 1, [sup_error(poly, true_marginal(dist, 0), grid_size, axis=0)], dict(ps.params))
    else:
        grid_row = run_row(dist, grid_desc, grid_size=grid_size, workers=workers)
    lattice_desc = {"kind": "korobov", "N": lattice_N, "alpha": alpha, "algorithm": "II"}
    lattice_row = run_row(dist, lattice_desc, partitions=partitions, grid_size=grid_size, fit=fit,
                          node_rule=node_rule, workers=workers)
    return ConvergenceReport([grid_row, lattice_row], label="grid-vs-lattice")
