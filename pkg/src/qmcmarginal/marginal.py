"""Marginal shape approximation by degree-(n-1) least-squares polynomials.

The least-squares polynomial of degree n-1 fitted to all N projected
pairs of an axis with n distinct abscissae interpolates the n point-wise
means, and the same holds for any positive per-node weighting. The
canonical fit is therefore computed as an interpolant in barycentric
form through the means; the weighted solve and the monomial Vandermonde
solve are kept as independent cross-checks.
"""

from __future__ import annotations

import enum
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre

from .errors import AlgorithmChoiceError, ArgumentError, EmptyPartitionError
from .evaluation import EvaluatedSet, Projection, project

__all__ = [
    "NodeRule",
    "MeanProfile",
    "MarginalPoly",
    "ExtrapolationWarning",
    "barycentric_weights",
    "pointwise_means",
    "equal_breakpoints",
    "partition_means",
    "fit_ls_poly",
    "fit_wls_poly",
    "fit_partition_poly",
    "fit_projection_poly",
    "PartitionFit",
    "chebyshev_nodes",
    "algorithm_I",
    "algorithm_II",
    "approximate",
    "eval_poly",
    "vandermonde_ls_fit",
    "poly_to_dict",
    "poly_from_dict",
    "write_poly_json",
    "read_poly_json",
    "write_poly_csv",
]

#: Largest node count for which monomial coefficients are offered.
MONOMIAL_MAX_NODES = 20


class NodeRule(str, enum.Enum):
    """Abscissa attached to a partition mean."""

    LEFT = "left"
    MIDPOINT = "midpoint"


#: Default placement of partition means. Note that the left breakpoint
#: leaves an O(1/n) bias at every node that does not vanish as N grows.
DEFAULT_NODE_RULE = NodeRule.LEFT


class PartitionFit(str, enum.Enum):
    """What Algorithm II fits its degree-(n-1) polynomial to."""

    #: least squares over all N raw projected pairs
    PROJECTIONS = "projections"
    #: interpolation through the n partition means
    BIN_MEANS = "bin_means"


class ExtrapolationWarning(UserWarning):
    """A marginal polynomial was evaluated outside [0, 1]."""


@dataclass(frozen=True, eq=False)
class MeanProfile:
    axis: int
    nodes: np.ndarray
    means: np.ndarray
    counts: np.ndarray
    mode: str = "pointwise"
    breakpoints: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.nodes)


def barycentric_weights(nodes) -> np.ndarray:
    """Weights ``1 / prod_{i != k} c (x_k - x_i)`` with ``c = 4 / (max - min)``.

    The common factor ``c`` keeps the products near unity; weights are
    only defined up to scale.
    """
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    if n == 1:
        return np.ones(1)
    c = 4.0 / (x.max() - x.min())
    diff = c * (x[:, None] - x[None, :])
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


@dataclass(frozen=True, eq=False)
class MarginalPoly:
    """Polynomial of degree ``n - 1`` stored by its values at ``n`` nodes.

    Calling the object evaluates it (see :func:`eval_poly`).
    """

    nodes: np.ndarray
    node_values: np.ndarray
    axis: Optional[int] = None
    mode: str = "pointwise"
    breakpoints: Optional[np.ndarray] = None
    node_rule: Optional[str] = None

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        values = np.array(self.node_values, dtype=float).ravel()
        if len(nodes) == 0 or nodes.shape != values.shape:
            raise ArgumentError("need one value per node and at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise ArgumentError("nodes must be strictly increasing")
        for arr in (nodes, values):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "node_values", values)
        if self.breakpoints is not None:
            object.__setattr__(self, "breakpoints", np.array(self.breakpoints, dtype=float))
        object.__setattr__(self, "_weights", barycentric_weights(nodes))

    @property
    def degree(self) -> int:
        return len(self.nodes) - 1

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def monomial_coeffs(self) -> np.ndarray:
        """Coefficients ``c_0..c_{n-1}`` in powers of x (n <= 20 only)."""
        if len(self.nodes) > MONOMIAL_MAX_NODES:
            raise ArgumentError(
                f"monomial form is offered for at most {MONOMIAL_MAX_NODES} nodes"
            )
        V = np.vander(self.nodes, increasing=True)
        return np.linalg.solve(V, self.node_values)

    def __call__(self, x):
        return eval_poly(self, x)


def eval_poly(poly: MarginalPoly, x):
    """Value of the interpolating polynomial at ``x`` (scalar or array).

    Uses the modified Lagrange (first barycentric) formula, which stays
    stable outside the node hull. At a node the stored value is returned
    exactly. Points outside [0, 1] raise :class:`ExtrapolationWarning`.
    """
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    if np.any((flat < 0.0) | (flat > 1.0)):
        warnings.warn("evaluating marginal polynomial outside [0, 1]", ExtrapolationWarning, stacklevel=2)
    nodes, values, w = poly.nodes, poly.node_values, poly.weights
    if len(nodes) == 1:
        out = np.full(flat.shape, values[0])
    else:
        c = 4.0 / (nodes[-1] - nodes[0])
        out = np.empty(flat.shape)
        for start in range(0, len(flat), 2048):
            chunk = flat[start:start + 2048]
            diff = c * (chunk[:, None] - nodes[None, :])
            exact = diff == 0.0
            diff[exact] = 1.0
            ell = np.prod(diff, axis=1)
            res = ell * np.sum(w * values / diff, axis=1)
            hit = exact.any(axis=1)
            if hit.any():
                res[hit] = values[np.argmax(exact[hit], axis=1)]
            out[start:start + len(chunk)] = res
    if xa.ndim == 0:
        return float(out[0])
    return out.reshape(xa.shape)


def pointwise_means(p: Projection) -> MeanProfile:
    """Average of the projected values sharing each distinct abscissa."""
    prof = p.profile
    sums = np.bincount(prof.labels, weights=p.values, minlength=prof.n)
    means = sums / prof.multiplicities
    return MeanProfile(p.axis, prof.nodes.copy(), means, prof.multiplicities.copy())


def equal_breakpoints(n: int) -> np.ndarray:
    """``0, 1/n, ..., 1``."""
    if n < 1:
        raise ArgumentError(f"partition count must be >= 1, got {n}")
    return np.arange(n + 1) / n


def _bin_labels(p: Projection, breakpoints):
    # bin per distinct node, then per point: fewer comparisons and exact for rational nodes
    n = len(breakpoints) - 1
    node_bin = np.searchsorted(breakpoints, p.profile.nodes, side="right") - 1
    node_bin = np.clip(node_bin, 0, n - 1)
    return node_bin[p.profile.labels]


def partition_means(p: Projection, breakpoints) -> MeanProfile:
    """Mean of the projected values falling in each bin ``[z_k, z_{k+1})``.

    The last bin is closed at 1. ``breakpoints`` may be an int ``n`` for
    ``n`` equal-width bins. Bin counts are the actual occupancies.

    Raises
    ------
    EmptyPartitionError
        If a bin holds no point.
    """
    if np.isscalar(breakpoints):
        breakpoints = equal_breakpoints(int(breakpoints))
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0) or bp[0] != 0.0 or bp[-1] != 1.0:
        raise ArgumentError("breakpoints must increase strictly from 0 to 1")
    n = len(bp) - 1
    labels = _bin_labels(p, bp)
    counts = np.bincount(labels, minlength=n)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        k = int(empty[0])
        raise EmptyPartitionError(
            f"axis {p.axis}: bin {k} [{bp[k]:.6g}, {bp[k + 1]:.6g}) is empty; use fewer partitions",
            bin_index=k,
        )
    means = np.bincount(labels, weights=p.values, minlength=n) / counts
    return MeanProfile(p.axis, bp[:-1].copy(), means, counts, mode="partition", breakpoints=bp)


def fit_ls_poly(p: Projection) -> MarginalPoly:
    """Degree-(n-1) least-squares fit to the projection of an axis with n distinct abscissae.

    Computed as the interpolant through the point-wise means.
    """
    mp = pointwise_means(p)
    return MarginalPoly(mp.nodes, mp.means, axis=p.axis, mode="pointwise")


def fit_wls_poly(p: Projection, w) -> MarginalPoly:
    """Weighted least-squares fit of degree n-1 with weight ``w[k]`` on node ``k``.

    Solves the weighted normal equations over all N projected pairs in a
    Legendre basis on [0, 1]. The result coincides with :func:`fit_ls_poly`
    for any positive weights, which makes this an independent check of it.
    """
    prof = p.profile
    w = np.asarray(w, dtype=float)
    if w.shape != (prof.n,):
        raise ArgumentError(f"need {prof.n} node weights, got shape {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ArgumentError("weights must be finite and strictly positive")
    deg = prof.n - 1
    t = 2.0 * p.x - 1.0
    A = legendre.legvander(t, deg)
    wi = w[prof.labels]
    gram = A.T @ (wi[:, None] * A)
    rhs = A.T @ (wi * p.values)
    coef = np.linalg.solve(gram, rhs)
    node_values = legendre.legval(2.0 * prof.nodes - 1.0, coef)
    return MarginalPoly(prof.nodes, node_values, axis=p.axis, mode="pointwise")


def fit_partition_poly(
    p: Projection, breakpoints, node_rule=DEFAULT_NODE_RULE
) -> MarginalPoly:
    """Degree-(n-1) polynomial through the n partition means.

    ``node_rule`` places mean ``k`` at the left breakpoint ``z_k`` or at the
    bin midpoint.
    """
    rule = NodeRule(node_rule)
    mp = partition_means(p, breakpoints)
    bp = mp.breakpoints
    nodes = bp[:-1] if rule is NodeRule.LEFT else 0.5 * (bp[:-1] + bp[1:])
    return MarginalPoly(nodes, mp.means, axis=p.axis, mode="partition", breakpoints=bp, node_rule=rule.value)


def chebyshev_nodes(n: int) -> np.ndarray:
    """First-kind Chebyshev points mapped to [0, 1], increasing."""
    k = np.arange(n)
    return np.sort(0.5 - 0.5 * np.cos((2 * k + 1) * np.pi / (2 * n)))


def fit_projection_poly(p: Projection, n: int, breakpoints=None) -> MarginalPoly:
    """Least-squares polynomial of degree n-1 over all N projected pairs.

    Unlike :func:`fit_ls_poly` the abscissae need not repeat, so with a
    fully projection regular set this is a regression rather than an
    interpolant. Solved by QR in a Legendre basis; stored by its values
    at n Chebyshev points of [0, 1].
    """
    if n < 1:
        raise ArgumentError(f"degree + 1 must be >= 1, got {n}")
    if p.profile.n < n:
        raise ArgumentError(
            f"axis {p.axis} has {p.profile.n} distinct abscissae, too few for degree {n - 1}"
        )
    A = legendre.legvander(2.0 * p.x - 1.0, n - 1)
    coef, *_ = np.linalg.lstsq(A, p.values, rcond=None)
    nodes = chebyshev_nodes(n)
    values = legendre.legval(2.0 * nodes - 1.0, coef)
    return MarginalPoly(nodes, values, axis=p.axis, mode="projection", breakpoints=breakpoints)


def _per_axis(fn, es, workers):
    axes = range(es.points.s)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, axes))
    return [fn(j) for j in axes]


def algorithm_I(es: EvaluatedSet, workers: Optional[int] = None) -> list[MarginalPoly]:
    """Per axis: project, then fit the degree-(n-1) polynomial through the point-wise means.

    Raises
    ------
    AlgorithmChoiceError
        If some axis has no repeated abscissa (m = 1); use :func:`algorithm_II`.
    """

    def one(j):
        p = project(es, j)
        if p.profile.fully_projection_regular and es.points.N > 1:
            raise AlgorithmChoiceError(
                f"axis {j} is fully projection regular (m = 1); use algorithm_II with a partition count"
            )
        return fit_ls_poly(p)

    return _per_axis(one, es, workers)


def algorithm_II(
    es: EvaluatedSet,
    n: int,
    fit=PartitionFit.PROJECTIONS,
    node_rule=DEFAULT_NODE_RULE,
    workers: Optional[int] = None,
) -> list[MarginalPoly]:
    """Per axis: project, split [0, 1] into n equal bins, fit a degree-(n-1) polynomial.

    Parameters
    ----------
    fit : {"projections", "bin_means"}
        ``"projections"`` fits by least squares to all N projected pairs
        (:func:`fit_projection_poly`); ``"bin_means"`` interpolates the
        partition means placed by ``node_rule`` (:func:`fit_partition_poly`).
        The two agree when every abscissa in a bin is moved to the bin's node.

    Raises
    ------
    EmptyPartitionError
        If some bin of some axis holds no point; retry with a smaller n.
    """
    fit = PartitionFit(fit)
    bp = equal_breakpoints(n)

    def one(j):
        p = project(es, j)
        try:
            if fit is PartitionFit.BIN_MEANS:
                return fit_partition_poly(p, bp, node_rule)
            partition_means(p, bp)
        except EmptyPartitionError as exc:
            raise EmptyPartitionError(f"{exc} (n={n})", exc.bin_index) from None
        return fit_projection_poly(p, n, breakpoints=bp)

    return _per_axis(one, es, workers)


def approximate(
    es: EvaluatedSet,
    algorithm: str = "auto",
    n: Optional[int] = None,
    fit=PartitionFit.PROJECTIONS,
    node_rule=DEFAULT_NODE_RULE,
    workers: Optional[int] = None,
) -> list[MarginalPoly]:
    """Dispatch to Algorithm I or II.

    ``"auto"`` uses Algorithm I when every axis repeats its abscissae
    (m > 1) and Algorithm II with ``n`` partitions otherwise.
    """
    algorithm = str(algorithm).upper()
    if algorithm == "AUTO":
        repeated = all(project(es, j).profile.multiplicities.min() > 1 for j in range(es.points.s))
        algorithm = "I" if repeated else "II"
    if algorithm == "I":
        return algorithm_I(es, workers=workers)
    if algorithm == "II":
        if n is None:
            raise ArgumentError("Algorithm II needs a partition count n")
        return algorithm_II(es, n, fit=fit, node_rule=node_rule, workers=workers)
    raise ArgumentError(f"unknown algorithm {algorithm!r}; expected auto, I or II")


def vandermonde_ls_fit(x, y, degree: int, center: bool = True) -> np.ndarray:
    """Monomial least-squares coefficients from the normal equations of the full design.

    Builds the N x (degree+1) Vandermonde matrix of all abscissae and solves
    ``M^T M c = M^T y``. With ``center=True`` the powers are taken of
    ``t = 2x - 1``, which keeps ``M^T M`` invertible in double precision up
    to degree ~10; returned coefficients are then in powers of ``t``.
    """
    x = np.asarray(x, dtype=float)
    t = 2.0 * x - 1.0 if center else x
    M = np.vander(t, degree + 1, increasing=True)
    return np.linalg.solve(M.T @ M, M.T @ np.asarray(y, dtype=float))


def poly_to_dict(poly: MarginalPoly) -> dict:
    d = {
        "axis": poly.axis,
        "degree": poly.degree,
        "nodes": [float(v) for v in poly.nodes],
        "node_values": [float(v) for v in poly.node_values],
        "mode": poly.mode,
    }
    if poly.breakpoints is not None:
        d["breakpoints"] = [float(v) for v in poly.breakpoints]
    if poly.node_rule is not None:
        d["node_rule"] = poly.node_rule
    return d


def poly_from_dict(d: dict) -> MarginalPoly:
    poly = MarginalPoly(
        d["nodes"], d["node_values"], axis=d.get("axis"), mode=d.get("mode", "pointwise"),
        breakpoints=d.get("breakpoints"), node_rule=d.get("node_rule"),
    )
    if "degree" in d and d["degree"] != poly.degree:
        raise ArgumentError(f"degree {d['degree']} does not match {len(poly.nodes)} nodes")
    return poly


def write_poly_json(poly: MarginalPoly, path) -> None:
    # repr of a float round-trips exactly, so JSON output is reproducible
    with open(path, "w", newline="\n") as fh:
        json.dump(poly_to_dict(poly), fh, indent=2)
        fh.write("\n")


def read_poly_json(path) -> MarginalPoly:
    with open(path) as fh:
        return poly_from_dict(json.load(fh))


def write_poly_csv(
    poly: MarginalPoly, path, grid_size: int = 1001, truth: Optional[Callable] = None
) -> None:
    """Write ``x, y_hat`` (and ``y_true`` if ``truth`` is given) on an equidistant grid of [0, 1]."""
    x = np.linspace(0.0, 1.0, grid_size)
    cols = [x, eval_poly(poly, x)]
    header = "x,y_hat"
    if truth is not None:
        cols.append(np.asarray(truth(x), dtype=float))
        header += ",y_true"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, np.column_stack(cols), fmt="%.17g", delimiter=",")
