"""Function evaluation on a point set and projection onto one axis."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ArgumentError, EvaluationError
from .pointset import PointSet, ProjectionProfile, projection_profile

__all__ = [
    "EvaluatedSet",
    "Projection",
    "evaluate",
    "project",
    "transform_domain",
    "write_psi_csv",
    "read_psi_csv",
]


@dataclass(frozen=True, eq=False)
class EvaluatedSet:
    """Point set together with one function value per point.

    ``psi`` stacks the coordinates and the values into the N x (s+1)
    matrix whose last column holds ``f(x_i)``.
    """

    points: PointSet
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.points.N,):
            raise ArgumentError(f"expected {self.points.N} values, got shape {values.shape}")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise EvaluationError(f"non-finite value at point {bad[0]}", index=int(bad[0]))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def psi(self) -> np.ndarray:
        return np.column_stack([self.points.coords, self.values])


@dataclass(frozen=True, eq=False)
class Projection:
    """Pairs ``(x_{i,j}, f(x_i))`` for one axis, in point order."""

    axis: int
    x: np.ndarray
    values: np.ndarray
    profile: ProjectionProfile

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.x, self.values])

    @property
    def N(self) -> int:
        return len(self.x)


def _call(f, coords, vectorized):
    if vectorized:
        return np.asarray(f(coords), dtype=float).reshape(len(coords))
    return np.fromiter((f(row) for row in coords), dtype=float, count=len(coords))


def evaluate(
    f: Callable,
    ps: PointSet,
    workers: Optional[int] = None,
    vectorized: bool = False,
) -> EvaluatedSet:
    """Evaluate ``f`` at every point of ``ps``.

    Parameters
    ----------
    f : callable
        Either ``f(x) -> float`` for one point ``x`` of shape (s,), or, with
        ``vectorized=True``, ``f(X) -> array`` for a block ``X`` of shape (k, s).
        Must be safe to call from several threads when ``workers > 1``.
    ps : PointSet
    workers : int, optional
        Number of threads. Rows are split into contiguous chunks and
        reassembled in order, so the result does not depend on ``workers``.
    vectorized : bool

    Raises
    ------
    EvaluationError
        If any value is NaN or infinite; ``index`` names the first such row.
    """
    coords = ps.coords
    if workers is None or workers <= 1 or ps.N < 2:
        values = _call(f, coords, vectorized)
    else:
        chunks = np.array_split(np.arange(ps.N), min(workers, ps.N))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _call(f, coords[idx], vectorized), chunks))
        values = np.concatenate(parts)
    return EvaluatedSet(ps, values)


def project(es: EvaluatedSet, j: int) -> Projection:
    """Orthogonal projection of the evaluations onto axis ``j`` (0-based)."""
    profile = projection_profile(es.points, j)
    return Projection(j, es.points.coords[:, j], es.values, profile)


def transform_domain(f: Callable, a, b) -> Callable:
    """Rewrite ``f`` on the box ``[a, b]`` as ``g(u) = f(a + u (b - a))`` on the unit cube.

    No Jacobian factor is applied, so ``g`` integrates to ``1/prod(b - a)``
    times the integral of ``f``. Shapes of marginals are unaffected. ``g``
    accepts a single point or a (k, s) block, whatever ``f`` accepts.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ArgumentError("a and b must have the same length")
    if np.any(a >= b):
        raise ArgumentError(f"need a < b componentwise, got a={a.tolist()}, b={b.tolist()}")
    width = b - a

    def g(u):
        return f(a + np.asarray(u, dtype=float) * width)

    return g


def write_psi_csv(es: EvaluatedSet, path) -> None:
    """Write the N x (s+1) matrix: coordinate columns then the value column."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {es.points.describe()}\n")
        np.savetxt(fh, es.psi, fmt="%.17g", delimiter=",")


def read_psi_csv(path) -> EvaluatedSet:
    """Inverse of :func:`write_psi_csv`; the point set is imported as floats."""
    psi = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    ps = PointSet(psi[:, :-1], "imported")
    return EvaluatedSet(ps, psi[:, -1])
