"""Structured point sets in the unit cube.

Grids, rank-1 lattices (including Korobov and maximal rank rules) and
seeded pseudo-random sets. Grid and lattice coordinates are generated in
integer arithmetic and carry an exact rational form ``numerators /
denominator`` so that coincident abscissae can be grouped without float
comparisons.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ArgumentError, CapacityError

__all__ = [
    "PointSet",
    "ProjectionProfile",
    "RANDOM_GENERATOR",
    "GROUPING_TOL",
    "grid_size",
    "grid_points",
    "rank1_lattice",
    "korobov_vector",
    "korobov_lattice",
    "maximal_rank_lattice",
    "random_points",
    "projection_profile",
    "korobov_criterion",
    "korobov_search",
    "DEFAULT_WEIGHT",
    "write_points_csv",
    "read_points_csv",
]

#: Identity of the pseudo-random generator behind :func:`random_points`.
#: Part of the CSV contract: files written under another generator are not
#: reproducible with this one.
RANDOM_GENERATOR = "numpy.PCG64"

#: Absolute tolerance used to group float coordinates without a rational form.
GROUPING_TOL = 1e-12

#: Default budget on ``N * s`` stored coordinates (about 400 MB of float64).
MAX_ENTRIES = 50_000_000


@dataclass(frozen=True, eq=False)
class PointSet:
    """N points in [0, 1)^s with provenance.

    Attributes
    ----------
    coords : ndarray, shape (N, s)
        Float coordinates; read-only.
    kind : str
        One of ``"grid"``, ``"rank1"``, ``"korobov"``, ``"maximal"``,
        ``"random"`` or ``"imported"``.
    params : dict
        Construction parameters (``n``; ``z``; ``alpha``; ``l, r, z``; ``seed``).
    numerators : ndarray of int64, optional
        Exact coordinates are ``numerators / denominator``.
    denominator : int, optional
    """

    coords: np.ndarray
    kind: str
    params: Mapping = field(default_factory=dict)
    numerators: Optional[np.ndarray] = None
    denominator: Optional[int] = None

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=float)
        if coords.ndim != 2:
            raise ArgumentError("coords must be a 2-d array of shape (N, s)")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.numerators is not None:
            num = np.ascontiguousarray(self.numerators, dtype=np.int64)
            if num.shape != coords.shape or not self.denominator:
                raise ArgumentError("rational form must match coords")
            num.setflags(write=False)
            object.__setattr__(self, "numerators", num)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def s(self) -> int:
        return self.coords.shape[1]

    @property
    def has_rational(self) -> bool:
        return self.numerators is not None

    def fraction(self, i: int, j: int) -> Fraction:
        """Exact coordinate ``x[i, j]`` (requires the rational form)."""
        if self.numerators is None:
            raise ArgumentError(f"{self.kind} point set has no rational form")
        return Fraction(int(self.numerators[i, j]), self.denominator)

    def describe(self) -> str:
        """Header string ``kind=...,N=...,s=...,<params>`` used in CSV files."""
        parts = [f"kind={self.kind}", f"N={self.N}", f"s={self.s}"]
        for key, value in self.params.items():
            if isinstance(value, (list, tuple, np.ndarray)):
                value = " ".join(str(int(v)) for v in value)
            parts.append(f"{key}={value}")
        return ",".join(parts)

    def __repr__(self):
        return f"PointSet({self.describe()})"


@dataclass(frozen=True, eq=False)
class ProjectionProfile:
    """Distinct abscissae of one axis and how often each occurs.

    ``labels[i]`` is the index into ``nodes`` of point ``i``'s coordinate.
    """

    axis: int
    nodes: np.ndarray
    multiplicities: np.ndarray
    labels: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def N(self) -> int:
        return len(self.labels)

    @property
    def fully_projection_regular(self) -> bool:
        return self.n == self.N

    @property
    def m(self) -> Optional[int]:
        """Common multiplicity, or None when the multiplicities differ."""
        first = int(self.multiplicities[0])
        return first if np.all(self.multiplicities == first) else None


def _rational_points(num, den, kind, params):
    num = np.asarray(num, dtype=np.int64)
    return PointSet(num / den, kind, params, numerators=num, denominator=int(den))


def _check_capacity(N, s, max_entries):
    if N * s > max_entries:
        raise CapacityError(
            f"{N} points in {s} dimensions exceed the budget of {max_entries} coordinates"
        )


def grid_size(n: int, s: int) -> int:
    """Number of points ``n**s`` of the regular grid (no allocation)."""
    return n**s


def grid_points(n: int, s: int, max_entries: int = MAX_ENTRIES) -> PointSet:
    """Regular n-point grid ``((i_1-1)/(n-1), ..., (i_s-1)/(n-1))``.

    Rows are in lexicographic order of ``(i_1, ..., i_s)``. Unlike the
    lattices, grid coordinates reach 1.0.
    """
    if n < 2 or s < 1:
        raise ArgumentError(f"grid needs n >= 2 and s >= 1, got n={n}, s={s}")
    _check_capacity(grid_size(n, s), s, max_entries)
    axes = np.indices((n,) * s, dtype=np.int64).reshape(s, -1).T
    return _rational_points(axes, n - 1, "grid", {"n": n})


def rank1_lattice(N: int, z: Sequence[int], max_entries: int = MAX_ENTRIES) -> PointSet:
    """Rank-1 lattice ``x_i = {i z / N}`` for ``i = 1, ..., N``.

    The last row (``i = N``) is the origin.
    """
    z = np.asarray([int(v) for v in z], dtype=np.int64)
    if N < 2 or z.ndim != 1 or len(z) == 0:
        raise ArgumentError("rank-1 lattice needs N >= 2 and a non-empty generating vector")
    if np.any(z < 1) or np.any(z > N - 1):
        raise ArgumentError(f"generating vector entries must lie in 1..{N - 1}, got {z.tolist()}")
    _check_capacity(N, len(z), max_entries)
    i = np.arange(1, N + 1, dtype=np.int64)[:, None]
    # i * z < 2**63 for any N that passes the capacity check
    num = (i * z[None, :]) % N
    return _rational_points(num, N, "rank1", {"z": z.tolist()})


def korobov_vector(N: int, alpha: int, s: int) -> list[int]:
    """Generating vector ``(1, alpha, alpha**2, ..., alpha**(s-1)) mod N``."""
    return [pow(int(alpha), j, int(N)) for j in range(s)]


def korobov_lattice(N: int, alpha: int, s: int, max_entries: int = MAX_ENTRIES) -> PointSet:
    """Korobov lattice: rank-1 lattice with a power generating vector."""
    if not 1 <= alpha <= N - 1:
        raise ArgumentError(f"alpha must lie in 1..{N - 1}, got {alpha}")
    z = korobov_vector(N, alpha, s)
    if 0 in z:
        raise ArgumentError(f"alpha={alpha} has a power divisible by N={N}")
    ps = rank1_lattice(N, z, max_entries=max_entries)
    return PointSet(ps.coords, "korobov", {"alpha": alpha}, ps.numerators, ps.denominator)


def maximal_rank_lattice(
    l: int, r: int, z: Sequence[int], max_entries: int = MAX_ENTRIES
) -> PointSet:
    """Maximal rank lattice ``{i z / l + k / r}``, ``N = l * r**s`` points.

    Rows run over ``i = 1..l`` (outer) and the offsets ``k`` in
    lexicographic order (inner). With ``r == 1`` this is the rank-1
    lattice with generating vector ``z``.
    """
    z = np.asarray([int(v) for v in z], dtype=np.int64)
    s = len(z)
    if l < 1 or r < 1 or s == 0:
        raise ArgumentError("maximal rank lattice needs l >= 1, r >= 1 and a non-empty z")
    if math.gcd(r, l) != 1:
        raise ArgumentError(f"r={r} must be coprime with l={l}")
    bad = [int(v) for v in z if math.gcd(int(v), l) != 1]
    if bad:
        raise ArgumentError(f"generating vector entries {bad} are not coprime with l={l}")
    N = l * r**s
    _check_capacity(N, s, max_entries)
    den = l * r
    i = np.arange(1, l + 1, dtype=np.int64)
    base = (i[:, None] * z[None, :] * r) % den  # (l, s)
    offsets = np.indices((r,) * s, dtype=np.int64).reshape(s, -1).T * l  # (r**s, s)
    num = (base[:, None, :] + offsets[None, :, :]) % den
    return _rational_points(num.reshape(N, s), den, "maximal", {"l": l, "r": r, "z": z.tolist()})


def random_points(N: int, s: int, seed: int) -> PointSet:
    """N i.i.d. uniform points from ``numpy.random.Generator(PCG64(seed))``."""
    if N < 1 or s < 1:
        raise ArgumentError(f"random point set needs N >= 1 and s >= 1, got N={N}, s={s}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return PointSet(rng.random((N, s)), "random", {"seed": int(seed), "generator": RANDOM_GENERATOR})


def projection_profile(ps: PointSet, j: int, tol: float = GROUPING_TOL) -> ProjectionProfile:
    """Distinct values of coordinate ``j`` (0-based) and their multiplicities.

    Exact grouping by integer numerator when the rational form is present.
    Otherwise sorted values are chained into one node while consecutive
    gaps are at most ``tol``; the node is the smallest member.
    """
    if not 0 <= j < ps.s:
        raise ArgumentError(f"axis {j} out of range for s={ps.s}")
    if ps.has_rational:
        keys, labels, counts = np.unique(ps.numerators[:, j], return_inverse=True, return_counts=True)
        nodes = keys / ps.denominator
    else:
        x = ps.coords[:, j]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        starts = np.concatenate(([True], np.diff(xs) > tol))
        group = np.cumsum(starts) - 1
        labels = np.empty_like(group)
        labels[order] = group
        nodes = xs[starts]
        counts = np.bincount(group)
    return ProjectionProfile(j, nodes, counts.astype(np.int64), labels.astype(np.int64))


def _dual_sum_table(N: int) -> np.ndarray:
    """``S(t) = sum_{h != 0, -N/2 < h <= N/2} exp(2 pi i h t / N) / |h|`` for t in 0..N-1."""
    c = np.zeros(N)
    h = np.arange(1, (N - 1) // 2 + 1)
    c[h] = 1.0 / h
    c[N - h] = 1.0 / h
    if N % 2 == 0:
        c[N // 2] = 2.0 / N
    return np.real(np.fft.fft(c))


#: Default product weight in :func:`korobov_criterion`. With unit weights
#: the truncated sum is dominated by high-order terms in high dimension
#: and the search degenerates (N = 2**16, s = 10 picks alpha = 3).
DEFAULT_WEIGHT = 0.05


def _weight_vector(weights, s):
    if np.isscalar(weights):
        return np.full(s, float(weights))
    gam = np.asarray(weights, dtype=float)
    if gam.shape != (s,) or np.any(gam <= 0):
        raise ArgumentError(f"need {s} positive weights, got {weights!r}")
    return gam


def _varying_part(N, z, table, gam, k):
    # sum over k = 1..N-1 of prod_j (1 + gam_j S(k z_j mod N)); the k = 0 term is alpha-free
    prod = np.ones(len(k))
    pow2 = N & (N - 1) == 0
    for zj, g in zip(z, gam):
        idx = (k * int(zj)) & (N - 1) if pow2 else (k * int(zj)) % N
        prod *= 1.0 + g * table[idx]
    return float(prod.sum())


def korobov_criterion(N: int, z: Sequence[int], weights=DEFAULT_WEIGHT) -> float:
    """Weighted truncated R figure of merit of the lattice with vector ``z``.

    Sum over nonzero dual vectors ``h`` (``h . z = 0 mod N``) with
    ``-N/2 < h_j <= N/2`` of ``prod_j r(h_j)``, where ``r(0) = 1`` and
    ``r(h) = gamma_j / |h|``. ``weights=1`` is the classical R criterion.
    Computed through the character-sum identity

        R = (1/N) sum_{k=0}^{N-1} prod_j (1 + gamma_j S(k z_j mod N)) - 1,

    ``S(t) = sum_{h != 0} exp(2 pi i h t / N) / |h|``. Smaller is better.
    """
    gam = _weight_vector(weights, len(z))
    table = _dual_sum_table(N)
    k = np.arange(1, N, dtype=np.int64)
    head = float(np.prod(1.0 + gam * table[0]))
    return (head + _varying_part(N, z, table, gam, k)) / N - 1.0


def _symmetry_class(a, N):
    # alpha, -alpha, alpha^-1 and -alpha^-1 generate coordinate-permuted lattices
    inv = pow(a, -1, N)
    return {a, N - a, inv, N - inv}


def korobov_search(
    N: int, s: int, candidates: Optional[Sequence[int]] = None, weights=DEFAULT_WEIGHT
) -> int:
    """Korobov multiplier minimising :func:`korobov_criterion`.

    Exhaustive over ``alpha`` in ``1..N-1`` coprime with ``N`` unless
    ``candidates`` is given. With equal weights, ``alpha``, ``N - alpha``
    and their inverses mod N share one criterion value, so only the
    smallest member of each such class is evaluated. Ties (relative 1e-12)
    resolve to the smallest alpha.

    Cost is O(N s) per class; roughly 25 s for N = 2**16, s = 10.
    """
    if N < 4 or s < 1:
        raise ArgumentError(f"korobov_search needs N >= 4 and s >= 1, got N={N}, s={s}")
    gam = _weight_vector(weights, s)
    cands = None if candidates is None else tuple(sorted({int(a) for a in candidates}))
    return _search(int(N), int(s), cands, tuple(gam.tolist()))


@functools.lru_cache(maxsize=64)
def _search(N, s, candidates, gam):
    gam = np.asarray(gam)
    symmetric = bool(np.all(gam == gam[0]))
    if candidates is None:
        pool = [
            a for a in range(1, N)
            if math.gcd(a, N) == 1 and (not symmetric or a == min(_symmetry_class(a, N)))
        ]
    else:
        pool = sorted({int(a) for a in candidates if 1 <= a <= N - 1 and math.gcd(int(a), N) == 1})
        if not pool:
            raise ArgumentError("no candidate alpha is coprime with N")
    table = _dual_sum_table(N)
    k = np.arange(1, N, dtype=np.int64)
    best_alpha, best = None, None
    for a in pool:
        value = _varying_part(N, korobov_vector(N, a, s), table, gam, k)
        if best is None or value < best - 1e-12 * abs(best):
            best_alpha, best = a, value
    return best_alpha


def write_points_csv(ps: PointSet, path, rational_sidecar: bool = True) -> None:
    """Write ``# <describe()>`` then one ``%.17g`` row per point.

    The exact form, when present, goes to ``<path>.rational.csv`` as
    ``p/q`` strings.
    """
    path = str(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {ps.describe()}\n")
        np.savetxt(fh, ps.coords, fmt="%.17g", delimiter=",")
    if rational_sidecar and ps.has_rational:
        with open(path + ".rational.csv", "w", newline="\n") as fh:
            fh.write(f"# {ps.describe()}\n")
            q = ps.denominator
            for row in ps.numerators:
                fh.write(",".join(f"{int(p)}/{q}" for p in row) + "\n")


def _parse_header(line: str):
    fields = {}
    for item in line.lstrip("#").strip().split(","):
        key, _, value = item.partition("=")
        fields[key.strip()] = value.strip()
    return fields


def read_points_csv(path) -> PointSet:
    """Read a file written by :func:`write_points_csv` (sidecar optional)."""
    path = str(path)
    with open(path) as fh:
        header = _parse_header(fh.readline())
    coords = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    kind = header.pop("kind", "imported")
    N, s = int(header.pop("N")), int(header.pop("s"))
    if coords.shape != (N, s):
        raise ArgumentError(f"{path}: header says {N}x{s}, found {coords.shape}")
    params = {}
    for key, value in header.items():
        if key == "z":
            params[key] = [int(v) for v in value.split()]
        elif key == "generator":
            params[key] = value
        else:
            params[key] = int(value)
    num = den = None
    try:
        with open(path + ".rational.csv") as fh:
            fh.readline()
            rows = [line.strip().split(",") for line in fh if line.strip()]
        fracs = [[Fraction(cell) for cell in row] for row in rows]
        den = math.lcm(*(f.denominator for row in fracs for f in row))
        num = np.array([[f.numerator * (den // f.denominator) for f in row] for row in fracs], dtype=np.int64)
    except FileNotFoundError:
        pass
    return PointSet(coords, kind, params, numerators=num, denominator=den)
