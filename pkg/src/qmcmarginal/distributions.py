"""Product densities with closed-form marginals, used as test integrands.

Every factor lives on a truncation box ``[lower, upper]`` and is carried
to [0, 1] by the linear map ``x = lower + u (upper - lower)`` without a
Jacobian. For a product density the exact marginal of axis ``j`` on the
unit cube is therefore

    f_j(u) = g_j(u) * prod_{i != j} unit_mass_i,

with ``g_j(u) = pdf_j(lower_j + u (upper_j - lower_j))`` and
``unit_mass_i = truncated_mass_i / (upper_i - lower_i)``, the integral of
``g_i`` over [0, 1]. No renormalisation is applied after truncation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ArgumentError

__all__ = [
    "Exponential",
    "Beta",
    "Gamma",
    "GaussianMixture",
    "ProductDistribution",
    "joint_density",
    "true_marginal",
    "derivative_bound",
    "factor_from_dict",
    "distribution_from_dict",
    "distribution_to_dict",
    "load_distribution",
    "PRESETS",
    "preset",
]

#: Target lost mass per factor for the default truncation boxes.
TRUNCATION_LOSS = 1e-6


class _Factor:
    lower: float
    upper: float

    def pdf(self, x):
        raise NotImplementedError

    def truncated_mass(self) -> float:
        """Integral of ``pdf`` over ``[lower, upper]``."""
        raise NotImplementedError

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def unit_pdf(self, u):
        """Factor density carried to [0, 1] (no Jacobian)."""
        return self.pdf(self.lower + np.asarray(u, dtype=float) * self.width)

    def unit_mass(self) -> float:
        return self.truncated_mass() / self.width


@dataclass(frozen=True)
class Exponential(_Factor):
    """``rate * exp(-rate x)`` on ``[0, upper]``; default ``upper = 14 / rate``."""

    rate: float = 1.0
    upper: float = None
    lower: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not self.rate > 0:
            raise ArgumentError(f"Exponential rate must be > 0, got {self.rate}")
        if self.upper is None:
            object.__setattr__(self, "upper", 14.0 / self.rate)
        if not self.upper > 0:
            raise ArgumentError(f"Exponential truncation must be > 0, got {self.upper}")

    def pdf(self, x):
        return self.rate * np.exp(-self.rate * np.asarray(x, dtype=float))

    def truncated_mass(self):
        return -math.expm1(-self.rate * self.upper)

    def derivative_bound(self, n: int) -> float:
        """``sup |d^n/dx^n pdf| = rate**(n+1)`` on [0, inf), attained at 0+."""
        return self.rate ** (n + 1)


@dataclass(frozen=True)
class Beta(_Factor):
    """Beta(a, b) density on [0, 1]; no truncation."""

    a: float = 2.0
    b: float = 5.0
    lower: float = field(default=0.0, init=False)
    upper: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ArgumentError(f"Beta parameters must be > 0, got a={self.a}, b={self.b}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (
                special.xlog1py(self.b - 1, -x) + special.xlogy(self.a - 1, x)
                - special.betaln(self.a, self.b)
            )
        return np.where((x < 0) | (x > 1), 0.0, np.exp(logp))

    def truncated_mass(self):
        return 1.0


@dataclass(frozen=True)
class Gamma(_Factor):
    """Gamma(shape, rate) density on ``[0, upper]``.

    Default ``upper`` is ``(shape + 10 sqrt(shape)) / rate``, extended in
    steps of ``sqrt(shape) / rate`` until the lost mass is below 1e-6.
    """

    shape: float = 2.0
    rate: float = 1.0
    upper: float = None
    lower: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ArgumentError(f"Gamma parameters must be > 0, got shape={self.shape}, rate={self.rate}")
        if self.upper is None:
            root = math.sqrt(self.shape)
            upper = (self.shape + 10.0 * root) / self.rate
            while special.gammaincc(self.shape, self.rate * upper) >= TRUNCATION_LOSS:
                upper += root / self.rate
            object.__setattr__(self, "upper", upper)
        if not self.upper > 0:
            raise ArgumentError(f"Gamma truncation must be > 0, got {self.upper}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = (
                self.shape * math.log(self.rate) + special.xlogy(self.shape - 1, x)
                - self.rate * x - special.gammaln(self.shape)
            )
        return np.where(x < 0, 0.0, np.exp(logp))

    def truncated_mass(self):
        return float(special.gammainc(self.shape, self.rate * self.upper))


@dataclass(frozen=True)
class GaussianMixture(_Factor):
    """Mixture of normals ``sum w_i N(mu_i, sigma_i^2)`` on ``[lower, upper]``.

    ``components`` holds ``(weight, mu, sigma)`` triples with weights
    summing to one. Default box: 6 standard deviations beyond the
    outermost components.
    """

    components: tuple = ((1.0, 0.0, 1.0),)
    lower: float = None
    upper: float = None

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        if not comps or any(len(c) != 3 for c in comps):
            raise ArgumentError("mixture components must be (weight, mu, sigma) triples")
        w = np.array([c[0] for c in comps])
        if np.any(w <= 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-12):
            raise ArgumentError(f"mixture weights must be positive and sum to 1, got {w.tolist()}")
        if any(c[2] <= 0 for c in comps):
            raise ArgumentError("mixture standard deviations must be > 0")
        object.__setattr__(self, "components", comps)
        if self.lower is None:
            object.__setattr__(self, "lower", min(c[1] - 6 * c[2] for c in comps))
        if self.upper is None:
            object.__setattr__(self, "upper", max(c[1] + 6 * c[2] for c in comps))
        if not self.lower < self.upper:
            raise ArgumentError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for w, mu, sd in self.components:
            out = out + w * np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
        return out

    def truncated_mass(self):
        return float(sum(
            w * (special.ndtr((self.upper - mu) / sd) - special.ndtr((self.lower - mu) / sd))
            for w, mu, sd in self.components
        ))


@dataclass(frozen=True)
class ProductDistribution:
    """Independent product of univariate factors, one per axis."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ArgumentError("a product distribution needs at least one factor")
        for f in factors:
            if not isinstance(f, _Factor):
                raise ArgumentError(f"unsupported factor {f!r}")
        object.__setattr__(self, "factors", factors)

    @property
    def s(self) -> int:
        return len(self.factors)

    @property
    def lower(self) -> np.ndarray:
        return np.array([f.lower for f in self.factors])

    @property
    def upper(self) -> np.ndarray:
        return np.array([f.upper for f in self.factors])

    def lost_mass(self) -> np.ndarray:
        """``1 - truncated_mass`` per factor."""
        return np.array([1.0 - f.truncated_mass() for f in self.factors])


def joint_density(d: ProductDistribution):
    """Product density on the unit cube, ``prod_j g_j(u_j)``.

    The returned callable accepts one point of shape (s,) or a block of
    shape (k, s).
    """
    factors = d.factors

    def density(u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != len(factors):
            raise ArgumentError(f"expected points of dimension {len(factors)}, got {u.shape[-1]}")
        out = np.ones(u.shape[:-1])
        for j, f in enumerate(factors):
            out = out * f.unit_pdf(u[..., j])
        return out if out.ndim else float(out)

    return density


def true_marginal(d: ProductDistribution, j: int):
    """Exact marginal of axis ``j`` (0-based) of :func:`joint_density` on [0, 1]."""
    if not 0 <= j < d.s:
        raise ArgumentError(f"axis {j} out of range for s={d.s}")
    others = math.prod(f.unit_mass() for i, f in enumerate(d.factors) if i != j)
    factor = d.factors[j]

    def marginal(u):
        out = others * factor.unit_pdf(u)
        return out if np.ndim(out) else float(out)

    return marginal


def derivative_bound(factor, n: int) -> float:
    """Supremum of the n-th derivative of an exponential factor's density."""
    if not isinstance(factor, Exponential):
        raise ArgumentError("closed-form derivative bound is available for Exponential factors only")
    return factor.derivative_bound(n)


_FACTORS = {"exponential": Exponential, "beta": Beta, "gamma": Gamma, "mixture": GaussianMixture}


def factor_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("type", None)
    if kind not in _FACTORS:
        raise ArgumentError(f"unknown factor type {kind!r}; expected one of {sorted(_FACTORS)}")
    if kind == "mixture":
        d["components"] = tuple(tuple(c) for c in d.get("components", ()))
    try:
        return _FACTORS[kind](**d)
    except TypeError as exc:
        raise ArgumentError(f"bad parameters for {kind}: {exc}") from None


def _factor_to_dict(f) -> dict:
    name = {v: k for k, v in _FACTORS.items()}[type(f)]
    if isinstance(f, Exponential):
        return {"type": name, "rate": f.rate, "upper": f.upper}
    if isinstance(f, Beta):
        return {"type": name, "a": f.a, "b": f.b}
    if isinstance(f, Gamma):
        return {"type": name, "shape": f.shape, "rate": f.rate, "upper": f.upper}
    return {"type": name, "components": [list(c) for c in f.components], "lower": f.lower, "upper": f.upper}


def distribution_from_dict(d: dict) -> ProductDistribution:
    """Build from ``{"factors": [...]}``, optionally with ``"repeat": k``."""
    factors = [factor_from_dict(f) for f in d.get("factors", [])]
    repeat = int(d.get("repeat", 1))
    return ProductDistribution(tuple(factors * repeat))


def distribution_to_dict(dist: ProductDistribution) -> dict:
    return {"factors": [_factor_to_dict(f) for f in dist.factors]}


def load_distribution(path) -> ProductDistribution:
    """Read a distribution file (JSON) or a preset name prefixed with ``preset:``."""
    path = str(path)
    if path.startswith("preset:"):
        return preset(path.split(":", 1)[1])
    with open(path) as fh:
        return distribution_from_dict(json.load(fh))


#: Gamma presets are cut at mean + GAMMA_PRESET_SD standard deviations.
#: The default box keeps far tails whose near-zero density inflates the
#: variance of the sampled values by orders of magnitude.
GAMMA_PRESET_SD = 3.0


def _gamma_box(shape, rate):
    return Gamma(shape, rate, (shape + GAMMA_PRESET_SD * math.sqrt(shape)) / rate)


def _gamma10():
    shapes = (2, 3, 4, 5, 6, 2.5, 3.5, 4.5, 7, 8)
    rates = (1.0, 1.5, 2.0, 1.0, 2.5, 0.5, 1.0, 1.5, 2.0, 3.0)
    return tuple(_gamma_box(a, b) for a, b in zip(shapes, rates))


def _gamma12():
    return _gamma10() + (_gamma_box(3.0, 0.75), _gamma_box(5.5, 2.0))


#: Distributions used by the reproduction experiments. Parameters of the
#: multi-modal, Beta and Gamma products are our own choices.
PRESETS = {
    "exp2d": lambda: ProductDistribution((Exponential(1.0, 8.0),) * 2),
    "beta4d": lambda: ProductDistribution((Beta(2.0, 5.0),) * 4),
    "multimodal4d": lambda: ProductDistribution(
        (GaussianMixture(((0.5, 0.25, 0.12), (0.5, 0.75, 0.12)), 0.0, 1.0),) * 4
    ),
    "gamma10d": lambda: ProductDistribution(_gamma10()),
    "gamma12d": lambda: ProductDistribution(_gamma12()),
}


def preset(name: str) -> ProductDistribution:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ArgumentError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
