"""Lagrangians of the demo systems and the sampled action estimate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .jets import Jet, seed_input, value_of, partials_of


@dataclass(frozen=True)
class Lagrangian:
    """``fn(x, y, dy)`` with ``dy`` the tuple of first derivatives of the path.

    ``x`` is an array of shape (N,) in 1D or (N, 2) in 2D. ``fn`` must use only
    jet-compatible operations so the same callable evaluates on floats, arrays
    and jets. ``breakpoints`` lists x-coordinates where ``fn`` jumps in x.
    """

    fn: Callable
    input_dim: int = 1
    name: str = "lagrangian"
    breakpoints: tuple[float, ...] = ()

    def __call__(self, x, y, dy):
        return self.fn(x, y, dy)

    def partials(self, x, y, dy):
        """``(L, dL/dy, (dL/d(dy_0), ...))`` at plain (non-jet) arguments."""
        arity = 1 + len(dy)
        ys = seed_input(y, 0, arity)
        dys = tuple(seed_input(d, k + 1, arity) for k, d in enumerate(dy))
        out = self.fn(x, ys, dys)
        p = partials_of(out, arity)
        return value_of(out), p[0], tuple(p[1:])

    def scaled(self, alpha: float) -> "Lagrangian":
        fn = self.fn
        return Lagrangian(lambda x, y, dy: alpha * fn(x, y, dy), self.input_dim,
                          f"{alpha}*{self.name}", self.breakpoints)


@dataclass(frozen=True)
class GravityParams:
    m: float = 1.0
    g: float = 10.0

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")


@dataclass(frozen=True)
class OpticsParams:
    n1: float = 1.0
    n2: float = 1.5
    c: float = 1.0
    interface_x: float = 0.0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError(f"refractive indices must be >= 1, got {self.n1}, {self.n2}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")

    def index(self, x):
        """Piecewise refractive index; the left value is used on the interface itself."""
        return np.where(np.asarray(x) <= self.interface_x, self.n1, self.n2)


@dataclass(frozen=True)
class FilmParams:
    sigma: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def lagrangian_gravity(params: GravityParams) -> Lagrangian:
    m, g = params.m, params.g

    def fn(t, x, dx):
        return 0.5 * m * jets.square(dx[0]) - m * g * x

    return Lagrangian(fn, 1, "gravity")


def lagrangian_optics(params: OpticsParams) -> Lagrangian:
    def fn(x, y, dy):
        n_over_c = params.index(x) / params.c
        return jets.sqrt(1.0 + jets.square(dy[0])) * n_over_c

    return Lagrangian(fn, 1, "optics", (params.interface_x,))


def lagrangian_film(params: FilmParams) -> Lagrangian:
    two_sigma, p = 2.0 * params.sigma, params.p

    def fn(xy, z, dz):
        return two_sigma * jets.sqrt(1.0 + jets.square(dz[0]) + jets.square(dz[1])) - p * z

    return Lagrangian(fn, 2, "film")


def constant_lagrangian(c: float, input_dim: int = 1) -> Lagrangian:
    return Lagrangian(lambda x, y, dy: c + 0.0 * y, input_dim, f"const{c}")


# -- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """An interval ``(a, b)`` or the unit disk, plus the sampling rule.

    ``sampling`` is ``"midpoint"`` (fixed grid), ``"stratified"`` (one uniform
    draw inside each midpoint cell; intervals only) or ``"uniform"`` (i.i.d.
    draws). The disk is always sampled uniformly by area.
    """

    kind: str = "interval"
    a: float = 0.0
    b: float = 1.0
    n: int = 64
    sampling: str = "midpoint"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("interval", "disk"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "interval" and not self.a < self.b:
            raise ValueError(f"interval needs a < b, got ({self.a}, {self.b})")
        if self.n < 2:
            raise ValueError(f"need at least 2 samples, got {self.n}")
        if self.sampling not in ("midpoint", "stratified", "uniform"):
            raise ValueError(f"unknown sampling {self.sampling!r}")

    @property
    def dim(self) -> int:
        return 2 if self.kind == "disk" else 1

    @property
    def measure(self) -> float:
        return np.pi if self.kind == "disk" else self.b - self.a


@dataclass(frozen=True)
class Samples:
    points: np.ndarray  # (N,) for intervals, (N, 2) for the disk
    weights: np.ndarray = field(repr=False)


def sample_domain(domain: Domain, rng: np.random.Generator | None = None) -> Samples:
    """Quadrature nodes and equal weights (measure / N).

    Random draws come from ``rng`` if given, else from ``domain.seed``.
    """
    n = domain.n
    w = np.full(n, domain.measure / n)
    if domain.kind == "interval" and domain.sampling == "midpoint":
        h = (domain.b - domain.a) / n
        return Samples(domain.a + h * (np.arange(n) + 0.5), w)
    rng = rng if rng is not None else np.random.default_rng(domain.seed)
    if domain.kind == "interval" and domain.sampling == "stratified":
        h = (domain.b - domain.a) / n
        return Samples(domain.a + h * (np.arange(n) + rng.uniform(0.0, 1.0, n)), w)
    if domain.kind == "interval":
        return Samples(rng.uniform(domain.a, domain.b, n), w)
    r = np.sqrt(rng.uniform(0.0, 1.0, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return Samples(np.column_stack([r * np.cos(theta), r * np.sin(theta)]), w)


def action_estimate(L: Lagrangian, path: Callable[[np.ndarray], Jet], samples: Samples) -> float:
    """Weighted sum of the Lagrangian along ``path`` at the sample points.

    ``path`` maps points to a jet holding the value and input partials, e.g. a
    :class:`~actionnet.network.BoundNetwork` or an analytic path from
    :mod:`actionnet.oracles`.
    """
    Y = path(samples.points)
    vals = value_of(L(samples.points, Y.value, Y.partials))
    return float(np.sum(samples.weights * np.broadcast_to(vals, samples.weights.shape)))
