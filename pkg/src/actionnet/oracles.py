"""Ground truth and residual checks for trained solutions.

These are deliberately independent of the training path: closed forms,
brute-force 1D minimization, and Euler-Lagrange residuals whose outer
derivative is taken by finite differences.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .functional import FilmParams, Lagrangian
from .jets import Jet

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ResidualReport:
    points: np.ndarray
    residuals: np.ndarray
    max_abs: float
    mean_abs: float

    @classmethod
    def from_residuals(cls, points, residuals) -> "ResidualReport":
        r = np.asarray(residuals, dtype=float)
        a = np.abs(r)
        return cls(np.asarray(points), r, float(a.max(initial=0.0)), float(a.mean()) if a.size else 0.0)


@dataclass(frozen=True)
class GravityPath:
    """x(t) = x1 + v0 (t - t1) - g (t - t1)^2 / 2; calling it returns a jet."""

    t1: float
    x1: float
    v0: float
    g: float

    def value(self, t):
        s = np.asarray(t, dtype=float) - self.t1
        return self.x1 + self.v0 * s - 0.5 * self.g * s * s

    def velocity(self, t):
        return self.v0 - self.g * (np.asarray(t, dtype=float) - self.t1)

    def __call__(self, t) -> Jet:
        return Jet(self.value(t), (self.velocity(t),))


def gravity_analytic(t1: float, x1: float, t2: float, x2: float, m: float = 1.0, g: float = 10.0) -> GravityPath:
    """The free-fall path through both endpoints (independent of the mass)."""
    if not t2 > t1:
        raise ValueError(f"need t2 > t1, got t1={t1}, t2={t2}")
    if m <= 0:
        raise ValueError("mass must be positive")
    T = t2 - t1
    v0 = ((x2 - x1) + 0.5 * g * T * T) / T
    return GravityPath(t1, x1, v0, g)


def gravity_action(path: GravityPath, t1: float, t2: float, m: float = 1.0) -> float:
    """Exact integral of m v^2/2 - m g x along a free-fall path (polynomial antiderivative)."""
    def F(t):
        s = t - path.t1
        v0, g = path.v0, path.g
        kinetic = 0.5 * m * (v0 * v0 * s - v0 * g * s * s + g * g * s ** 3 / 3.0)
        potential = m * g * (path.x1 * s + 0.5 * v0 * s * s - g * s ** 3 / 6.0)
        return kinetic - potential
    return F(t2) - F(t1)


@dataclass(frozen=True)
class SnellResult:
    y: float  # crossing height on the interface
    theta1: float  # angles from the interface normal, signed by vertical travel direction
    theta2: float
    optical_length: float


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Minimizer of a unimodal ``f`` on ``[lo, hi]``."""
    if not hi > lo:
        if hi == lo:
            return lo
        raise ArithmeticError(f"invalid bracket [{lo}, {hi}]")
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def snell_crossing(n1: float, n2: float, A, B, interface_x: float = 0.0) -> SnellResult:
    """Fastest crossing point of a vertical interface, found by brute 1D search."""
    (ax, ay), (bx, by) = A, B
    if not ax < interface_x < bx:
        raise ValueError("A must lie left of the interface and B right of it")

    def length(y):
        return n1 * math.hypot(interface_x - ax, y - ay) + n2 * math.hypot(bx - interface_x, by - y)

    def slope(y):
        return n1 * (y - ay) / math.hypot(interface_x - ax, y - ay) - n2 * (by - y) / math.hypot(bx - interface_x, by - y)

    lo, hi = min(ay, by), max(ay, by)
    y = golden_section(length, lo, hi)
    # golden section stalls near sqrt(eps) where the length is flat; polish by
    # bisecting on the sign of its derivative inside the remaining bracket
    a, b = max(lo, y - 1e-6), min(hi, y + 1e-6)
    if slope(a) < 0 < slope(b):
        for _ in range(60):
            mid = 0.5 * (a + b)
            if slope(mid) > 0:
                b = mid
            else:
                a = mid
        y = 0.5 * (a + b)
    theta1 = math.atan2(y - ay, interface_x - ax)
    theta2 = math.atan2(by - y, bx - interface_x)
    return SnellResult(y, theta1, theta2, length(y))


@dataclass(frozen=True)
class BrokenLine:
    """Straight segments A -> (x_i, y_i) -> B; calling it returns a jet."""

    A: tuple[float, float]
    joint: tuple[float, float]
    B: tuple[float, float]

    def _slopes(self):
        (ax, ay), (jx, jy), (bx, by) = self.A, self.joint, self.B
        return (jy - ay) / (jx - ax), (by - jy) / (bx - jx)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        s1, s2 = self._slopes()
        jx, jy = self.joint
        return np.where(x <= jx, jy + s1 * (x - jx), jy + s2 * (x - jx))

    def __call__(self, x) -> Jet:
        x = np.asarray(x, dtype=float)
        s1, s2 = self._slopes()
        return Jet(self.value(x), (np.where(x <= self.joint[0], s1, s2) * np.ones_like(x),))


def snell_residual(n1: float, n2: float, Y1: Callable, Y2: Callable, interface_x: float, delta: float = 1e-3):
    """``|n1 sin(theta1) - n2 sin(theta2)|`` from one-sided slopes of the two sides at the interface."""
    def val(Y, x):
        out = Y(np.array([x]))
        return float(np.ravel(out.value if isinstance(out, Jet) else out)[0])

    x0 = interface_x
    s1 = (val(Y1, x0) - val(Y1, x0 - delta)) / delta
    s2 = (val(Y2, x0 + delta) - val(Y2, x0)) / delta
    sin1 = s1 / math.sqrt(1.0 + s1 * s1)
    sin2 = s2 / math.sqrt(1.0 + s2 * s2)
    return abs(n1 * sin1 - n2 * sin2)


def el_residual_1d(L: Lagrangian, path: Callable[[np.ndarray], Jet], points, h: float = 1e-4) -> ResidualReport:
    """Euler-Lagrange residual ``d/dx(dL/dy') - dL/dy`` along ``path``.

    Partials of L come from jets; the outer x-derivative is a central
    difference with step ``h``. Points within ``h`` of a breakpoint of L are
    dropped with a warning.
    """
    x = np.asarray(points, dtype=float).ravel()
    keep = np.ones(x.shape, dtype=bool)
    for bp in L.breakpoints:
        near = np.abs(x - bp) <= h
        if near.any():
            warnings.warn(f"excluding {int(near.sum())} residual point(s) at the interface x={bp}", stacklevel=2)
            keep &= ~near
    x = x[keep]

    def momentum(xs):
        Y = path(xs)
        return L.partials(xs, Y.value, Y.partials)[2][0]

    Y = path(x)
    _, dL_dy, _ = L.partials(x, Y.value, Y.partials)
    r = (momentum(x + h) - momentum(x - h)) / (2.0 * h) - dL_dy
    return ResidualReport.from_residuals(x, np.broadcast_to(r, x.shape))


def disk_grid(n: int = 64) -> np.ndarray:
    """Cell-centred ``n x n`` grid on [-1, 1]^2, keeping points strictly inside the unit disk."""
    c = -1.0 + (np.arange(n) + 0.5) * 2.0 / n
    X, Y = np.meshgrid(c, c, indexing="xy")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts[np.hypot(pts[:, 0], pts[:, 1]) < 1.0]


def film_checks(Z: Callable[[np.ndarray], Jet], params: FilmParams, grid, h: float = 1e-4) -> ResidualReport:
    """Flat-disk error (p = 0) or mean-curvature defect (p != 0) on interior points.

    The defect is ``|2 sigma div(grad Z / sqrt(1 + |grad Z|^2)) + p|``.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, 2)
    if np.any(np.hypot(grid[:, 0], grid[:, 1]) >= 1.0):
        raise ValueError("film checks need grid points strictly inside the unit disk")
    if params.p == 0:
        z = Z(grid)
        return ResidualReport.from_residuals(grid, np.abs(z.value))

    def flux(pts, axis):
        J = Z(pts)
        zx, zy = J.partials
        return (zx, zy)[axis] / np.sqrt(1.0 + zx * zx + zy * zy)

    div = np.zeros(len(grid))
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = h
        div += (flux(grid + e, axis) - flux(grid - e, axis)) / (2.0 * h)
    return ResidualReport.from_residuals(grid, np.abs(2.0 * params.sigma * div + params.p))
