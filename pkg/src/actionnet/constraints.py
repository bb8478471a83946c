"""Force (Lagrange multiplier) terms that pin boundary and interface conditions.

Every term has the bilinear form ``force * violation``. The path networks
descend on it and the force model ascends on it, so an equilibrium can only
be reached once the violations vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .jets import Jet
from .network import BoundNetwork, NetworkSpec


@dataclass(frozen=True)
class PointConstraint:
    """``Y_path(location) = target`` on path network number ``path``."""

    location: float | tuple[float, ...]
    target: float
    path: int = 0


@dataclass(frozen=True)
class InterfaceJoint:
    """Continuity ``Y1(location) = Y2(location)`` enforced by one shared force."""

    location: float


def _zero_target(theta):
    return np.zeros_like(theta)


@dataclass(frozen=True)
class CircleBoundary:
    """The unit circle as a continuous boundary, with a force network over the angle.

    Angles ``theta_j = 2*pi*(j + 1/2)/M``; the force network maps
    ``[0, 2*pi]`` onto its normalized input range.
    """

    n_angles: int = 64
    force_spec: NetworkSpec = field(
        default_factory=lambda: NetworkSpec(1, (16, 16), lo=(0.0,), hi=(2.0 * np.pi,), init_seed=1)
    )
    target: Callable[[np.ndarray], np.ndarray] = _zero_target

    def __post_init__(self):
        if self.n_angles < 3:
            raise ValueError(f"need at least 3 boundary angles, got {self.n_angles}")
        if self.force_spec.input_dim != 1:
            raise ValueError("boundary force network must take the angle as its single input")

    def angles(self) -> np.ndarray:
        return boundary_angles(self.n_angles)

    def points(self) -> np.ndarray:
        th = self.angles()
        return np.column_stack([np.cos(th), np.sin(th)])


def boundary_angles(m: int) -> np.ndarray:
    return 2.0 * np.pi * (np.arange(m) + 0.5) / m


def _value(path, x):
    x = np.asarray(x, dtype=float)
    y = path(x.reshape(1) if x.ndim == 0 else x.reshape(1, -1))
    v = y.value if isinstance(y, Jet) else y
    return float(np.ravel(v)[0])


def violations(paths: Sequence[Callable] | Callable, constraints: Sequence[PointConstraint]) -> np.ndarray:
    if callable(paths):
        paths = [paths]
    return np.array([_value(paths[c.path], c.location) - c.target for c in constraints])


def constraint_term(forces, paths, constraints: Sequence[PointConstraint]) -> float:
    """``sum_i F_i * (Y(loc_i) - target_i)`` with one scalar force per constraint."""
    forces = np.atleast_1d(np.asarray(forces, dtype=float))
    if forces.shape != (len(constraints),):
        raise ValueError(f"{len(constraints)} constraints but {forces.size} force values")
    return float(np.dot(forces, violations(paths, constraints)))


def interface_gap(joint: InterfaceJoint, Y1: Callable, Y2: Callable) -> float:
    return _value(Y1, joint.location) - _value(Y2, joint.location)


def interface_term(joint: InterfaceJoint, force: float, Y1: Callable, Y2: Callable) -> float:
    """``F * (Y1(x1) - Y2(x1))``; the same signed term enters both path objectives."""
    return float(force) * interface_gap(joint, Y1, Y2)


def boundary_violation(boundary: CircleBoundary, Y: Callable) -> np.ndarray:
    z = Y(boundary.points())
    z = z.value if isinstance(z, Jet) else z
    return np.asarray(z) - boundary.target(boundary.angles())


def boundary_term_continuous(F: BoundNetwork | Callable, Y: Callable, boundary: CircleBoundary) -> float:
    """``(2*pi/M) sum_j F(theta_j) * (Y(cos theta_j, sin theta_j) - target(theta_j))``."""
    th = boundary.angles()
    f = F(th)
    f = f.value if isinstance(f, Jet) else np.broadcast_to(f, th.shape)
    return float(2.0 * np.pi / boundary.n_angles * np.sum(f * boundary_violation(boundary, Y)))
