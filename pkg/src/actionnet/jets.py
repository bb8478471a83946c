"""First-order forward-mode numbers ("jets").

A :class:`Jet` carries a value and its partial derivatives with respect to a
fixed number of seed directions. Values and partials may be Python floats or
numpy arrays, in which case every operation is applied elementwise; this is
how a whole batch of sample points is pushed through a Lagrangian at once.

The module-level functions (:func:`tanh`, :func:`sqrt`, ...) accept jets and
plain numbers alike, so a Lagrangian written with them can be evaluated on
floats, on arrays, or on jets without change.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

Real = Union[float, np.ndarray]


class JetEvaluationError(ArithmeticError):
    """Raised when a jet operation leaves its domain (division by zero,
    square root of a non-positive number).

    ``value`` holds the offending operand; for array operands ``index`` is
    the flat index of the first bad element.
    """

    def __init__(self, message: str, value, index: int | None = None):
        super().__init__(message)
        self.value = value
        self.index = index


class Jet:
    __slots__ = ("value", "partials")
    # make ndarray <op> Jet defer to the Jet's reflected method
    __array_ufunc__ = None

    def __init__(self, value: Real, partials: Sequence[Real]):
        self.value = value
        self.partials = tuple(partials)

    @property
    def arity(self) -> int:
        return len(self.partials)

    @property
    def d_dx(self) -> Real:
        return self.partials[0]

    @property
    def d_dy(self) -> Real:
        return self.partials[1]

    def __repr__(self) -> str:
        return f"Jet({self.value!r}, {self.partials!r})"

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.arity != self.arity:
                raise ValueError(f"jet arity mismatch: {self.arity} vs {other.arity}")
            return other
        return Jet(other, (0.0,) * self.arity)

    def __add__(self, other) -> "Jet":
        o = self._coerce(other)
        return Jet(self.value + o.value, [p + q for p, q in zip(self.partials, o.partials)])

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        o = self._coerce(other)
        return Jet(self.value - o.value, [p - q for p, q in zip(self.partials, o.partials)])

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __neg__(self) -> "Jet":
        return Jet(-self.value, [-p for p in self.partials])

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.value * other, [p * other for p in self.partials])
        o = self._coerce(other)
        return Jet(
            self.value * o.value,
            [p * o.value + self.value * q for p, q in zip(self.partials, o.partials)],
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        o = self._coerce(other)
        _check(o.value, lambda v: v == 0, "division by zero")
        inv = 1.0 / o.value
        q = self.value * inv
        return Jet(q, [(p - q * r) * inv for p, r in zip(self.partials, o.partials)])

    def __rtruediv__(self, other) -> "Jet":
        return self._coerce(other) / self


def _check(value, bad, what: str) -> None:
    mask = np.asarray(bad(np.asarray(value)))
    if mask.any():
        if mask.ndim == 0:
            raise JetEvaluationError(f"{what} at input {value!r}", value)
        idx = int(np.flatnonzero(mask)[0])
        offending = np.asarray(value).flat[idx]
        raise JetEvaluationError(f"{what} at input {offending!r} (element {idx})", offending, idx)


def lift_const(c: Real, arity: int = 1) -> Jet:
    return Jet(c, (0.0,) * arity)


def seed_input(x: Real, which: int = 0, arity: int = 1) -> Jet:
    """Jet for an independent variable: d/d(axis ``which``) = 1, others 0."""
    if not 0 <= which < arity:
        raise ValueError(f"axis {which} out of range for a jet of arity {arity}")
    ones = np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else 1.0
    return Jet(x, [ones if k == which else 0.0 for k in range(arity)])


def Jet1(value: Real, d_dx: Real = 0.0) -> Jet:
    return Jet(value, (d_dx,))


def Jet2(value: Real, d_dx: Real = 0.0, d_dy: Real = 0.0) -> Jet:
    return Jet(value, (d_dx, d_dy))


def tanh(a):
    if isinstance(a, Jet):
        t = np.tanh(a.value)
        d = 1.0 - t * t
        return Jet(t, [d * p for p in a.partials])
    return np.tanh(a)


def exp(a):
    if isinstance(a, Jet):
        e = np.exp(a.value)
        return Jet(e, [e * p for p in a.partials])
    return np.exp(a)


def sqrt(a):
    v = a.value if isinstance(a, Jet) else a
    _check(v, lambda u: u <= 0 if isinstance(a, Jet) else u < 0, "sqrt of non-positive value")
    if isinstance(a, Jet):
        s = np.sqrt(a.value)
        half_inv = 0.5 / s
        return Jet(s, [half_inv * p for p in a.partials])
    return np.sqrt(a)


def square(a):
    if isinstance(a, Jet):
        two_v = 2.0 * a.value
        return Jet(a.value * a.value, [two_v * p for p in a.partials])
    return a * a


def value_of(a) -> Real:
    return a.value if isinstance(a, Jet) else a


def partials_of(a, arity: int) -> tuple:
    """Partials of ``a``; plain numbers are constants (all partials zero)."""
    if isinstance(a, Jet):
        return a.partials
    return (0.0,) * arity
