"""Smooth fully-connected networks evaluated on reals or on jets.

Parameter layout (the ``ParamVector``) is fixed so checkpoints are portable:
for each layer in order (hidden layers first, output layer last) the weight
matrix of shape ``(fan_out, fan_in)`` flattened row-major, followed by that
layer's bias vector.

Inputs are mapped affinely from ``[lo, hi]`` to ``[-1, 1]`` per axis before the
first layer; partials returned by :func:`forward_jet` are with respect to the
physical (unmapped) inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .jets import Jet, JetEvaluationError, partials_of, seed_input, value_of


@dataclass(frozen=True)
class Activation:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray, np.ndarray], np.ndarray]  # (z, f(z)) -> f'(z)
    d2f: Callable[[np.ndarray, np.ndarray], np.ndarray]  # (z, f(z)) -> f''(z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


ACTIVATIONS = {
    "tanh": Activation("tanh", np.tanh, lambda z, a: 1.0 - a * a, lambda z, a: -2.0 * a * (1.0 - a * a)),
    "sin": Activation("sin", np.sin, lambda z, a: np.cos(z), lambda z, a: -a),
    "sigmoid": Activation(
        "sigmoid", _sigmoid, lambda z, a: a * (1.0 - a), lambda z, a: a * (1.0 - a) * (1.0 - 2.0 * a)
    ),
    "softplus": Activation("softplus", lambda z: np.logaddexp(0.0, z), lambda z, a: _sigmoid(z),
                           lambda z, a: _sigmoid(z) * (1.0 - _sigmoid(z))),
    "linear": Activation("linear", lambda z: z, lambda z, a: np.ones_like(z), lambda z, a: np.zeros_like(z)),
}


@dataclass(frozen=True)
class NetworkSpec:
    """Architecture of one MLP.

    ``layer_widths`` lists the hidden layers; the output layer (width
    ``output_dim``) is always linear.
    """

    input_dim: int = 1
    layer_widths: tuple[int, ...] = (32, 32, 32)
    output_dim: int = 1
    activation: str = "tanh"
    init_seed: int = 0
    lo: tuple[float, ...] = field(default=None)  # type: ignore[assignment]
    hi: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.input_dim not in (1, 2):
            raise ValueError(f"input_dim must be 1 or 2, got {self.input_dim}")
        widths = tuple(int(w) for w in self.layer_widths)
        if not widths or min(widths) < 1:
            raise ValueError(f"layer_widths must be non-empty positive integers, got {self.layer_widths}")
        object.__setattr__(self, "layer_widths", widths)
        if self.output_dim < 1:
            raise ValueError("output_dim must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unsupported activation {self.activation!r}; choose from {sorted(ACTIVATIONS)}")
        lo = (-1.0,) * self.input_dim if self.lo is None else tuple(float(v) for v in self.lo)
        hi = (1.0,) * self.input_dim if self.hi is None else tuple(float(v) for v in self.hi)
        if len(lo) != self.input_dim or len(hi) != self.input_dim:
            raise ValueError("lo/hi must have one entry per input axis")
        if any(b <= a for a, b in zip(lo, hi)):
            raise ValueError(f"need lo < hi on every axis, got lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shapes(self) -> list[tuple[int, int]]:
        sizes = (self.input_dim, *self.layer_widths, self.output_dim)
        return [(fan_out, fan_in) for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]

    @property
    def n_params(self) -> int:
        return sum(o * i + o for o, i in self.shapes)

    @property
    def scale(self) -> np.ndarray:
        return 2.0 / (np.asarray(self.hi) - np.asarray(self.lo))


def unpack(spec: NetworkSpec, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got shape {params.shape}")
    layers, k = [], 0
    for o, i in spec.shapes:
        W = params[k:k + o * i].reshape(o, i)
        k += o * i
        b = params[k:k + o]
        k += o
        layers.append((W, b))
    return layers


def pack(layers: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])


def init_params(spec: NetworkSpec) -> np.ndarray:
    """Weights ~ N(0, 1/fan_in), biases zero; fully determined by ``spec.init_seed``."""
    rng = np.random.default_rng(spec.init_seed)
    layers = [
        (rng.normal(0.0, np.sqrt(1.0 / i), size=(o, i)), np.zeros(o))
        for o, i in spec.shapes
    ]
    return pack(layers)


def _as_points(spec: NetworkSpec, x) -> tuple[np.ndarray, bool]:
    """Coerce to shape (N, input_dim); second value is True for a single point."""
    arr = np.asarray(x, dtype=float)
    d = spec.input_dim
    if arr.ndim == 0:
        if d != 1:
            raise ValueError(f"network expects {d}-dimensional points, got a scalar")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] == d:
            return arr.reshape(1, d), True
        raise ValueError(f"network expects {d}-dimensional points, got shape {arr.shape}")
    if arr.ndim == 2 and arr.shape[1] == d:
        return arr, False
    raise ValueError(f"network expects points of dimension {d}, got shape {arr.shape}")


def _shape_out(spec: NetworkSpec, y: np.ndarray, single: bool):
    if spec.output_dim == 1:
        y = y[:, 0]
    return y[0] if single else y


def _forward(spec, layers, pts, with_tangents):
    act = ACTIVATIONS[spec.activation]
    scale = spec.scale
    a = (pts - np.asarray(spec.lo)) * scale - 1.0
    tangents = None
    if with_tangents:
        n = pts.shape[0]
        tangents = []
        for k in range(spec.input_dim):
            t = np.zeros((n, spec.input_dim))
            t[:, k] = scale[k]
            tangents.append(t)
    cache = []
    for W, b in layers[:-1]:
        z = a @ W.T + b
        tz = [t @ W.T for t in tangents] if with_tangents else None
        a_next = act.f(z)
        cache.append((a, tangents, z, tz, a_next))
        a = a_next
        if with_tangents:
            d = act.df(z, a)
            tangents = [d * t for t in tz]
    W, b = layers[-1]
    y = a @ W.T + b
    ty = [t @ W.T for t in tangents] if with_tangents else None
    cache.append((a, tangents, None, None, None))
    return y, ty, cache


def forward(spec: NetworkSpec, params: np.ndarray, x):
    """Network output at one point (returns a float) or a batch (returns an array)."""
    pts, single = _as_points(spec, x)
    y, _, _ = _forward(spec, unpack(spec, params), pts, False)
    return _shape_out(spec, y, single)


def forward_jet(spec: NetworkSpec, params: np.ndarray, x) -> Jet:
    """Output value together with its partials along each input axis."""
    pts, single = _as_points(spec, x)
    y, ty, _ = _forward(spec, unpack(spec, params), pts, True)
    return Jet(_shape_out(spec, y, single), [_shape_out(spec, t, single) for t in ty])


def _backward(spec, layers, cache, g_y, g_ty):
    """Reverse pass through the value+tangent forward pass.

    ``g_y`` and ``g_ty[k]`` are cotangents of the outputs and of their
    input-axis partials, each of shape (N, output_dim).
    """
    act = ACTIVATIONS[spec.activation]
    grads = []
    a, tangents, _, _, _ = cache[-1]
    W, _ = layers[-1]
    gW = g_y.T @ a + sum(g.T @ t for g, t in zip(g_ty, tangents))
    grads.append((gW, g_y.sum(axis=0)))
    g_a = g_y @ W
    g_t = [g @ W for g in g_ty]
    for (W, _), (a_prev, t_prev, z, tz, a) in zip(reversed(layers[:-1]), reversed(cache[:-1])):
        d1 = act.df(z, a)
        d2 = act.d2f(z, a)
        g_z = g_a * d1
        for g, t in zip(g_t, tz):
            g_z = g_z + g * d2 * t
        g_tz = [g * d1 for g in g_t]
        gW = g_z.T @ a_prev + sum(g.T @ t for g, t in zip(g_tz, t_prev))
        grads.append((gW, g_z.sum(axis=0)))
        g_a = g_z @ W
        g_t = [g @ W for g in g_tz]
    return pack(list(reversed(grads)))


# pointwise(x, y, dy) -> per-point contributions; y and dy entries may be jets
Pointwise = Callable[[np.ndarray, object, tuple], object]


class ObjectiveEvaluationError(ArithmeticError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


def grad_params(
    spec: NetworkSpec,
    params: np.ndarray,
    groups: Sequence[tuple[np.ndarray, Pointwise]],
) -> tuple[float, np.ndarray]:
    """Value and exact parameter gradient of a sum of pointwise terms.

    The objective is ``sum over (points, fn) in groups of sum_i fn(x_i, Y(x_i),
    grad Y(x_i))``. Each ``fn`` must be written with the operations of
    :mod:`actionnet.jets` so that its sensitivities to ``Y`` and ``grad Y`` can
    be read off by seeding jets; those sensitivities are then pulled back to the
    parameters through the network.
    """
    if spec.output_dim != 1:
        raise ValueError("grad_params supports scalar-output networks only")
    layers = unpack(spec, params)
    d = spec.input_dim
    total = 0.0
    grad = np.zeros(spec.n_params)
    for points, fn in groups:
        pts, _ = _as_points(spec, points)
        if pts.shape[0] == 0:
            continue
        y, ty, cache = _forward(spec, layers, pts, True)
        y0, dys = y[:, 0], [t[:, 0] for t in ty]
        arity = 1 + d
        ys = seed_input(y0, 0, arity)
        dyj = tuple(seed_input(t, k + 1, arity) for k, t in enumerate(dys))
        xs = pts[:, 0] if d == 1 else pts
        try:
            out = fn(xs, ys, dyj)
        except JetEvaluationError as exc:
            point = pts[exc.index] if exc.index is not None and exc.index < len(pts) else None
            raise ObjectiveEvaluationError(f"objective evaluation failed at point {point}: {exc}", point) from exc
        val = np.broadcast_to(value_of(out), y0.shape)
        total += float(np.sum(val))
        sens = [np.broadcast_to(s, y0.shape) for s in partials_of(out, arity)]
        if not any(np.any(s) for s in sens):
            continue
        g_y = sens[0].reshape(-1, 1)
        g_ty = [s.reshape(-1, 1) for s in sens[1:]]
        grad += _backward(spec, layers, cache, g_y, g_ty)
    return total, grad


@dataclass(frozen=True)
class BoundNetwork:
    """A network spec paired with parameters; callable on points, returning a :class:`Jet`."""

    spec: NetworkSpec
    params: np.ndarray

    def __call__(self, x) -> Jet:
        return forward_jet(self.spec, self.params, x)

    def value(self, x):
        return forward(self.spec, self.params, x)


# -- checkpoints ------------------------------------------------------------

_MAGIC = "actionnet-checkpoint 1"


def save_checkpoint(path, spec: NetworkSpec, params: np.ndarray) -> None:
    """Text dump: header, spec fields, then one hex float per parameter."""
    params = np.asarray(params, dtype=float)
    lines = [
        _MAGIC,
        f"input_dim={spec.input_dim}",
        f"layer_widths={','.join(map(str, spec.layer_widths))}",
        f"output_dim={spec.output_dim}",
        f"activation={spec.activation}",
        f"init_seed={spec.init_seed}",
        f"lo={','.join(float(v).hex() for v in spec.lo)}",
        f"hi={','.join(float(v).hex() for v in spec.hi)}",
        f"n_params={params.size}",
    ]
    lines += [float(v).hex() for v in params]
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[NetworkSpec, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: not an actionnet checkpoint")
    header = dict(line.split("=", 1) for line in lines[1:9])
    spec = NetworkSpec(
        input_dim=int(header["input_dim"]),
        layer_widths=tuple(int(w) for w in header["layer_widths"].split(",")),
        output_dim=int(header["output_dim"]),
        activation=header["activation"],
        init_seed=int(header["init_seed"]),
        lo=tuple(float.fromhex(v) for v in header["lo"].split(",")),
        hi=tuple(float.fromhex(v) for v in header["hi"].split(",")),
    )
    n = int(header["n_params"])
    params = np.array([float.fromhex(v) for v in lines[9:9 + n]])
    if params.size != spec.n_params:
        raise ValueError(f"{path}: parameter count {params.size} does not match spec ({spec.n_params})")
    return spec, params
