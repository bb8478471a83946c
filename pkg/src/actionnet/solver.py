"""Minimax training: descend the path networks, ascend the forces.

Per step, with all gradients taken at the current parameters:

* every path network takes a descent step on its action estimate plus the
  force terms that involve it (plus an optional quadratic penalty);
* the scalar forces and the boundary force network take an ascent step on
  the force terms alone;
* both learning rates are multiplied by the dampening factor every
  ``damp_every`` steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import CircleBoundary, InterfaceJoint, PointConstraint
from .functional import Domain, Lagrangian, Samples, action_estimate, sample_domain
from .network import BoundNetwork, NetworkSpec, forward, grad_params, init_params

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e8


class DivergenceError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class PathModel:
    spec: NetworkSpec
    lagrangian: Lagrangian
    domain: Domain

    def __post_init__(self):
        if self.spec.input_dim != self.domain.dim or self.lagrangian.input_dim != self.domain.dim:
            raise ValueError("network, Lagrangian and domain dimensions disagree")


@dataclass(frozen=True)
class Problem:
    """One path network (single-network problem) or two joined at an interface."""

    paths: tuple[PathModel, ...]
    constraints: tuple[PointConstraint, ...] = ()
    joint: InterfaceJoint | None = None
    boundary: CircleBoundary | None = None

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not 1 <= len(self.paths) <= 2:
            raise ValueError("a problem has one or two path networks")
        if (self.joint is not None) != (len(self.paths) == 2):
            raise ValueError("jointed problems need exactly two path networks and one joint")
        for c in self.constraints:
            if not 0 <= c.path < len(self.paths):
                raise ValueError(f"constraint refers to missing path network {c.path}")
        if self.boundary is not None and self.paths[0].spec.input_dim != 2:
            raise ValueError("a circular boundary needs a 2D path network")

    @property
    def n_forces(self) -> int:
        return len(self.constraints) + (self.joint is not None)


@dataclass
class State:
    paths: list[np.ndarray]
    forces: np.ndarray  # one per point constraint, then the joint force
    force_net: np.ndarray | None = None

    @classmethod
    def initial(cls, problem: Problem) -> "State":
        fn = init_params(problem.boundary.force_spec) if problem.boundary is not None else None
        return cls([init_params(p.spec) for p in problem.paths], np.zeros(problem.n_forces), fn)

    def copy(self) -> "State":
        return State([p.copy() for p in self.paths], self.forces.copy(),
                     None if self.force_net is None else self.force_net.copy())

    def networks(self, problem: Problem) -> list[BoundNetwork]:
        return [BoundNetwork(m.spec, p) for m, p in zip(problem.paths, self.paths)]


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 5000
    lr_path: float = 1e-3
    lr_force: float = 1e-2
    damp_factor: float = 0.999
    damp_every: int = 10
    n_samples: int | None = None  # overrides every domain's sample count when set
    resample: bool = False
    seed: int = 0
    tol_violation: float = 1e-3
    tol_action: float = 1e-4
    stabilizer_rho: float = 0.0
    optimizer: str = "sgd"  # or "adam"
    force_optimizer: str | None = None  # defaults to ``optimizer``

    def __post_init__(self):
        for name in ("lr_path", "lr_force", "tol_violation", "tol_action"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.damp_factor <= 1:
            raise ValueError(f"damp_factor must be in (0, 1], got {self.damp_factor}")
        if self.damp_every < 1 or self.steps < 1:
            raise ValueError("steps and damp_every must be positive")
        if self.stabilizer_rho < 0:
            raise ValueError("stabilizer_rho must be >= 0")
        for name in ("optimizer", "force_optimizer"):
            v = getattr(self, name)
            if v is not None and v not in ("sgd", "adam"):
                raise ValueError(f"{name} must be 'sgd' or 'adam', got {v!r}")


@dataclass
class History:
    step: list[int] = field(default_factory=list)
    action: list[float] = field(default_factory=list)
    max_violation: list[float] = field(default_factory=list)
    lr_path: list[float] = field(default_factory=list)
    lr_force: list[float] = field(default_factory=list)
    forces: list[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.step)

    def append(self, step, action, max_violation, lr_path, lr_force, forces):
        self.step.append(step)
        self.action.append(action)
        self.max_violation.append(max_violation)
        self.lr_path.append(lr_path)
        self.lr_force.append(lr_force)
        self.forces.append(np.asarray(forces, dtype=float))


@dataclass
class Solution:
    problem: Problem
    state: State
    history: History
    converged: bool
    action: float
    violations: np.ndarray

    @property
    def max_violation(self) -> float:
        return float(np.max(np.abs(self.violations))) if self.violations.size else 0.0

    def networks(self) -> list[BoundNetwork]:
        return self.state.networks(self.problem)

    def force_network(self) -> BoundNetwork | None:
        if self.problem.boundary is None:
            return None
        return BoundNetwork(self.problem.boundary.force_spec, self.state.force_net)


# -- objectives -----------------------------------------------------------

def default_samples(problem: Problem) -> list[Samples]:
    return [sample_domain(m.domain) for m in problem.paths]


def _constraint_data(problem: Problem, state: State):
    """Violations of every constraint at the current state.

    Returns ``(point_viol, gap, boundary_viol, boundary_force)``.
    """
    point_viol = np.zeros(len(problem.constraints))
    for k, (model, params) in enumerate(zip(problem.paths, state.paths)):
        idx = [i for i, c in enumerate(problem.constraints) if c.path == k]
        if idx:
            locs = np.array([problem.constraints[i].location for i in idx], dtype=float)
            targets = np.array([problem.constraints[i].target for i in idx])
            point_viol[idx] = forward(model.spec, params, locs) - targets
    gap = None
    if problem.joint is not None:
        x1 = problem.joint.location
        gap = (forward(problem.paths[0].spec, state.paths[0], x1)
               - forward(problem.paths[1].spec, state.paths[1], x1))
    b_viol = b_force = None
    if problem.boundary is not None:
        b = problem.boundary
        b_viol = forward(problem.paths[0].spec, state.paths[0], b.points()) - b.target(b.angles())
        b_force = forward(b.force_spec, state.force_net, b.angles())
    return point_viol, gap, b_viol, b_force


def all_violations(problem: Problem, state: State, data=None) -> np.ndarray:
    pv, gap, bv, _ = _constraint_data(problem, state) if data is None else data
    parts = [pv]
    if gap is not None:
        parts.append([gap])
    if bv is not None:
        parts.append(bv)
    return np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])


def _constraint_groups(problem: Problem, state: State, k: int, rho: float, data):
    """Pointwise force (+ penalty) terms that involve path network ``k``."""
    point_viol, gap, _, b_force = data
    groups = []
    idx = [i for i, c in enumerate(problem.constraints) if c.path == k]
    if idx:
        locs = np.array([problem.constraints[i].location for i in idx], dtype=float)
        targets = np.array([problem.constraints[i].target for i in idx])
        F = state.forces[idx]

        def point_fn(x, y, dy, F=F, targets=targets):
            v = y - targets
            return v * F + rho * v * v
        groups.append((locs, point_fn))
    if problem.joint is not None:
        x1 = problem.joint.location
        Fj = state.forces[-1]
        other = state.paths[1 - k]
        other_y = forward(problem.paths[1 - k].spec, other, x1)
        sign = 1.0 if k == 0 else -1.0

        def joint_fn(x, y, dy):
            g = (y - other_y) * sign
            return g * Fj + rho * g * g
        groups.append((np.array([x1]), joint_fn))
    if problem.boundary is not None and k == 0:
        b = problem.boundary
        w = 2.0 * np.pi / b.n_angles
        tgt = b.target(b.angles())

        def boundary_fn(x, y, dy):
            v = y - tgt
            return (v * b_force + rho * v * v) * w
        groups.append((b.points(), boundary_fn))
    return groups


def _interior_group(model: PathModel, samples: Samples):
    L, w = model.lagrangian, samples.weights

    def fn(x, y, dy):
        return L(x, y, dy) * w
    return (samples.points, fn)


def path_gradients(problem: Problem, state: State, samples, rho: float = 0.0, data=None):
    """Returns ``(action, objective_value, grads)``; one gradient per path network.

    ``objective_value`` counts the joint term once, which makes its partial
    gradients coincide with those of each network's own objective.
    """
    data = _constraint_data(problem, state) if data is None else data
    action, total, grads = 0.0, 0.0, []
    for k, (model, params) in enumerate(zip(problem.paths, state.paths)):
        a, g = grad_params(model.spec, params, [_interior_group(model, samples[k])])
        c, gc = grad_params(model.spec, params, _constraint_groups(problem, state, k, rho, data))
        action += a
        total += a + c
        grads.append(g + gc)
    if problem.joint is not None:
        _, gap, _, _ = data
        total -= state.forces[-1] * gap + rho * gap * gap
    return action, total, grads


def force_gradients(problem: Problem, state: State, data=None):
    """``(objective_force, d/d scalar forces, d/d force-network params)``."""
    point_viol, gap, b_viol, b_force = _constraint_data(problem, state) if data is None else data
    g_scalar = point_viol.astype(float)
    if gap is not None:
        g_scalar = np.append(g_scalar, gap)
    value = float(np.dot(state.forces, g_scalar))
    g_net = None
    if problem.boundary is not None:
        b = problem.boundary
        w = 2.0 * np.pi / b.n_angles

        def fn(th, f, df):
            return f * (b_viol * w)
        v, g_net = grad_params(b.force_spec, state.force_net, [(b.angles(), fn)])
        value += v
    return value, g_scalar, g_net


def objective_path(problem: Problem, state: State, samples=None, rho: float = 0.0) -> float:
    """Actions plus every force term (joint term once) plus the optional penalty."""
    samples = default_samples(problem) if samples is None else samples
    return path_gradients(problem, state, samples, rho)[1]


def path_objectives(problem: Problem, state: State, samples=None, rho: float = 0.0) -> list[float]:
    """Each path network's own objective; for a joined pair both include the joint term."""
    samples = default_samples(problem) if samples is None else samples
    data = _constraint_data(problem, state)
    out = []
    for k, (model, params) in enumerate(zip(problem.paths, state.paths)):
        a, _ = grad_params(model.spec, params, [_interior_group(model, samples[k])])
        c, _ = grad_params(model.spec, params, _constraint_groups(problem, state, k, rho, data))
        out.append(a + c)
    return out


def objective_force(problem: Problem, state: State) -> float:
    return force_gradients(problem, state)[0]


# -- optimizer ------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


BETA1, BETA2, EPS = 0.9, 0.999, 1e-8


def optimizer_update(params, grad, lr, direction="descend", state=None, kind="sgd"):
    """One step; returns ``(new_params, new_state)``. ``direction`` is 'descend' or 'ascend'."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape:
        raise ValueError(f"parameter shape {params.shape} does not match gradient shape {grad.shape}")
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise FloatingPointError(f"non-finite gradient component at index {bad}")
    sign = {"descend": -1.0, "ascend": 1.0}[direction]
    if kind == "sgd":
        return params + sign * lr * grad, state
    if kind != "adam":
        raise ValueError(f"unknown optimizer {kind!r}")
    if state is None:
        state = AdamState(np.zeros_like(params), np.zeros_like(params))
    t = state.t + 1
    m = BETA1 * state.m + (1 - BETA1) * grad
    v = BETA2 * state.v + (1 - BETA2) * grad * grad
    m_hat = m / (1 - BETA1 ** t)
    v_hat = v / (1 - BETA2 ** t)
    return params + sign * lr * m_hat / (np.sqrt(v_hat) + EPS), AdamState(m, v, t)


# -- training loop --------------------------------------------------------

def _prepare(problem: Problem, config: TrainConfig) -> Problem:
    paths = []
    for m in problem.paths:
        d = m.domain
        if config.n_samples is not None:
            d = replace(d, n=config.n_samples)
        if config.resample and d.kind == "interval" and d.sampling == "midpoint":
            d = replace(d, sampling="uniform")
        paths.append(replace(m, domain=d))
    return replace(problem, paths=tuple(paths))


def _reference_samples(problem: Problem) -> list[Samples]:
    """Deterministic nodes for reporting: the midpoint grid on intervals, the seeded draw on the disk."""
    out = []
    for m in problem.paths:
        d = m.domain
        out.append(sample_domain(replace(d, sampling="midpoint") if d.kind == "interval" else d))
    return out


def _reference_action(problem: Problem, state: State, samples) -> float:
    return sum(action_estimate(m.lagrangian, BoundNetwork(m.spec, p), s)
               for m, p, s in zip(problem.paths, state.paths, samples))


def _plateaued(actions: list[float], tol: float) -> bool:
    n = len(actions)
    window = max(10, n // 10)
    if n < 2 * window:
        return False
    recent = float(np.mean(actions[-window:]))
    before = float(np.mean(actions[-2 * window:-window]))
    return abs(recent - before) <= tol * max(1.0, abs(recent))


def _recorded_forces(state: State, data) -> np.ndarray:
    b_force = data[3]
    if b_force is None:
        return state.forces.copy()
    return np.append(state.forces, np.mean(b_force))


def train(problem: Problem, config: TrainConfig, state: State | None = None, callback=None) -> Solution:
    """Run minimax training until convergence or the step budget.

    Network initializations come from each spec's ``init_seed``; ``config.seed``
    drives sample draws. ``callback(step, state)``, if given, is called after
    each update.
    """
    run_problem = _prepare(problem, config)
    state = State.initial(problem) if state is None else state.copy()
    rng = np.random.default_rng(config.seed)
    fixed = [sample_domain(m.domain, rng) for m in run_problem.paths]
    reference = _reference_samples(run_problem) if config.resample else None
    path_kind = config.optimizer
    force_kind = config.force_optimizer or config.optimizer
    opt_paths = [None] * len(state.paths)
    opt_forces = opt_net = None
    lr_p, lr_f = config.lr_path, config.lr_force
    rho = config.stabilizer_rho
    history = History()
    converged = False

    for step in range(config.steps):
        if config.resample:
            samples = [sample_domain(m.domain, rng) for m in run_problem.paths]
        else:
            samples = fixed
        data = _constraint_data(run_problem, state)
        action, _, g_paths = path_gradients(run_problem, state, samples, rho, data)
        _, g_forces, g_net = force_gradients(run_problem, state, data)
        if reference is not None:
            # batch estimates are too noisy to judge a plateau; track the fixed reference instead
            action = _reference_action(run_problem, state, reference)
        viol = all_violations(run_problem, state, data)
        max_viol = float(np.max(np.abs(viol))) if viol.size else 0.0
        forces_now = _recorded_forces(state, data)
        history.append(step, action, max_viol, lr_p, lr_f, forces_now)

        if not np.isfinite(action) or abs(action) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"action estimate diverged ({action:.3e})", step)
        if forces_now.size and (not np.all(np.isfinite(forces_now))
                                or np.max(np.abs(forces_now)) > DIVERGENCE_LIMIT):
            raise DivergenceError(f"force diverged (max |F| = {np.max(np.abs(forces_now)):.3e})", step)

        if max_viol <= config.tol_violation and _plateaued(history.action, config.tol_action):
            converged = True
            log.info("converged at step %d: action=%.6g max violation=%.3g", step, action, max_viol)
            break

        try:
            new_paths = []
            for k, (p, g) in enumerate(zip(state.paths, g_paths)):
                p, opt_paths[k] = optimizer_update(p, g, lr_p, "descend", opt_paths[k], path_kind)
                new_paths.append(p)
            forces = state.forces
            if forces.size:
                forces, opt_forces = optimizer_update(forces, g_forces, lr_f, "ascend", opt_forces, force_kind)
            net = state.force_net
            if net is not None:
                net, opt_net = optimizer_update(net, g_net, lr_f, "ascend", opt_net, force_kind)
        except FloatingPointError as exc:
            raise DivergenceError(str(exc), step) from exc
        state = State(new_paths, forces, net)

        if (step + 1) % config.damp_every == 0:
            lr_p *= config.damp_factor
            lr_f *= config.damp_factor
        if callback is not None:
            callback(step, state)

    action = _reference_action(run_problem, state, reference if reference is not None else fixed)
    return Solution(run_problem, state, history, converged, action, all_violations(run_problem, state))
