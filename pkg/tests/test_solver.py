import numpy as np
import pytest
from hypothesis import given, strategies as st

from actionnet.constraints import CircleBoundary, InterfaceJoint, PointConstraint, constraint_term
from actionnet.functional import (Domain, action_estimate, FilmParams, GravityParams, OpticsParams, constant_lagrangian,
                                  lagrangian_film, lagrangian_gravity, lagrangian_optics, sample_domain)
from actionnet.network import NetworkSpec, init_params, pack, unpack
from actionnet.oracles import gravity_analytic
from actionnet.solver import (DivergenceError, PathModel, Problem, State, TrainConfig, all_violations,
                              objective_force, objective_path, optimizer_update, path_gradients,
                              path_objectives, train, default_samples)


def gravity_problem(n=32, seed=0):
    spec = NetworkSpec(1, (8, 8), lo=(0.0,), hi=(1.0,), init_seed=seed)
    model = PathModel(spec, lagrangian_gravity(GravityParams()), Domain("interval", 0, 1, n))
    return Problem((model,), (PointConstraint(0.0, 0.0), PointConstraint(1.0, 0.0)))


def zero_problem(target=0.3):
    spec = NetworkSpec(1, (4,), activation="linear", lo=(0.0,), hi=(1.0,))
    model = PathModel(spec, constant_lagrangian(0.0), Domain("interval", 0, 1, 8))
    return Problem((model,), (PointConstraint(0.0, target),))


def jointed_problem():
    L = lagrangian_optics(OpticsParams(1.0, 1.5))
    left = PathModel(NetworkSpec(1, (6,), lo=(-1.0,), hi=(0.0,), init_seed=0), L, Domain("interval", -1, 0, 16))
    right = PathModel(NetworkSpec(1, (6,), lo=(0.0,), hi=(1.0,), init_seed=1), L, Domain("interval", 0, 1, 16))
    return Problem((left, right), (PointConstraint(-1.0, 1.0, 0), PointConstraint(1.0, -1.0, 1)),
                   InterfaceJoint(0.0))


def film_problem():
    spec = NetworkSpec(2, (6,), init_seed=0)
    model = PathModel(spec, lagrangian_film(FilmParams(1, 1)), Domain("disk", n=64, sampling="uniform"))
    return Problem((model,), boundary=CircleBoundary(16, NetworkSpec(1, (4,), lo=(0.0,), hi=(2 * np.pi,))))


# -- objectives --------------------------------------------------------------

def test_zero_lagrangian_satisfied_constraint():
    prob = zero_problem(target=0.0)
    state = State.initial(prob)
    state.paths[0] = np.zeros_like(state.paths[0])
    state.forces[:] = 5.0
    assert objective_path(prob, state) == 0.0


def test_zero_lagrangian_reduces_to_constraint_term():
    prob = zero_problem(target=-0.3)
    state = State.initial(prob)
    state.paths[0] = np.zeros_like(state.paths[0])
    state.forces[:] = 1.0
    assert objective_path(prob, state) == pytest.approx(0.3)
    # the stabilizer adds rho * v^2
    assert objective_path(prob, state, rho=2.0) == pytest.approx(0.3 + 2.0 * 0.09)


def test_objective_at_analytic_minimizer_is_exact_action():
    # the parabola is not a network, so evaluate the two pieces of the objective on it directly
    n = 256
    prob = gravity_problem(n=n)
    exact = gravity_analytic(0, 0, 1, 0)
    s = default_samples(prob)[0]
    quad_err = 200 / (24 * n ** 2)
    assert action_estimate(prob.paths[0].lagrangian, exact, s) == pytest.approx(-25 / 6, abs=1.01 * quad_err)
    assert constraint_term([3.0, -2.0], exact, prob.constraints) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 100), st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_objective_force_is_force_times_violation(seed, forces):
    prob = gravity_problem(seed=seed)
    state = State.initial(prob)
    state.forces[:] = forces
    v = all_violations(prob, state)
    assert objective_force(prob, state) == pytest.approx(float(np.dot(forces, v)), abs=1e-12)


def test_objective_force_zero_when_satisfied():
    prob = zero_problem(target=0.0)
    state = State.initial(prob)
    state.paths[0] = np.zeros_like(state.paths[0])
    state.forces[:] = -7.0
    assert objective_force(prob, state) == 0.0


def test_ascent_step_increases_force_objective():
    for prob in (gravity_problem(seed=2), jointed_problem()):
        state = State.initial(prob)
        before = objective_force(prob, state)
        v = all_violations(prob, state)
        state.forces, _ = optimizer_update(state.forces, v, 1e-2, "ascend")
        assert objective_force(prob, state) > before


def test_joint_term_counts_once_in_total():
    prob = jointed_problem()
    state = State.initial(prob)
    state.forces[:] = [0.3, -0.2, 1.7]
    each = path_objectives(prob, state)
    gap = all_violations(prob, state)[-1]
    assert objective_path(prob, state) == pytest.approx(sum(each) - 1.7 * gap, rel=1e-12)


@pytest.mark.parametrize("make", [gravity_problem, jointed_problem, film_problem])
def test_path_gradient_matches_finite_differences(make):
    prob = make()
    state = State.initial(prob)
    state.forces[:] = np.linspace(-1, 1, prob.n_forces)
    samples = default_samples(prob)
    _, _, grads = path_gradients(prob, state, samples, rho=3.0)
    h = 1e-5
    for k in range(len(prob.paths)):
        mine = path_objectives(prob, state, samples, rho=3.0)[k]
        assert np.isfinite(mine)
        for i in np.random.default_rng(k).choice(state.paths[k].size, 8, replace=False):
            plus, minus = state.copy(), state.copy()
            plus.paths[k][i] += h
            minus.paths[k][i] -= h
            fd = (path_objectives(prob, plus, samples, 3.0)[k] - path_objectives(prob, minus, samples, 3.0)[k]) / (2 * h)
            assert grads[k][i] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_problem_validation():
    L = constant_lagrangian(0.0)
    m1 = PathModel(NetworkSpec(1, (2,)), L, Domain())
    with pytest.raises(ValueError):
        Problem((m1, m1))  # two paths need a joint
    with pytest.raises(ValueError):
        Problem((m1,), joint=InterfaceJoint(0.0))
    with pytest.raises(ValueError):
        Problem((m1,), boundary=CircleBoundary(8))
    with pytest.raises(ValueError):
        PathModel(NetworkSpec(2, (2,)), L, Domain())


# -- optimizer ---------------------------------------------------------------

def test_zero_gradient_leaves_params():
    p = np.array([1.0, -2.0])
    for kind in ("sgd", "adam"):
        out, _ = optimizer_update(p, np.zeros(2), 0.1, kind=kind)
        np.testing.assert_array_equal(out, p)


def test_plain_step():
    out, _ = optimizer_update(np.zeros(2), np.array([1.0, -2.0]), 0.1, "descend")
    np.testing.assert_allclose(out, [-0.1, 0.2])
    out, _ = optimizer_update(np.zeros(2), np.array([1.0, -2.0]), 0.1, "ascend")
    np.testing.assert_allclose(out, [0.1, -0.2])


def test_adam_on_quadratic_bowl():
    A = np.diag([1.0, 10.0, 100.0])
    p, st_ = np.array([1.0, -1.0, 0.5]), None
    for step in range(1000):
        g = A @ p
        if np.linalg.norm(g) <= 1e-6:
            break
        lr = 0.1 * 0.99 ** step
        p, st_ = optimizer_update(p, g, lr, "descend", st_, "adam")
    assert np.linalg.norm(A @ p) <= 1e-6


def test_non_finite_gradient_rejected():
    with pytest.raises(FloatingPointError):
        optimizer_update(np.zeros(2), np.array([np.nan, 0.0]), 0.1)
    with pytest.raises(ValueError):
        optimizer_update(np.zeros(2), np.zeros(3), 0.1)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(lr_path=0)
    with pytest.raises(ValueError):
        TrainConfig(damp_factor=1.5)
    with pytest.raises(ValueError):
        TrainConfig(optimizer="lbfgs")


# -- training ----------------------------------------------------------------

def test_constraint_only_equilibrium():
    prob = zero_problem(target=1.0)
    cfg = TrainConfig(steps=4000, lr_path=1e-2, lr_force=1e-2, tol_violation=1e-3, stabilizer_rho=1.0,
                      optimizer="adam")
    sol = train(prob, cfg)
    assert sol.converged
    assert abs(sol.networks()[0].value(0.0) - 1.0) <= 1e-3


def test_training_is_deterministic():
    cfg = TrainConfig(steps=200, optimizer="adam", stabilizer_rho=10.0, resample=True, seed=3)
    a = train(gravity_problem(seed=1), cfg)
    b = train(gravity_problem(seed=1), cfg)
    assert a.history.action == b.history.action
    assert a.history.max_violation == b.history.max_violation
    np.testing.assert_array_equal(a.state.paths[0], b.state.paths[0])


def test_learning_rates_decay():
    cfg = TrainConfig(steps=50, damp_factor=0.5, damp_every=10, tol_violation=1e-12)
    h = train(gravity_problem(), cfg).history
    assert h.lr_path[0] == 1e-3 and h.lr_path[10] == 5e-4 and h.lr_path[-1] == 1e-3 * 0.5 ** 4
    assert h.lr_force[25] == 1e-2 * 0.25


def test_training_reduces_violation_and_tracks_gravity():
    prob = gravity_problem(n=64)
    cfg = TrainConfig(steps=3000, optimizer="adam", stabilizer_rho=10.0, tol_violation=1e-4, tol_action=1e-5)
    sol = train(prob, cfg)
    t = np.linspace(0, 1, 51)
    assert sol.max_violation <= 1e-3
    assert np.max(np.abs(sol.networks()[0].value(t) - (5 * t - 5 * t * t))) <= 5e-2


def test_divergence_reported():
    prob = gravity_problem()
    state = State.initial(prob)
    layers = unpack(prob.paths[0].spec, state.paths[0])
    layers[-1] = (layers[-1][0] * 1e6, layers[-1][1])
    state.paths[0] = pack(layers)
    with pytest.raises(DivergenceError) as info:
        train(prob, TrainConfig(steps=10), state)
    assert info.value.step == 0


def test_callback_sees_every_step():
    seen = []
    train(gravity_problem(), TrainConfig(steps=7, tol_violation=1e-12), callback=lambda s, st_: seen.append(s))
    assert seen == list(range(7))


def test_initial_state_not_mutated():
    prob = gravity_problem()
    state = State.initial(prob)
    before = state.paths[0].copy()
    train(prob, TrainConfig(steps=5), state)
    np.testing.assert_array_equal(state.paths[0], before)


def test_resampled_run_reports_reference_action():
    # the reported action comes from the deterministic midpoint grid, not the last random batch
    prob = gravity_problem(n=16)
    sol = train(prob, TrainConfig(steps=20, resample=True, seed=5, tol_violation=1e-12))
    ref = sample_domain(Domain("interval", 0, 1, 16))
    assert sol.action == action_estimate(prob.paths[0].lagrangian, sol.networks()[0], ref)
