import numpy as np
import pytest
from hypothesis import given, strategies as st

from actionnet.functional import GravityParams, lagrangian_gravity
from actionnet.network import (ACTIVATIONS, BoundNetwork, NetworkSpec, ObjectiveEvaluationError, forward,
                               forward_jet, grad_params, init_params, load_checkpoint, pack,
                               save_checkpoint, unpack)
from actionnet import jets

from gradcheck import max_relative_error


def reference_forward(spec, params, x):
    """Independent oracle: explicit per-layer loops over neurons."""
    x = np.atleast_1d(np.asarray(x, float))
    a = [2 * (x[k] - spec.lo[k]) / (spec.hi[k] - spec.lo[k]) - 1 for k in range(spec.input_dim)]
    k = 0
    sizes = [spec.input_dim, *spec.layer_widths, spec.output_dim]
    for layer in range(len(sizes) - 1):
        n_in, n_out = sizes[layer], sizes[layer + 1]
        W = [[params[k + r * n_in + c] for c in range(n_in)] for r in range(n_out)]
        k += n_in * n_out
        b = params[k:k + n_out]
        k += n_out
        z = [sum(W[r][c] * a[c] for c in range(n_in)) + b[r] for r in range(n_out)]
        last = layer == len(sizes) - 2
        a = z if last else [float(ACTIVATIONS[spec.activation].f(np.float64(v))) for v in z]
    return a[0]


# -- init ------------------------------------------------------------------

def test_parameter_count_and_layout():
    spec = NetworkSpec(2, (3, 4))
    assert spec.n_params == (3 * 2 + 3) + (4 * 3 + 4) + (1 * 4 + 1)
    p = init_params(spec)
    assert p.shape == (spec.n_params,)
    np.testing.assert_array_equal(pack(unpack(spec, p)), p)


def test_single_neuron_bias_zero():
    for seed in range(5):
        spec = NetworkSpec(1, (1,), init_seed=seed)
        for _, b in unpack(spec, init_params(spec)):
            assert np.all(b == 0.0)


def test_init_deterministic():
    spec = NetworkSpec(1, (16, 16), init_seed=7)
    np.testing.assert_array_equal(init_params(spec), init_params(spec))
    assert not np.array_equal(init_params(spec), init_params(NetworkSpec(1, (16, 16), init_seed=8)))


def test_init_variance_scales_with_fan_in():
    first, second = [], []
    for seed in range(10_000):
        layers = unpack(NetworkSpec(1, (16, 16), init_seed=seed), init_params(NetworkSpec(1, (16, 16), init_seed=seed)))
        first.append(layers[0][0].ravel())
        second.append(layers[1][0].ravel())
    first, second = np.concatenate(first), np.concatenate(second)
    # sample variance of n normals has relative s.e. sqrt(2/n)
    assert abs(first.var() - 1.0) < 4 * np.sqrt(2 / first.size)
    assert abs(second.var() - 1 / 16) < 4 * np.sqrt(2 / second.size) / 16
    assert abs(first.mean()) < 4 / np.sqrt(first.size)


def test_spec_validation():
    with pytest.raises(ValueError):
        NetworkSpec(3)
    with pytest.raises(ValueError):
        NetworkSpec(1, ())
    with pytest.raises(ValueError):
        NetworkSpec(1, (4, 0))
    with pytest.raises(ValueError):
        NetworkSpec(1, activation="relu")
    with pytest.raises(ValueError):
        NetworkSpec(1, lo=(1.0,), hi=(0.0,))


# -- forward -----------------------------------------------------------------

def test_zero_params_give_zero():
    spec = NetworkSpec(2, (8, 8))
    assert forward(spec, np.zeros(spec.n_params), [0.3, -0.2]) == 0.0


def test_linear_network_is_affine():
    spec = NetworkSpec(1, (1,), activation="linear")
    w, b = 2.5, -0.75
    params = pack([(np.array([[1.0]]), np.zeros(1)), (np.array([[w]]), np.array([b]))])
    for x in (-1.0, 0.0, 0.4):
        assert forward(spec, params, x) == pytest.approx(w * x + b, abs=1e-15)


@pytest.mark.parametrize("seed", range(6))
def test_forward_matches_reference(seed):
    rng = np.random.default_rng(seed)
    spec = NetworkSpec(1 + seed % 2, (5, 3), activation=("tanh", "sin", "sigmoid")[seed % 3], init_seed=seed,
                       lo=(-2.0,) * (1 + seed % 2), hi=(3.0,) * (1 + seed % 2))
    params = init_params(spec) + 0.1 * rng.normal(size=spec.n_params)
    for _ in range(5):
        x = rng.uniform(-2, 3, size=spec.input_dim)
        x = x[0] if spec.input_dim == 1 else x
        assert forward(spec, params, x) == pytest.approx(reference_forward(spec, params, x), abs=1e-12)


def test_dimension_mismatch():
    spec = NetworkSpec(2, (4,))
    with pytest.raises(ValueError):
        forward(spec, init_params(spec), 0.5)
    with pytest.raises(ValueError):
        forward(spec, init_params(spec), np.zeros((4, 3)))


def test_batch_shapes():
    spec = NetworkSpec(2, (4,))
    p = init_params(spec)
    assert np.ndim(forward(spec, p, [0.1, 0.2])) == 0
    assert forward(spec, p, np.zeros((7, 2))).shape == (7,)


# -- forward_jet -------------------------------------------------------------

def test_constant_network_jet():
    spec = NetworkSpec(1, (3,))
    layers = unpack(spec, init_params(spec))
    layers[-1] = (np.zeros((1, 3)), np.array([1.7]))
    J = forward_jet(spec, pack(layers), 0.2)
    assert (J.value, J.d_dx) == (1.7, 0.0)


def test_single_tanh_neuron_jet():
    spec = NetworkSpec(1, (1,))
    params = pack([(np.array([[2.0]]), np.zeros(1)), (np.array([[1.0]]), np.zeros(1))])
    J = forward_jet(spec, params, 0.0)
    assert J.value == 0.0
    assert J.d_dx == pytest.approx(2.0)


@given(st.integers(0, 10_000), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_jet_partials_match_finite_differences(seed, x, y):
    spec = NetworkSpec(2, (6, 6), activation=("tanh", "softplus")[seed % 2], init_seed=seed)
    p = init_params(spec)
    J = forward_jet(spec, p, [x, y])
    h = 1e-6
    fx = (forward(spec, p, [x + h, y]) - forward(spec, p, [x - h, y])) / (2 * h)
    fy = (forward(spec, p, [x, y + h]) - forward(spec, p, [x, y - h])) / (2 * h)
    scale = max(1.0, abs(fx), abs(fy))
    assert abs(J.partials[0] - fx) <= 1e-6 * scale
    assert abs(J.partials[1] - fy) <= 1e-6 * scale


@given(st.integers(0, 10_000), st.lists(st.floats(-3, 3), min_size=1, max_size=6))
def test_jet_value_bit_identical_to_forward(seed, xs):
    spec = NetworkSpec(1, (5, 5), init_seed=seed, lo=(-3.0,), hi=(3.0,))
    p = init_params(spec)
    np.testing.assert_array_equal(forward_jet(spec, p, np.array(xs)).value, forward(spec, p, np.array(xs)))


# -- grad_params -------------------------------------------------------------

def test_gradient_of_point_value_wrt_output_bias():
    spec = NetworkSpec(1, (3,), activation="linear")
    _, g = grad_params(spec, init_params(spec), [(np.array([0.3]), lambda x, y, dy: y)])
    assert g[-1] == pytest.approx(1.0)


def test_constant_objective_has_zero_gradient():
    spec = NetworkSpec(2, (4,))
    total, g = grad_params(spec, init_params(spec), [(np.zeros((3, 2)), lambda x, y, dy: 2.0)])
    assert total == 6.0
    assert not np.any(g)


def test_gravity_objective_matches_finite_differences():
    spec = NetworkSpec(1, (8, 8), lo=(0.0,), hi=(1.0,), init_seed=3)
    p = init_params(spec)
    t = (np.arange(16) + 0.5) / 16
    L = lagrangian_gravity(GravityParams())

    def plain(q):
        J = forward_jet(spec, q, t)
        return float(np.sum(L(t, J.value, J.partials)))

    total, g = grad_params(spec, p, [(t, L.fn)])
    assert total == pytest.approx(plain(p))
    h = 1e-5
    fd = np.array([(plain(p + h * e) - plain(p - h * e)) / (2 * h) for e in np.eye(p.size)])
    floor = 1e-3 * np.max(np.abs(g))
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), floor)) <= 1e-5


@pytest.mark.parametrize("k", range(24))
def test_random_instances_gradient_check(k):
    assert max_relative_error(k) <= 1e-5


def test_objective_failure_reports_point():
    spec = NetworkSpec(1, (2,))
    pts = np.array([0.1, 0.2, 0.3])

    def bad(x, y, dy):
        return jets.sqrt(x - 0.2 + 0.0 * y)

    with pytest.raises(ObjectiveEvaluationError) as info:
        grad_params(spec, init_params(spec), [(pts, bad)])
    assert info.value.point is not None


def test_vector_output_rejected():
    spec = NetworkSpec(1, (2,), output_dim=2)
    with pytest.raises(ValueError):
        grad_params(spec, init_params(spec), [])


# -- checkpoints -------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path):
    spec = NetworkSpec(2, (5, 3), activation="sin", init_seed=4, lo=(-1.5, 0.0), hi=(2.0, 1.0 / 3))
    p = init_params(spec) * np.pi
    save_checkpoint(tmp_path / "n.ckpt", spec, p)
    spec2, p2 = load_checkpoint(tmp_path / "n.ckpt")
    assert spec2 == spec
    np.testing.assert_array_equal(p2, p)


def test_checkpoint_rejects_garbage(tmp_path):
    (tmp_path / "x.ckpt").write_text("hello\n")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "x.ckpt")


def test_bound_network_call():
    spec = NetworkSpec(1, (4,))
    net = BoundNetwork(spec, init_params(spec))
    assert net(0.3).value == net.value(0.3)
