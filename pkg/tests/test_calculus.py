from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kolmonet.bench import random_network, synthetic_identity
from kolmonet.calculus import (
    compose,
    compose_bound,
    relu_identity,
    residual_bound,
    residual_step,
    weighted_sum,
)
from kolmonet.exceptions import ArchitectureError, ShapeError
from kolmonet.network import NeuralNetwork, param_count, realize, scale_shift_output
from kolmonet.sde import EulerConfig, NoiseRealization, euler_path

TOL = 1e-9


def _probes(rng, d, n=50, radius=10.0):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True) * radius * rng.random((n, 1))


def _linear1(a):
    """ReLU-exact network (1, 2, 1) for x -> a x."""
    return scale_shift_output(relu_identity(1), a, [0.0])


def test_identity_examples():
    assert realize(relu_identity(1), [-3.0])[0] == -3.0
    np.testing.assert_array_equal(realize(relu_identity(2), [0.0, 0.0]), [0.0, 0.0])
    assert param_count(relu_identity(5)) == 115
    assert all(not b.any() for _, b in relu_identity(4).layers)


def test_identity_rejects_bad_dimension():
    with pytest.raises(ValueError):
        relu_identity(0)


def test_weighted_sum_single_term_rebuilds():
    net = random_network(np.random.default_rng(0), (3, 5, 2))
    out = weighted_sum([net], [1.0])
    x = _probes(np.random.default_rng(1), 3)
    np.testing.assert_allclose(realize(out, x), realize(net, x), atol=1e-12)
    assert out is not net and out.dims == net.dims


def test_weighted_sum_cancellation():
    net = random_network(np.random.default_rng(2), (2, 4, 3, 1))
    out = weighted_sum([net, net], [1.0, -1.0])
    x = _probes(np.random.default_rng(3), 2)
    np.testing.assert_allclose(realize(out, x), 0.0, atol=1e-12)


def test_weighted_sum_three_random():
    rng = np.random.default_rng(4)
    nets = [random_network(rng, (2, 4, 1)) for _ in range(3)]
    h = rng.standard_normal(3)
    out = weighted_sum(nets, h)
    x = _probes(rng, 2)
    direct = sum(hm * realize(n, x) for hm, n in zip(h, nets))
    np.testing.assert_allclose(realize(out, x), direct, atol=1e-12)
    assert out.dims == (2, 12, 1)
    assert param_count(out) <= 9 * param_count(nets[0])


def test_weighted_sum_errors():
    rng = np.random.default_rng(5)
    with pytest.raises(ValueError):
        weighted_sum([], [])
    with pytest.raises(ArchitectureError):
        weighted_sum([random_network(rng, (2, 3, 1)), random_network(rng, (2, 4, 1))], [1.0, 1.0])
    with pytest.raises(ValueError):
        weighted_sum([random_network(rng, (2, 3, 1))], [1.0, 2.0])


def test_compose_identities():
    d = 3
    out = compose(relu_identity(d), relu_identity(d), relu_identity(d))
    assert out.dims == (d, 2 * d, 2 * d, 2 * d, d)
    x = _probes(np.random.default_rng(6), d)
    np.testing.assert_allclose(realize(out, x), x, atol=1e-12)


def test_compose_scalings():
    out = compose(_linear1(2.0), _linear1(3.0), relu_identity(1))
    np.testing.assert_allclose(realize(out, np.array([[1.5], [-2.0], [0.0]]))[:, 0], [9.0, -12.0, 0.0])


def test_compose_errors():
    rng = np.random.default_rng(7)
    outer, inner = random_network(rng, (3, 4, 1)), random_network(rng, (2, 5, 3))
    with pytest.raises(ShapeError):
        compose(outer, random_network(rng, (2, 5, 2)), relu_identity(2))
    with pytest.raises(ArchitectureError):
        compose(outer, inner, relu_identity(2))
    with pytest.raises(ArchitectureError):
        compose(outer, inner, compose(relu_identity(3), relu_identity(3), relu_identity(3)))


def test_residual_zero_increment():
    d = 2
    zero = NeuralNetwork([(np.ones((3, d)), np.zeros(3)), (np.zeros((d, 3)), np.zeros(d))])
    out = residual_step(relu_identity(d), zero, relu_identity(d))
    x = _probes(np.random.default_rng(8), d)
    np.testing.assert_allclose(realize(out, x), x, atol=1e-12)


def test_residual_halving():
    out = residual_step(relu_identity(1), _linear1(-0.5), relu_identity(1))
    np.testing.assert_allclose(realize(out, np.array([[4.0], [-1.0]]))[:, 0], [2.0, -0.5])


def test_residual_width_precondition():
    rng = np.random.default_rng(9)
    accum = random_network(rng, (1, 9, 1))
    inc = random_network(rng, (1, 3, 1))
    with pytest.raises(ArchitectureError):
        residual_step(accum, inc, relu_identity(1))


def test_residual_dimension_mismatch():
    rng = np.random.default_rng(10)
    with pytest.raises(ShapeError):
        residual_step(relu_identity(2), random_network(rng, (3, 4, 3)), relu_identity(2))


def test_residual_chain_matches_euler_recursion():
    rng = np.random.default_rng(11)
    d, steps = 2, 6
    drift = random_network(rng, (d, 5, d))
    cfg = EulerConfig.from_steps(steps, 1.0)
    noise = NoiseRealization.draw(3, steps, d, cfg.h)
    diff = np.array([[1.0, 0.2], [0.2, 0.7]])
    shifts = noise.increments @ diff.T
    accum, ident = relu_identity(d), relu_identity(d)
    for k in range(steps):
        accum = residual_step(accum, scale_shift_output(drift, cfg.h, shifts[k]), ident)
    x0 = _probes(rng, d, 20, 3.0)
    expected, _ = euler_path(lambda y: realize(drift, y), x0, diff, cfg, noise)
    np.testing.assert_allclose(realize(accum, x0), expected, atol=1e-8)


def test_operations_do_not_mutate_inputs():
    rng = np.random.default_rng(12)
    a, b = random_network(rng, (2, 3, 2)), random_network(rng, (2, 4, 2))
    snap = [(w.copy(), c.copy()) for w, c in a.layers + b.layers]
    weighted_sum([a, a], [0.5, 0.5])
    compose(a, b, relu_identity(2))
    residual_step(a, b, relu_identity(2))
    for (w, c), (w0, c0) in zip(a.layers + b.layers, snap):
        np.testing.assert_array_equal(w, w0)
        np.testing.assert_array_equal(c, c0)


def _dims(draw, d_in, d_out):
    hidden = draw(st.lists(st.integers(1, 8), min_size=1, max_size=3))
    return (d_in, *hidden, d_out)


@st.composite
def sum_case(draw):
    d_in, d_out = draw(st.integers(1, 8)), draw(st.integers(1, 8))
    dims = _dims(draw, d_in, d_out)
    M = draw(st.integers(1, 4))
    seed = draw(st.integers(0, 2**32 - 1))
    return dims, M, seed


@settings(max_examples=60, deadline=None)
@given(sum_case())
def test_weighted_sum_properties(case):
    dims, M, seed = case
    rng = np.random.default_rng(seed)
    nets = [random_network(rng, dims) for _ in range(M)]
    h = rng.standard_normal(M)
    out = weighted_sum(nets, h)
    x = _probes(rng, dims[0])
    direct = sum(hm * realize(n, x) for hm, n in zip(h, nets))
    assert np.max(np.abs(realize(out, x) - direct)) <= TOL
    assert out.dims == (dims[0], *(M * l for l in dims[1:-1]), dims[-1])
    assert param_count(out) <= M * M * param_count(nets[0])


@st.composite
def compose_case(draw):
    d1, d2, d3 = (draw(st.integers(1, 8)) for _ in range(3))
    return _dims(draw, d1, d2), _dims(draw, d2, d3), draw(st.integers(1, 3)), draw(st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(compose_case())
def test_compose_properties(case):
    inner_dims, outer_dims, copies, seed = case
    rng = np.random.default_rng(seed)
    inner, outer = random_network(rng, inner_dims), random_network(rng, outer_dims)
    d2 = inner_dims[-1]
    ident = synthetic_identity(d2, copies)
    out = compose(outer, inner, ident)
    x = _probes(rng, inner_dims[0])
    assert np.max(np.abs(realize(out, x) - realize(outer, realize(inner, x)))) <= TOL
    assert out.dims == (inner_dims[0], *inner_dims[1:-1], ident.dims[1], *outer_dims[1:])
    factor = max(Fraction(1), Fraction(param_count(ident), 2 * d2 * d2))
    assert param_count(out) <= factor * (param_count(outer) + param_count(inner))
    assert compose_bound(outer, inner, ident) == factor * (param_count(outer) + param_count(inner))


@st.composite
def residual_case(draw):
    d = draw(st.integers(1, 8))
    copies = draw(st.integers(1, 3))
    acc = list(_dims(draw, d, d))
    inc = list(_dims(draw, d, d))
    inc[-2] = max(inc[-2], acc[-2] - 2 * d * copies, 1)
    return acc, inc, copies, draw(st.integers(0, 2**32 - 1))


@settings(max_examples=60, deadline=None)
@given(residual_case())
def test_residual_properties(case):
    acc_dims, inc_dims, copies, seed = case
    rng = np.random.default_rng(seed)
    accum, inc = random_network(rng, acc_dims), random_network(rng, inc_dims)
    d = acc_dims[0]
    ident = synthetic_identity(d, copies)
    w = ident.dims[1]
    out = residual_step(accum, inc, ident)
    x = _probes(rng, d)
    ya = realize(accum, x)
    assert np.max(np.abs(realize(out, x) - (ya + realize(inc, ya)))) <= TOL
    assert out.dims == (*acc_dims[:-1], *(l + w for l in inc_dims[1:-1]), d)
    bound = param_count(accum) + (param_count(inc) + param_count(ident)) ** 3
    assert param_count(out) <= bound == residual_bound(accum, inc, ident)
