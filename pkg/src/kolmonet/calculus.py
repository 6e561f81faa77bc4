"""Weight-level network algebra: identities, linear combinations, compositions.

Each operation assembles the output network block by block, so its architecture
and parameter count are known exactly in advance.  The ``*_bound`` helpers state
the parameter-count guarantees in exact integer arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .exceptions import ArchitectureError, ShapeError
from .network import NeuralNetwork, param_count, realize


def relu_identity(d: int) -> NeuralNetwork:
    """Depth-2 ReLU network with architecture (d, 2d, d) realizing x -> x.

    Uses max(t, 0) - max(-t, 0) = t coordinatewise.
    """
    if d < 1:
        raise ValueError("d must be positive")
    w1 = np.kron(np.eye(d), np.array([[1.0], [-1.0]]))
    w2 = np.kron(np.eye(d), np.array([[1.0, -1.0]]))
    return NeuralNetwork([(w1, np.zeros(2 * d)), (w2, np.zeros(d))], "relu")


def weighted_sum(nets: Sequence[NeuralNetwork], weights: Sequence[float]) -> NeuralNetwork:
    """Network realizing x -> sum_m h_m * nets[m](x) for nets of one architecture.

    The first layers are stacked, the hidden layers placed block-diagonally and
    the output layers concatenated with the weights folded in.  The result has
    architecture (l_0, M l_1, ..., M l_{L-1}, l_L).
    """
    nets = list(nets)
    weights = [float(h) for h in weights]
    if not nets:
        raise ArchitectureError("weighted_sum needs at least one network")
    if len(weights) != len(nets):
        raise ArchitectureError(f"{len(nets)} networks but {len(weights)} weights")
    dims, act = nets[0].dims, nets[0].activation
    for k, net in enumerate(nets[1:], start=2):
        if net.dims != dims:
            raise ArchitectureError(f"network {k} has architecture {net.dims}, expected {dims}")
        if net.activation != act:
            raise ArchitectureError(f"network {k} uses activation {net.activation!r}, expected {act!r}")

    depth = len(dims) - 1
    layers = [(
        np.vstack([net.layers[0][0] for net in nets]),
        np.concatenate([net.layers[0][1] for net in nets]),
    )]
    for i in range(1, depth - 1):
        layers.append((
            block_diag(*[net.layers[i][0] for net in nets]),
            np.concatenate([net.layers[i][1] for net in nets]),
        ))
    layers.append((
        np.hstack([h * net.layers[-1][0] for h, net in zip(weights, nets)]),
        sum(h * net.layers[-1][1] for h, net in zip(weights, nets)),
    ))
    return NeuralNetwork(layers, act)


def _check_identity(id_net: NeuralNetwork, d: int, activation: str) -> int:
    if id_net.depth != 2:
        raise ArchitectureError(f"identity network must have depth 2, got dims {id_net.dims}")
    if id_net.input_dim != d or id_net.output_dim != d:
        raise ArchitectureError(f"identity network dims {id_net.dims} do not act on R^{d}")
    if id_net.activation != activation:
        raise ArchitectureError("identity network activation differs from the composed networks")
    probes = np.vstack([np.eye(d), -np.eye(d), np.linspace(-3.0, 3.0, d)[None, :]])
    if np.max(np.abs(realize(id_net, probes) - probes)) > 1e-12:
        raise ArchitectureError("identity network does not realize the identity")
    return id_net.dims[1]


def compose(outer: NeuralNetwork, inner: NeuralNetwork, id_net: NeuralNetwork) -> NeuralNetwork:
    """Network realizing outer(inner(x)) with an artificial identity in between.

    Architecture: (inner dims[:-1], i, outer dims[1:]) where i is the hidden
    width of ``id_net``.  Gluing through the identity keeps the parameter count
    additive instead of multiplicative.
    """
    d2 = inner.output_dim
    if outer.input_dim != d2:
        raise ShapeError(f"outer expects input {outer.input_dim}, inner produces {d2}")
    if outer.activation != inner.activation:
        raise ArchitectureError("outer and inner networks use different activations")
    _check_identity(id_net, d2, inner.activation)
    (w31, b31), (w32, b32) = id_net.layers
    w2l, b2l = inner.layers[-1]
    w11, b11 = outer.layers[0]
    layers = list(inner.layers[:-1])
    layers.append((w31 @ w2l, w31 @ b2l + b31))
    layers.append((w11 @ w32, w11 @ b32 + b11))
    layers.extend(outer.layers[1:])
    return NeuralNetwork(layers, inner.activation)


def residual_step(accum: NeuralNetwork, increment: NeuralNetwork, id_net: NeuralNetwork) -> NeuralNetwork:
    """Network realizing y + increment(y) with y = accum(x).

    The hidden layers of ``increment`` run next to a carried copy of y (through
    the identity's hidden layer); the output layer adds both branches.
    Architecture: (accum dims[:-1], inc hidden + i ..., d).
    """
    d = accum.output_dim
    if accum.input_dim != d or increment.input_dim != d or increment.output_dim != d:
        raise ShapeError(
            f"residual_step needs maps R^d -> R^d, got {accum.dims} and {increment.dims}"
        )
    if accum.activation != increment.activation:
        raise ArchitectureError("accum and increment use different activations")
    width = _check_identity(id_net, d, accum.activation)
    if accum.dims[-2] > increment.dims[-2] + width:
        raise ArchitectureError(
            f"last hidden width {accum.dims[-2]} of accum exceeds "
            f"{increment.dims[-2]} + {width} (increment + identity)"
        )
    (w31, b31), (w32, b32) = id_net.layers
    w1l, b1l = accum.layers[-1]
    inc = increment.layers
    layers = list(accum.layers[:-1])
    w21, b21 = inc[0]
    layers.append((
        np.vstack([w21 @ w1l, w31 @ w1l]),
        np.concatenate([w21 @ b1l + b21, w31 @ b1l + b31]),
    ))
    carry_w, carry_b = w31 @ w32, w31 @ b32 + b31
    for w2, b2 in inc[1:-1]:
        layers.append((block_diag(w2, carry_w), np.concatenate([b2, carry_b])))
    w2l, b2l = inc[-1]
    layers.append((np.hstack([w2l, w32]), b2l + b32))
    return NeuralNetwork(layers, accum.activation)


# -- architecture and parameter-count postconditions ----------------------------


def weighted_sum_dims(dims: Sequence[int], m: int) -> tuple[int, ...]:
    return (dims[0],) + tuple(m * l for l in dims[1:-1]) + (dims[-1],)


def compose_dims(outer_dims, inner_dims, width) -> tuple[int, ...]:
    return tuple(inner_dims[:-1]) + (width,) + tuple(outer_dims[1:])


def residual_dims(accum_dims, inc_dims, width) -> tuple[int, ...]:
    return tuple(accum_dims[:-1]) + tuple(l + width for l in inc_dims[1:-1]) + (inc_dims[-1],)


def weighted_sum_bound(first: NeuralNetwork, m: int) -> int:
    return m * m * param_count(first)


def compose_bound(outer: NeuralNetwork, inner: NeuralNetwork, id_net: NeuralNetwork) -> Fraction:
    """max{1, P(I) / (2 d2^2)} (P(outer) + P(inner)) as an exact rational."""
    d2 = inner.output_dim
    factor = max(Fraction(1), Fraction(param_count(id_net), 2 * d2 * d2))
    return factor * (param_count(outer) + param_count(inner))


def residual_bound(accum: NeuralNetwork, increment: NeuralNetwork, id_net: NeuralNetwork) -> int:
    """P(accum) + (P(increment) + P(I))^3."""
    return param_count(accum) + (param_count(increment) + param_count(id_net)) ** 3
