"""Fully connected feedforward networks stored as explicit (weights, bias) tuples.

A network ``((W_1, B_1), ..., (W_L, B_L))`` with ``L >= 2`` realizes

    x_n = a(W_n x_{n-1} + B_n)   for n < L,      output = W_L x_{L-1} + B_L,

with the activation ``a`` applied componentwise on hidden layers only.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .exceptions import NumericError, ShapeError

FORMAT_VERSION = 1

_ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "relu": lambda z: np.maximum(z, 0.0),
    "tanh": np.tanh,
    "sigmoid": expit,
    "softplus": lambda z: np.logaddexp(0.0, z),
}


def register_activation(tag: str, fn: Callable[[np.ndarray], np.ndarray]) -> None:
    """Make a continuous componentwise activation available under ``tag``."""
    _ACTIVATIONS[tag] = fn


def activation_fn(tag: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return _ACTIVATIONS[tag]
    except KeyError:
        raise ValueError(f"unknown activation {tag!r}") from None


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ShapeError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class NeuralNetwork:
    """Immutable network; arrays are read-only and may be shared between networks."""

    __slots__ = ("layers", "activation")

    def __init__(self, layers: Sequence[tuple[np.ndarray, np.ndarray]], activation: str = "relu"):
        if len(layers) < 2:
            raise ShapeError(f"a network needs at least 2 layers, got {len(layers)}")
        activation_fn(activation)
        frozen = []
        for n, (w, b) in enumerate(layers):
            w = w if _is_frozen(w, 2) else _frozen(w, 2)
            b = b if _is_frozen(b, 1) else _frozen(b, 1)
            if b.shape[0] != w.shape[0]:
                raise ShapeError(f"layer {n + 1}: bias length {b.shape[0]} != rows {w.shape[0]}")
            if n and w.shape[1] != frozen[-1][0].shape[0]:
                raise ShapeError(
                    f"layer {n + 1}: {w.shape[1]} columns do not match "
                    f"{frozen[-1][0].shape[0]} rows of layer {n}"
                )
            if min(w.shape) == 0:
                raise ShapeError(f"layer {n + 1} has an empty dimension")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise NumericError(f"layer {n + 1} has non-finite entries")
            frozen.append((w, b))
        object.__setattr__(self, "layers", tuple(frozen))
        object.__setattr__(self, "activation", activation)

    def __setattr__(self, name, value):
        raise AttributeError("NeuralNetwork is immutable")

    def __repr__(self):
        return f"NeuralNetwork(dims={self.dims}, activation={self.activation!r})"

    def __eq__(self, other):
        if not isinstance(other, NeuralNetwork):
            return NotImplemented
        return (
            self.activation == other.activation
            and len(self.layers) == len(other.layers)
            and all(
                np.array_equal(w1, w2) and np.array_equal(b1, b2)
                for (w1, b1), (w2, b2) in zip(self.layers, other.layers)
            )
        )

    __hash__ = None

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0][0].shape[1],) + tuple(w.shape[0] for w, _ in self.layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    def __call__(self, x):
        return realize(self, x)


def _is_frozen(a, ndim) -> bool:
    return (
        isinstance(a, np.ndarray)
        and a.dtype == np.float64
        and a.ndim == ndim
        and not a.flags.writeable
    )


def architecture(net: NeuralNetwork) -> tuple[int, ...]:
    """Shape chain ``(l_0, l_1, ..., l_L)``."""
    return net.dims


def param_count(net: NeuralNetwork) -> int:
    dims = net.dims
    return sum(dims[n] * (dims[n - 1] + 1) for n in range(1, len(dims)))


def param_count_of_dims(dims: Sequence[int]) -> int:
    return sum(int(dims[n]) * (int(dims[n - 1]) + 1) for n in range(1, len(dims)))


def realize(net: NeuralNetwork, x) -> np.ndarray:
    """Evaluate the network on one point ``(l_0,)`` or a batch ``(n, l_0)``."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    z = x[None, :] if single else x
    if z.ndim != 2 or z.shape[1] != net.input_dim:
        raise ShapeError(f"input of shape {x.shape} does not match input dimension {net.input_dim}")
    act = activation_fn(net.activation)
    last = len(net.layers) - 1
    for n, (w, b) in enumerate(net.layers):
        z = z @ w.T + b
        if n < last:
            z = act(z)
        if not np.isfinite(z).all():
            raise NumericError(f"non-finite value after layer {n + 1}")
    return z[0] if single else z


def scale_shift_output(net: NeuralNetwork, s: float, b) -> NeuralNetwork:
    """Network realizing ``x -> s * net(x) + b`` with the same architecture."""
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    w_last, b_last = net.layers[-1]
    if b.shape[0] != w_last.shape[0]:
        raise ShapeError(f"shift of length {b.shape[0]} does not match output dimension {w_last.shape[0]}")
    return NeuralNetwork(net.layers[:-1] + ((s * w_last, s * b_last + b),), net.activation)


# -- serialization -------------------------------------------------------------


def to_dict(net: NeuralNetwork) -> dict:
    return {
        "version": FORMAT_VERSION,
        "activation": net.activation,
        "layers": [
            {
                "rows": int(w.shape[0]),
                "cols": int(w.shape[1]),
                "weights": w.ravel(order="C").tolist(),
                "bias": b.tolist(),
            }
            for w, b in net.layers
        ],
    }


def from_dict(data: dict) -> NeuralNetwork:
    if data.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported network format version {data.get('version')!r}")
    layers = []
    for n, layer in enumerate(data["layers"]):
        rows, cols = int(layer["rows"]), int(layer["cols"])
        weights = np.asarray(layer["weights"], dtype=np.float64)
        bias = np.asarray(layer["bias"], dtype=np.float64)
        if weights.size != rows * cols or bias.size != rows:
            raise ShapeError(f"layer {n + 1}: declared {rows}x{cols} does not match stored entries")
        layers.append((weights.reshape(rows, cols), bias))
    return NeuralNetwork(layers, data["activation"])


def _reject_constant(name):
    raise NumericError(f"non-finite constant {name} in network file")


def _numbers(values) -> str:
    return ",".join(map(repr, values))


def iter_json(net: NeuralNetwork, rows_per_chunk: int = 256):
    """Compact JSON text of ``to_dict(net)`` in pieces, without building the full list."""
    yield '{"version":%d,"activation":%s,"layers":[' % (FORMAT_VERSION, json.dumps(net.activation))
    for n, (w, b) in enumerate(net.layers):
        yield ("," if n else "") + '{"rows":%d,"cols":%d,"weights":[' % w.shape
        for r in range(0, w.shape[0], rows_per_chunk):
            yield ("," if r else "") + _numbers(w[r:r + rows_per_chunk].ravel().tolist())
        yield '],"bias":[' + _numbers(b.tolist()) + "]}"
    yield "]}"


def dumps(net: NeuralNetwork) -> str:
    return "".join(iter_json(net))


def loads(text: str) -> NeuralNetwork:
    return from_dict(json.loads(text, parse_constant=_reject_constant))


def save(net: NeuralNetwork, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for piece in iter_json(net):
            fh.write(piece)
        fh.write("\n")
    return path


def load(path) -> NeuralNetwork:
    return loads(Path(path).read_text())
