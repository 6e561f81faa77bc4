"""Catalog of Kolmogorov test problems and explicit ReLU surrogates for their data.

The surrogates are written down weight by weight: linear maps and maxima are
represented exactly, squares and 1/(1+s) by piecewise-linear interpolants whose
kinks become ReLU units.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr

from .network import NeuralNetwork
from .sde import KolmogorovProblem, Measure

PROBLEMS = ("heat-linear", "heat-quadratic", "heat-max", "ou-linear", "ou-quadratic", "bounded-drift")


# -- exact ReLU representations ----------------------------------------------------


def zero_net(d_in: int, d_out: int) -> NeuralNetwork:
    """Depth-2 network of architecture (d_in, 1, d_out) realizing the zero map."""
    return NeuralNetwork([(np.zeros((1, d_in)), np.zeros(1)), (np.zeros((d_out, 1)), np.zeros(d_out))])


def linear_net(W) -> NeuralNetwork:
    """Exact ReLU form of x -> W x with architecture (d, 2d, k)."""
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))
    d = W.shape[1]
    split = np.kron(np.eye(d), np.array([[1.0], [-1.0]]))
    merge = np.kron(np.eye(d), np.array([[1.0, -1.0]]))
    return NeuralNetwork([(split, np.zeros(2 * d)), (W @ merge, np.zeros(W.shape[0]))])


def max_net(d: int) -> NeuralNetwork:
    """Exact ReLU form of x -> max_i x_i via a pairwise tournament.

    max(a, b) = relu(a - b) + relu(b) - relu(-b); an unpaired entry is carried
    as relu(a) - relu(-a).  Depth is ceil(log2 d) + 1 (at least 2).
    """
    rows = [np.eye(d)[i] for i in range(d)]
    consts = [0.0] * d
    layers = []
    while True:
        w, b, new_rows = [], [], []
        n_units = 0
        pairs = [(i, i + 1) for i in range(0, len(rows) - 1, 2)]
        for i, j in pairs:
            w += [rows[i] - rows[j], rows[j], -rows[j]]
            b += [consts[i] - consts[j], consts[j], -consts[j]]
            new_rows.append((n_units, (1.0, 1.0, -1.0)))
            n_units += 3
        if len(rows) % 2:
            w += [rows[-1], -rows[-1]]
            b += [consts[-1], -consts[-1]]
            new_rows.append((n_units, (1.0, -1.0)))
            n_units += 2
        layers.append((np.array(w), np.array(b)))
        rows = []
        for start, coefs in new_rows:
            r = np.zeros(n_units)
            r[start:start + len(coefs)] = coefs
            rows.append(r)
        consts = [0.0] * len(rows)
        if len(rows) == 1:
            break
    layers.append((rows[0][None, :], np.zeros(1)))
    return NeuralNetwork(layers)


# -- piecewise-linear interpolants -------------------------------------------------


def pwl_terms(knots, values, flat_right: bool = False):
    """Coefficients of the interpolant p(t) = c + l t + sum_j w_j relu(t - k_j).

    Outside the knot range p continues linearly; with ``flat_right`` it is held
    constant to the right of the last knot.
    """
    knots = np.asarray(knots, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    slopes = np.diff(values) / np.diff(knots)
    const = values[0] - slopes[0] * knots[0]
    kinks, coefs = list(knots[1:-1]), list(np.diff(slopes))
    if flat_right:
        kinks.append(knots[-1])
        coefs.append(-slopes[-1])
    return float(const), float(slopes[0]), np.array(kinks), np.array(coefs)


def _square_knots(radius: float, spacing: float) -> np.ndarray:
    n = max(1, int(round(radius / spacing)))
    return np.linspace(-n * spacing, n * spacing, 2 * n + 1)


class _Affine:
    """Affine readout ``row . h + const`` of a hidden layer h."""

    def __init__(self, row, const=0.0):
        self.row = np.asarray(row, dtype=np.float64)
        self.const = float(const)

    def __add__(self, other):
        # rows read out before later units were added are zero on those units
        n = max(self.row.size, other.row.size)
        row = np.zeros(n)
        row[:self.row.size] += self.row
        row[:other.row.size] += other.row
        return _Affine(row, self.const + other.const)

    def __mul__(self, s):
        return _Affine(s * self.row, s * self.const)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


class _Layer:
    """Collects ReLU units whose pre-activations are affine readouts."""

    def __init__(self):
        self.rows, self.biases = [], []

    def unit(self, v: _Affine, shift: float = 0.0) -> int:
        self.rows.append(v.row)
        self.biases.append(v.const - shift)
        return len(self.rows) - 1

    def pwl(self, v: _Affine, terms) -> list:
        """Units for p(v); returns (unit index, coefficient) pairs plus the constant."""
        const, lin, kinks, coefs = terms
        pos, neg = self.unit(v), self.unit(-v)
        out = [(pos, lin), (neg, -lin)]
        out += [(self.unit(v, k), c) for k, c in zip(kinks, coefs)]
        return out, const

    @property
    def size(self):
        return len(self.rows)

    def weights(self, in_dim: int):
        w = np.zeros((len(self.rows), in_dim))
        for i, r in enumerate(self.rows):
            w[i, :r.size] = r
        return w, np.array(self.biases)

    def readout(self, combo, const=0.0) -> _Affine:
        row = np.zeros(self.size)
        for idx, c in combo:
            row[idx] += c
        return _Affine(row, const)


def square_sum_net(d: int, radius: float = 6.0, spacing: float = 0.5) -> NeuralNetwork:
    """ReLU interpolant of ||x||^2: error at most spacing^2/4 per coordinate on |x_i| <= radius."""
    knots = _square_knots(radius, spacing)
    terms = pwl_terms(knots, knots**2)
    layer = _Layer()
    total, const = [], 0.0
    for i in range(d):
        combo, c = layer.pwl(_Affine(np.eye(d)[i]), terms)
        total += combo
        const += c
    out = layer.readout(total, const)
    w1, b1 = layer.weights(d)
    return NeuralNetwork([(w1, b1), (out.row[None, :], np.array([out.const]))])


def bounded_drift_net(d: int, radius: float = 6.0, spacing: float = 0.5) -> NeuralNetwork:
    """ReLU surrogate of x -> x / (1 + ||x||^2).

    Hidden layer 1 interpolates the squares x_i^2, layer 2 interpolates
    g(s) = 1 / (1 + s) at s ~ ||x||^2 (held flat beyond the last knot), and
    layer 3 forms x_i g(s) = ((x_i + g)^2 - (x_i - g)^2) / 4 from interpolated
    squares.  The realization stays bounded and Lipschitz on all of R^d.
    """
    eye = np.eye(d)
    sq_terms = pwl_terms(_square_knots(radius, spacing), _square_knots(radius, spacing) ** 2)

    l1 = _Layer()
    xs1, s_combo, s_const = [], [], 0.0
    for i in range(d):
        combo, c = l1.pwl(_Affine(eye[i]), sq_terms)
        xs1.append(l1.readout([(combo[0][0], 1.0), (combo[1][0], -1.0)]))
        s_combo += combo
        s_const += c
    s1 = l1.readout(s_combo, s_const)

    s_max = d * radius**2
    g_knots = np.unique(np.concatenate([
        np.arange(0.0, 2.0, spacing),
        np.geomspace(2.0, max(s_max, 4.0), 24),
    ]))
    l2 = _Layer()
    xs2 = []
    for x in xs1:
        pos, neg = l2.unit(x), l2.unit(-x)
        xs2.append(l2.readout([(pos, 1.0), (neg, -1.0)]))
    g_combo, g_const = l2.pwl(s1, pwl_terms(g_knots, 1.0 / (1.0 + g_knots), flat_right=True))
    a2 = l2.readout(g_combo, g_const)

    prod_knots = _square_knots(radius + 1.0, spacing)
    prod_terms = pwl_terms(prod_knots, prod_knots**2)
    l3 = _Layer()
    outputs = []
    for x in xs2:
        plus, _ = l3.pwl(x + a2, prod_terms)
        minus, _ = l3.pwl(x + (-a2), prod_terms)
        outputs.append([(k, c / 4.0) for k, c in plus] + [(k, -c / 4.0) for k, c in minus])
    w_out = [l3.readout(o).row for o in outputs]

    w_out = np.array([np.pad(r, (0, l3.size - r.size)) for r in w_out])
    return NeuralNetwork([l1.weights(d), l2.weights(l1.size), l3.weights(l2.size), (w_out, np.zeros(d))])


# -- closed forms ------------------------------------------------------------------


def expected_max_gaussian(x: np.ndarray, sigma: float, panels: int = 16, nodes: int = 32) -> np.ndarray:
    """E[max_i (x_i + sigma Z_i)] for independent standard normals, by quadrature.

    Uses E[M] = lo + int_lo^hi (1 - F(t)) dt with F(t) = prod_i Phi((t - x_i)/sigma)
    and composite Gauss-Legendre on [min x - 10 sigma, max x + 10 sigma].
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if sigma == 0.0:
        return x.max(axis=1)
    lo = x.min(axis=1) - 10.0 * sigma
    hi = x.max(axis=1) + 10.0 * sigma
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    u = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * gx).ravel()
    w = (np.tile(gw, panels) / (2 * panels))
    t = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    log_f = log_ndtr((t[:, :, None] - x[:, None, :]) / sigma).sum(axis=2)
    integrand = -np.expm1(log_f)
    return lo + (hi - lo) * (integrand @ w)


# -- catalog -----------------------------------------------------------------------


def _sum(x):
    return x.sum(axis=1)


def _sqnorm(x):
    return np.einsum("ij,ij->i", x, x)


def _bounded(x):
    return x / (1.0 + _sqnorm(x))[:, None]


def make_problem(name: str, d: int, T: float = 1.0, measure: Measure | None = None,
                 radius: float = 6.0, spacing: float | None = None) -> KolmogorovProblem:
    """Build a catalog problem with diffusion matrix A = I_d.

    ``radius`` and ``spacing`` control the interpolating surrogates of squares
    (heat-quadratic, ou-quadratic) and of the bounded drift.
    """
    if d < 1:
        raise ValueError("d must be positive")
    measure = measure or Measure.uniform_cube()
    A = np.eye(d)
    common = dict(d=d, A=A, T=T, measure=measure)
    zero = lambda x: np.zeros_like(x)  # noqa: E731
    ou = lambda x: -x  # noqa: E731

    if name == "heat-linear":
        return KolmogorovProblem(
            name, drift=zero, initial_value=_sum, drift_growth=(0.0, 0.0), f0_growth=1.0,
            drift_net=zero_net(d, d), f0_net=linear_net(np.ones((1, d))),
            exact=lambda x, t: _sum(x), zero_drift=True, **common)
    if name == "heat-quadratic":
        return KolmogorovProblem(
            name, drift=zero, initial_value=_sqnorm, drift_growth=(0.0, 0.0), f0_growth=2.0,
            f0_lip_exponent=1.0, drift_net=zero_net(d, d),
            f0_net=square_sum_net(d, radius, spacing or 0.5),
            exact=lambda x, t: _sqnorm(x) + 2.0 * d * t, zero_drift=True, **common)
    if name == "heat-max":
        return KolmogorovProblem(
            name, drift=zero, initial_value=lambda x: x.max(axis=1), drift_growth=(0.0, 0.0),
            f0_growth=1.0, drift_net=zero_net(d, d), f0_net=max_net(d),
            exact=lambda x, t: expected_max_gaussian(x, math.sqrt(2.0 * t)), zero_drift=True, **common)
    if name == "ou-linear":
        return KolmogorovProblem(
            name, drift=ou, initial_value=_sum, drift_lipschitz=1.0, drift_growth=(0.0, 1.0),
            f0_growth=1.0, drift_net=linear_net(-np.eye(d)), f0_net=linear_net(np.ones((1, d))),
            exact=lambda x, t: math.exp(-t) * _sum(x), **common)
    if name == "ou-quadratic":
        return KolmogorovProblem(
            name, drift=ou, initial_value=_sqnorm, drift_lipschitz=1.0, drift_growth=(0.0, 1.0),
            f0_growth=2.0, f0_lip_exponent=1.0, drift_net=linear_net(-np.eye(d)),
            f0_net=square_sum_net(d, radius, spacing or 0.5),
            exact=lambda x, t: math.exp(-2 * t) * _sqnorm(x) + d * (1 - math.exp(-2 * t)), **common)
    if name == "bounded-drift":
        return KolmogorovProblem(
            name, drift=_bounded, initial_value=lambda x: x.max(axis=1), drift_lipschitz=1.0,
            drift_growth=(0.5, 0.0), f0_growth=1.0,
            drift_net=bounded_drift_net(d, radius, spacing or 0.5), f0_net=max_net(d), **common)
    raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")
