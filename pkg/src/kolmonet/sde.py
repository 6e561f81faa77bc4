"""Additive-noise SDEs dX = f_1(X) dt + sqrt(2A) dW and their Euler-Maruyama schemes.

Drift and initial-value callables act on batches: ``drift(x)`` maps ``(n, d)`` to
``(n, d)`` and ``initial_value(x)`` maps ``(n, d)`` to ``(n,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import NumericError, ShapeError
from .network import NeuralNetwork, realize
from .rng import derive_seed, map_chunks, stream

SYMMETRY_TOL = 1e-12
EIGEN_CLAMP = 1e-10
FINE_FACTOR = 64

Drift = Callable[[np.ndarray], np.ndarray]


def diffusion_factor(A) -> np.ndarray:
    """Symmetric PSD square root of 2A via an eigendecomposition.

    Eigenvalues down to -1e-10 are clamped to zero; anything more negative is
    rejected as not positive semidefinite.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"diffusion matrix must be square, got {A.shape}")
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL:
        raise ValueError("diffusion matrix is not symmetric")
    sym = 0.5 * (A + A.T)
    lam, u = np.linalg.eigh(2.0 * sym)
    if lam.size and lam.min() < -2.0 * EIGEN_CLAMP:
        raise ValueError(f"diffusion matrix has negative eigenvalue {lam.min() / 2:.3e}")
    root = (u * np.sqrt(np.clip(lam, 0.0, None))) @ u.T
    return 0.5 * (root + root.T)


def grid_projection(t: float, h: float) -> float:
    """Largest multiple of ``h`` not exceeding ``t``."""
    if h <= 0:
        raise ValueError("step must be positive")
    k = math.floor(t / h)
    # t within roundoff of the next grid point counts as on the grid
    if (k + 1) * h <= t + 1e-12 * max(abs(t), h):
        return min((k + 1) * h, t)
    return k * h


@dataclass(frozen=True)
class EulerConfig:
    """Step-size parameter ``delta`` with step ``h ~ delta**2`` snapped so steps * h = T."""

    delta: float
    T: float = 1.0
    steps: int = field(init=False)
    h: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.T <= 0:
            raise ValueError("T must be positive")
        steps = max(1, round(self.T / self.delta**2))
        object.__setattr__(self, "steps", int(steps))
        object.__setattr__(self, "h", self.T / steps)

    @classmethod
    def from_steps(cls, steps: int, T: float = 1.0) -> "EulerConfig":
        """Config with exactly ``steps`` steps of length T / steps."""
        if steps < 1:
            raise ValueError("steps must be positive")
        cfg = object.__new__(cls)
        object.__setattr__(cfg, "delta", math.sqrt(T / steps))
        object.__setattr__(cfg, "T", T)
        object.__setattr__(cfg, "steps", int(steps))
        object.__setattr__(cfg, "h", T / steps)
        return cfg

    def chi(self, t: float) -> float:
        return grid_projection(t, self.h)


@dataclass(frozen=True)
class NoiseRealization:
    """Brownian increments of one sample path: ``steps x d`` draws of N(0, h)."""

    seed: int
    increments: np.ndarray
    h: float

    @classmethod
    def draw(cls, seed: int, steps: int, d: int, h: float) -> "NoiseRealization":
        rng = stream(seed, "noise")
        dw = rng.standard_normal((steps, d)) * math.sqrt(h)
        dw.setflags(write=False)
        return cls(int(seed), dw, float(h))

    @property
    def steps(self) -> int:
        return self.increments.shape[0]

    def mirrored(self) -> "NoiseRealization":
        neg = -self.increments
        neg.setflags(write=False)
        return NoiseRealization(self.seed, neg, self.h)


@dataclass(frozen=True)
class Measure:
    """Probability measure nu_d on R^d used to weight the approximation error."""

    kind: str = "uniform_cube"
    point: Optional[tuple] = None
    scale: float = 1.0

    @classmethod
    def uniform_cube(cls):
        return cls("uniform_cube")

    @classmethod
    def gaussian(cls, scale=1.0):
        return cls("gaussian", scale=float(scale))

    @classmethod
    def point_mass(cls, x):
        return cls("point", point=tuple(float(v) for v in np.ravel(x)))

    def sample(self, rng: np.random.Generator, n: int, d: int) -> np.ndarray:
        if self.kind == "uniform_cube":
            return rng.random((n, d))
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal((n, d))
        if self.kind == "point":
            if len(self.point) != d:
                raise ShapeError(f"point mass lives in R^{len(self.point)}, not R^{d}")
            return np.tile(np.asarray(self.point), (n, 1))
        raise ValueError(f"unknown measure kind {self.kind!r}")


@dataclass(frozen=True)
class KolmogorovProblem:
    """PDE data: u_t = f_1 . grad u + sum a_ij d_ij u, u(0, .) = f_0.

    ``drift_growth`` is (C, c) with ||f_1(x)|| <= C + c ||x||; ``f0_growth`` the
    polynomial growth exponent of f_0.  ``exact(x, T)`` is an optional closed
    form of u(T, x) on a batch.
    """

    name: str
    d: int
    A: np.ndarray
    drift: Drift
    initial_value: Callable[[np.ndarray], np.ndarray]
    T: float = 1.0
    measure: Measure = Measure()
    drift_lipschitz: float = 0.0
    drift_growth: tuple = (0.0, 0.0)
    f0_growth: float = 1.0
    f0_lip_exponent: float = 0.0
    drift_net: Optional[NeuralNetwork] = None
    f0_net: Optional[NeuralNetwork] = None
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    zero_drift: bool = False
    diffusion: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        if A.shape != (self.d, self.d):
            raise ShapeError(f"A has shape {A.shape}, expected ({self.d}, {self.d})")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "diffusion", diffusion_factor(A))
        if self.T <= 0:
            raise ValueError("T must be positive")
        for net, din, dout, label in (
            (self.drift_net, self.d, self.d, "drift_net"),
            (self.f0_net, self.d, 1, "f0_net"),
        ):
            if net is not None and (net.input_dim != din or net.output_dim != dout):
                raise ShapeError(f"{label} has dims {net.dims}, expected R^{din} -> R^{dout}")
        self._spot_check_lipschitz()

    def _spot_check_lipschitz(self, pairs: int = 256):
        rng = stream(0, "lipschitz", self.name, self.d)
        x = 3.0 * rng.standard_normal((pairs, self.d))
        y = x + rng.standard_normal((pairs, self.d)) * rng.choice([1e-3, 1e-1, 1.0], (pairs, 1))
        lhs = np.linalg.norm(self.drift(x) - self.drift(y), axis=1)
        rhs = self.drift_lipschitz * np.linalg.norm(x - y, axis=1) * (1 + 1e-6)
        if np.any(lhs > rhs + 1e-12):
            raise ValueError(
                f"drift of {self.name!r} violates its declared Lipschitz constant {self.drift_lipschitz}"
            )

    @property
    def has_networks(self) -> bool:
        return self.drift_net is not None and self.f0_net is not None

    def drift_surrogate(self) -> Drift:
        if self.drift_net is None:
            return self.drift
        net = self.drift_net
        return lambda x: realize(net, x)

    def f0_surrogate(self):
        if self.f0_net is None:
            return self.initial_value
        net = self.f0_net
        return lambda x: realize(net, x)[:, 0]


# -- path simulation -----------------------------------------------------------


def _check_finite(y, step):
    if not np.isfinite(y).all():
        raise NumericError(f"non-finite state at step {step}", step=step)


def euler_path(drift: Drift, x0, diff, cfg: EulerConfig, noise: NoiseRealization,
               return_path: bool = False):
    """Euler-Maruyama endpoint Y_T for one noise realization.

    ``x0`` may be a single point ``(d,)`` or a batch ``(n, d)`` of starting points
    all driven by the same noise.  Returns ``(endpoint, path)`` where ``path`` is
    ``None`` unless ``return_path`` is set.
    """
    if not math.isclose(noise.h, cfg.h, rel_tol=1e-12, abs_tol=0.0) or noise.steps != cfg.steps:
        raise ValueError(f"noise grid (h={noise.h}, {noise.steps} steps) does not match the config")
    x0 = np.asarray(x0, dtype=np.float64)
    single = x0.ndim == 1
    y = np.atleast_2d(x0).copy()
    diff = np.atleast_2d(np.asarray(diff, dtype=np.float64))
    if y.shape[1] != diff.shape[0] or noise.increments.shape[1] != diff.shape[1]:
        raise ShapeError("dimensions of x0, diffusion and noise disagree")
    shifts = noise.increments @ diff.T
    path = [y.copy()] if return_path else None
    for k in range(cfg.steps):
        y = y + cfg.h * drift(y) + shifts[k]
        _check_finite(y, k + 1)
        if return_path:
            path.append(y.copy())
    if return_path:
        path = np.stack(path, axis=1)
        if single:
            path = path[0]
    return (y[0] if single else y), path


def euler_batch(drift: Drift, y0: np.ndarray, diff: np.ndarray, h: float, dw: np.ndarray,
                record: bool = False):
    """Euler-Maruyama on a batch: ``dw`` has shape (n, steps, d)."""
    y = np.broadcast_to(np.asarray(y0, dtype=np.float64), (dw.shape[0], dw.shape[2])).copy()
    shifts = dw @ diff.T
    path = [y.copy()] if record else None
    for k in range(dw.shape[1]):
        y += h * drift(y) + shifts[:, k]
        _check_finite(y, k + 1)
        if record:
            path.append(y.copy())
    return (y, np.stack(path, axis=1)) if record else y


def simulate_coupled(drift_x: Drift, drift_y: Drift, x0, y0, diff, cfg: EulerConfig,
                     rng: np.random.Generator, n: int, p: float = 2.0,
                     refine: int = FINE_FACTOR):
    """Fine-grid reference X and Euler scheme Y driven by one Brownian path.

    X uses ``drift_x`` on the grid h / refine; Y freezes ``drift_y`` at the last
    coarse grid point, a_s = drift_y(Y_chi(s)), and is tracked on the fine grid
    as well.  Returns per-sample arrays: ``XT``, ``YT``, ``WT`` (B W_T) and
    ``defect`` = left-point quadrature of int_0^T ||a_s - drift_x(Y_s)||^p ds.
    """
    d = diff.shape[0]
    hf = cfg.h / refine
    x = np.broadcast_to(np.asarray(x0, dtype=np.float64), (n, d)).copy()
    y = np.broadcast_to(np.asarray(y0, dtype=np.float64), (n, d)).copy()
    bw = np.zeros((n, d))
    defect = np.zeros(n)
    sq = math.sqrt(hf)
    for k in range(cfg.steps):
        a = drift_y(y)
        dw = rng.standard_normal((n, refine, d)) * sq
        shifts = dw @ diff.T
        for j in range(refine):
            defect += hf * np.linalg.norm(a - drift_x(y), axis=1) ** p
            x += hf * drift_x(x) + shifts[:, j]
            y += hf * a + shifts[:, j]
            bw += shifts[:, j]
        _check_finite(x, k + 1)
        _check_finite(y, k + 1)
    return {"XT": x, "YT": y, "WT": bw, "defect": defect}


def _root_moment(values: np.ndarray, p: float):
    """(mean v)^(1/p) with a delta-method standard error."""
    n = values.size
    m = float(np.mean(values))
    if m <= 0.0 or n < 2:
        return max(m, 0.0) ** (1.0 / p), 0.0
    se_m = float(np.std(values, ddof=1)) / math.sqrt(n)
    return m ** (1.0 / p), (1.0 / p) * m ** (1.0 / p - 1.0) * se_m


@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    stderr: float
    samples: int


def coupled_strong_error(problem: KolmogorovProblem, x0, delta: float, p: float = 2.0,
                         samples: int = 10_000, seed: int = 0,
                         refine: int = FINE_FACTOR) -> MomentEstimate:
    """Monte Carlo estimate of (E ||X_T - Y_T||^p)^(1/p) for the Euler scheme."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if p < 2:
        raise ValueError("p must be at least 2")
    cfg = EulerConfig(delta, problem.T)

    def chunk(rng, n, _):
        out = simulate_coupled(problem.drift, problem.drift, x0, x0, problem.diffusion,
                               cfg, rng, n, p, refine)
        return np.linalg.norm(out["XT"] - out["YT"], axis=1) ** p

    vals = np.concatenate(map_chunks(chunk, samples, seed, "strong", problem.name))
    est, se = _root_moment(vals, p)
    return MomentEstimate(est, se, samples)


def brownian_moment(diff, t: float, p: float, samples: int = 100_000, seed: int = 0) -> MomentEstimate:
    """Monte Carlo estimate of (E ||B W_t||^p)^(1/p)."""
    if p <= 0 or t < 0:
        raise ValueError("need p > 0 and t >= 0")
    B = np.atleast_2d(np.asarray(diff, dtype=np.float64))

    def chunk(rng, n, _):
        w = rng.standard_normal((n, B.shape[1])) * math.sqrt(t)
        return np.linalg.norm(w @ B.T, axis=1) ** p

    vals = np.concatenate(map_chunks(chunk, samples, seed, "bm"))
    est, se = _root_moment(vals, p)
    return MomentEstimate(est, se, samples)


def brownian_moment_bound(diff, t: float, p: float) -> float:
    """sqrt(max{1, p - 1} Trace(B* B) t)."""
    B = np.atleast_2d(np.asarray(diff, dtype=np.float64))
    return math.sqrt(max(1.0, p - 1.0) * float(np.trace(B.T @ B)) * t)


def sample_noises(seed: int, count: int, cfg: EulerConfig, d: int, offset: int = 0):
    """Noise realizations for samples ``offset .. offset+count-1`` of ``seed``."""
    return [NoiseRealization.draw(derive_seed(seed, "sample", m), cfg.steps, d, cfg.h)
            for m in range(offset, offset + count)]
