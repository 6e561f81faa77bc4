"""Reference values of u(T, x) and Monte Carlo L^p(nu) error measurement."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .network import NeuralNetwork, param_count, realize
from .rng import derive_seed, map_chunks, stream
from .sde import KolmogorovProblem, Measure, MomentEstimate, _check_finite, _root_moment

Z_SCORE = 3.0
REFERENCE_STEPS = 1024


def feynman_kac(problem: KolmogorovProblem, x, T: float | None = None, samples: int = 10_000,
                seed: int = 0, steps: int = REFERENCE_STEPS):
    """Estimate u(T, x) = E f_0(X^x_T) by Monte Carlo over fine-grid Euler paths.

    Zero-drift problems are simulated exactly in one step.  Returns
    ``(estimate, half_width)`` with half_width = 3 standard errors.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    T = problem.T if T is None else float(T)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != problem.d:
        raise ValueError(f"point has dimension {x.shape[0]}, problem has {problem.d}")
    n_steps = 1 if problem.zero_drift else int(steps)
    h = T / n_steps
    B = problem.diffusion

    def chunk(rng, n, _):
        y = np.tile(x, (n, 1))
        for k in range(n_steps):
            dw = rng.standard_normal((n, problem.d)) * math.sqrt(h)
            if problem.zero_drift:
                y += dw @ B.T
            else:
                y += h * problem.drift(y) + dw @ B.T
            _check_finite(y, k + 1)
        vals = problem.initial_value(y)
        return vals.sum(), (vals**2).sum()

    parts = map_chunks(chunk, samples, seed, "feynman-kac", problem.name)
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    half = Z_SCORE * math.sqrt(var / samples) if samples > 1 else math.inf
    if not math.isfinite(mean):
        raise ArithmeticError("Feynman-Kac estimate is not finite")
    return float(mean), float(half)


@dataclass(frozen=True)
class ReferenceSolution:
    """Source of u(T, .) on batches: ``value_fn(x, T) -> (values, half_widths)``."""

    kind: str
    value_fn: Callable
    tag: str = ""
    samples: int = 0
    seed: int = 0

    def __call__(self, x, T):
        return self.value_fn(np.atleast_2d(np.asarray(x, dtype=np.float64)), T)

    @classmethod
    def closed_form(cls, problem: KolmogorovProblem) -> "ReferenceSolution":
        if problem.exact is None:
            raise ValueError(f"problem {problem.name!r} has no closed form")
        fn = problem.exact
        return cls("closed_form", lambda x, T: (np.asarray(fn(x, T), dtype=np.float64), np.zeros(len(x))),
                   tag=problem.name)

    @classmethod
    def monte_carlo(cls, problem: KolmogorovProblem, samples: int = 10_000, seed: int = 0,
                    steps: int = REFERENCE_STEPS) -> "ReferenceSolution":
        cache = {}

        def fn(x, T):
            key = (x.tobytes(), x.shape, float(T))
            if key not in cache:
                out = [feynman_kac(problem, xi, T, samples, derive_seed(seed, "point", i), steps)
                       for i, xi in enumerate(x)]
                cache[key] = (np.array([v for v, _ in out]), np.array([w for _, w in out]))
            return cache[key]

        return cls("monte_carlo", fn, tag=problem.name, samples=samples, seed=seed)

    @classmethod
    def for_problem(cls, problem: KolmogorovProblem, samples: int = 10_000, seed: int = 0):
        if problem.exact is not None:
            return cls.closed_form(problem)
        return cls.monte_carlo(problem, samples, seed)

    @classmethod
    def constant(cls, c: float) -> "ReferenceSolution":
        return cls("closed_form", lambda x, T: (np.full(len(x), float(c)), np.zeros(len(x))),
                   tag=f"constant({c})")


@dataclass
class ErrorReport:
    """Monte Carlo estimate of the L^p(nu) distance between u(T, .) and a network."""

    estimate: float
    half_width: float
    probes: int
    p: float
    param_count: Optional[int] = None
    reference_half_width: float = 0.0
    seconds: float = field(default=0.0, compare=False)

    def as_dict(self, timing: bool = False) -> dict:
        out = {
            "estimate": self.estimate,
            "half_width": self.half_width,
            "probes": self.probes,
            "p": self.p,
            "param_count": self.param_count,
            "reference_half_width": self.reference_half_width,
        }
        if timing:
            out["seconds"] = self.seconds
        return out


def _evaluate(approx, x):
    if isinstance(approx, NeuralNetwork):
        out = realize(approx, x)
        return out[:, 0] if out.ndim == 2 else out
    return np.asarray(approx(x), dtype=np.float64).reshape(len(x))


def lp_error(reference: ReferenceSolution, net, measure: Measure, p: float = 2.0,
             probes: int = 2000, seed: int = 0, T: float = 1.0, d: int | None = None) -> ErrorReport:
    """[int |u(T, x) - net(x)|^p nu(dx)]^(1/p) by Monte Carlo over ``probes`` draws of nu.

    ``net`` is a NeuralNetwork or any batch callable ``(n, d) -> (n,)``.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if probes < 1:
        raise ValueError("need at least one probe")
    start = time.perf_counter()
    if d is None:
        if not isinstance(net, NeuralNetwork):
            raise ValueError("pass d when the approximation is a plain callable")
        d = net.input_dim
    x = measure.sample(stream(seed, "probes"), probes, d)
    u, hw = reference(x, T)
    diffs = np.abs(u - _evaluate(net, x)) ** p
    est, se = _root_moment(diffs, p)
    return ErrorReport(
        estimate=float(est),
        half_width=Z_SCORE * float(se),
        probes=probes,
        p=p,
        param_count=param_count(net) if isinstance(net, NeuralNetwork) else None,
        reference_half_width=float(np.mean(hw)),
        seconds=time.perf_counter() - start,
    )


def moment_of_measure(measure: Measure, exponent: float, d: int, probes: int = 100_000,
                      seed: int = 0) -> MomentEstimate:
    """Monte Carlo estimate of int ||z||^q nu(dz)."""
    if exponent < 0:
        raise ValueError("exponent must be non-negative")

    def chunk(rng, n, _):
        z = measure.sample(rng, n, d)
        r = np.linalg.norm(z, axis=1)
        return r**exponent if exponent else np.ones(n)

    vals = np.concatenate(map_chunks(chunk, probes, seed, "moment"))
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return MomentEstimate(float(np.mean(vals)), se, vals.size)
