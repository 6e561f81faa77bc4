"""Inequality checkers, randomized calculus checks and convergence-rate sweeps.

Every checker returns a ``CheckResult`` with both sides of the inequality.
Statistical checks are one-sided with a slack of three standard errors.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import calculus
from .constructor import (
    certified_exponents,
    cube_eta,
    euler_network_pipeline,
    hypothesis_kappa,
    closed_form_report,
)
from .network import NeuralNetwork, param_count, realize
from .oracle import ReferenceSolution, lp_error
from .problems import PROBLEMS, make_problem
from .rng import derive_seed, map_chunks, stream
from .sde import (
    EulerConfig,
    KolmogorovProblem,
    brownian_moment,
    brownian_moment_bound,
    sample_noises,
    simulate_coupled,
)

SLACK = 3.0
INFLATE = 1.1
PROBE_RADIUS = 5.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    lhs: float
    rhs: float
    stderr: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "lhs": self.lhs, "rhs": self.rhs,
                "stderr": self.stderr, "details": self.details}


def _one_sided(lhs, rhs, se) -> bool:
    return bool(lhs <= rhs + SLACK * se)


# -- probability inequalities ------------------------------------------------------

DISTRIBUTIONS: dict[str, Callable] = {
    "uniform": lambda rng, n: rng.random(n),
    "abs-normal": lambda rng, n: np.abs(rng.standard_normal(n)),
    "exponential": lambda rng, n: rng.exponential(1.0, n),
    "lognormal": lambda rng, n: rng.lognormal(0.0, 0.5, n),
    "chi-square-3": lambda rng, n: rng.chisquare(3, n),
    "constant": lambda rng, n: np.full(n, 0.25),
}


def markov_check(sampler: Callable, epsilon: float, q: float = 1.0, samples: int = 100_000,
                 seed: int = 0, name: str = "markov") -> CheckResult:
    """P(|X| >= eps) <= E|X|^q / eps^q on ``samples`` draws of ``sampler(rng, n)``."""
    if samples < 1000:
        raise ValueError("markov_check needs at least 1000 samples")
    if epsilon <= 0 or q <= 0:
        raise ValueError("epsilon and q must be positive")

    def chunk(rng, n, _):
        x = np.abs(np.asarray(sampler(rng, n), dtype=np.float64))
        ind = (x >= epsilon).astype(np.float64)
        mom = (x / epsilon) ** q
        return ind.sum(), mom.sum(), (mom**2).sum()

    parts = map_chunks(chunk, samples, seed, "markov", name)
    n = samples
    lhs = sum(a for a, _, _ in parts) / n
    m1 = sum(b for _, b, _ in parts) / n
    m2 = sum(c for _, _, c in parts) / n
    se_l = math.sqrt(lhs * (1 - lhs) / n)
    se_r = math.sqrt(max(m2 - m1**2, 0.0) / n)
    se = math.hypot(se_l, se_r)
    return CheckResult(name, _one_sided(lhs, m1, se), lhs, m1, se,
                       {"epsilon": epsilon, "q": q, "samples": n,
                        "root_form": [lhs ** (1 / q), m1 ** (1 / q)]})


def brownian_moment_check(diff, t: float, p: float, samples: int = 100_000, seed: int = 0) -> CheckResult:
    est = brownian_moment(diff, t, p, samples, seed)
    bound = brownian_moment_bound(diff, t, p)
    return CheckResult("brownian-moment", _one_sided(est.estimate, bound, est.stderr),
                       est.estimate, bound, est.stderr, {"t": t, "p": p, "samples": samples})


# -- a-priori and perturbation bounds ----------------------------------------------


def _start(problem, x0):
    return np.full(problem.d, 0.5) if x0 is None else np.asarray(x0, dtype=np.float64).reshape(problem.d)


def apriori_check(problem: KolmogorovProblem, x0=None, delta: float = 0.5, p: float = 2.0,
                  samples: int = 10_000, seed: int = 0, refine: int = 8) -> CheckResult:
    """sup_t (E||Y_t||^p)^(1/p) <= (||xi|| + C T + varpi_p) e^(c T) for the Euler scheme.

    The supremum runs over a grid ``refine`` times finer than the Euler grid, on
    which the frozen-drift process is tracked exactly.
    """
    xi = _start(problem, x0)
    cfg = EulerConfig(delta, problem.T)
    B = problem.diffusion
    hf = cfg.h / refine
    times = cfg.steps * refine

    def chunk(rng, n, _):
        y = np.tile(xi, (n, 1))
        acc = np.zeros(times + 1)
        acc2 = np.zeros(times + 1)
        r = np.linalg.norm(y, axis=1) ** p
        acc[0], acc2[0] = r.sum(), (r**2).sum()
        j = 0
        for _k in range(cfg.steps):
            a = problem.drift(y)
            for _ in range(refine):
                y = y + hf * a + (rng.standard_normal((n, problem.d)) * math.sqrt(hf)) @ B.T
                j += 1
                r = np.linalg.norm(y, axis=1) ** p
                acc[j], acc2[j] = r.sum(), (r**2).sum()
        return acc, acc2

    parts = map_chunks(chunk, samples, seed, "apriori", problem.name)
    m1 = sum(a for a, _ in parts) / samples
    m2 = sum(b for _, b in parts) / samples
    roots = m1 ** (1 / p)
    k = int(np.argmax(roots))
    se_m = math.sqrt(max(m2[k] - m1[k] ** 2, 0.0) / samples)
    se = (1 / p) * m1[k] ** (1 / p - 1) * se_m if m1[k] > 0 else 0.0
    C, c = problem.drift_growth
    varpi = brownian_moment(B, problem.T, p, samples, derive_seed(seed, "varpi"))
    rhs = (np.linalg.norm(xi) + C * problem.T + varpi.estimate) * math.exp(c * problem.T)
    se_tot = math.hypot(se, varpi.stderr * math.exp(c * problem.T))
    return CheckResult("apriori", _one_sided(float(roots[k]), rhs, se_tot), float(roots[k]), float(rhs),
                       se_tot, {"problem": problem.name, "delta": delta, "p": p, "argmax_time": k * hf})


def _coupled(problem, x0, delta, p, samples, seed, label, drift_y=None, refine=64):
    xi = _start(problem, x0)
    cfg = EulerConfig(delta, problem.T)
    drift_y = drift_y or problem.drift

    def chunk(rng, n, _):
        return simulate_coupled(problem.drift, drift_y, xi, xi, problem.diffusion, cfg, rng, n, p, refine)

    parts = map_chunks(chunk, samples, seed, label, problem.name)
    return xi, cfg, {k: np.concatenate([o[k] for o in parts]) for k in parts[0]}


def pathwise_check(problem: KolmogorovProblem, x0=None, delta: float = 0.5, p: float = 2.0,
                   samples: int = 10_000, seed: int = 0, gap: float = 1.0) -> CheckResult:
    """Per path: ||X_T - Y_T||^p <= exp([L + (1 - 1/p)/gap] p T) gap^(p-1) int ||a_s - f(Y_s)||^p ds.

    ``gap`` is the free positive parameter of the pathwise estimate; X and Y
    start at the same point.  Holds deterministically, so the slack is only
    relative roundoff.
    """
    _, _, out = _coupled(problem, x0, delta, p, samples, seed, "pathwise")
    L, T = problem.drift_lipschitz, problem.T
    lhs = np.linalg.norm(out["XT"] - out["YT"], axis=1) ** p
    rhs = math.exp((L + (1 - 1 / p) / gap) * p * T) * gap ** (p - 1) * out["defect"]
    worst = float(np.max(lhs - rhs * (1 + 1e-9) - 1e-300))
    ratio = float(np.max(lhs / np.maximum(rhs, 1e-300)))
    return CheckResult("pathwise", worst <= 0, float(lhs.max()), float(rhs[np.argmax(lhs)]), 0.0,
                       {"problem": problem.name, "delta": delta, "p": p, "gap": gap,
                        "paths": samples, "max_ratio": ratio})


def strong_perturbation_check(problem: KolmogorovProblem, x0=None, delta: float = 0.5, p: float = 2.0,
                              samples: int = 10_000, seed: int = 0,
                              gaps: Sequence[float] = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0)) -> CheckResult:
    """(E||X_T - Y_T||^p)^(1/p) <= exp([L + (1-1/p)/gap] T) gap^(1-1/p) (int E||a_s - f(Y_s)||^p ds)^(1/p).

    The right side is minimized over the listed ``gaps``.
    """
    _, _, out = _coupled(problem, x0, delta, p, samples, seed, "strong")
    L, T = problem.drift_lipschitz, problem.T
    err = np.linalg.norm(out["XT"] - out["YT"], axis=1) ** p
    m, se_m = float(err.mean()), float(err.std(ddof=1) / math.sqrt(samples))
    lhs = m ** (1 / p)
    se_l = (1 / p) * m ** (1 / p - 1) * se_m if m > 0 else 0.0
    dm = float(out["defect"].mean())
    dse = float(out["defect"].std(ddof=1) / math.sqrt(samples))
    rhs_all = [math.exp((L + (1 - 1 / p) / g) * T) * g ** (1 - 1 / p) * dm ** (1 / p) for g in gaps]
    j = int(np.argmin(rhs_all))
    g = gaps[j]
    scale = math.exp((L + (1 - 1 / p) / g) * T) * g ** (1 - 1 / p)
    se_r = scale * (1 / p) * dm ** (1 / p - 1) * dse if dm > 0 else 0.0
    se = math.hypot(se_l, se_r)
    return CheckResult("strong-perturbation", _one_sided(lhs, rhs_all[j], se), lhs, rhs_all[j], se,
                       {"problem": problem.name, "delta": delta, "p": p, "gap": g, "samples": samples})


def _ball(rng, n, d, radius=PROBE_RADIUS):
    v = rng.standard_normal((n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.random((n, 1)) ** (1.0 / d)


def _segment_power(a, b, ell):
    """int_0^1 (r a + (1 - r) b)^ell dr."""
    if ell == 0:
        return np.ones_like(a)
    diff = a - b
    safe = np.abs(diff) > 1e-12 * np.maximum(1.0, np.maximum(a, b))
    out = np.where(safe, (a ** (ell + 1) - b ** (ell + 1)) / ((ell + 1) * np.where(safe, diff, 1.0)),
                   ((a + b) / 2) ** ell)
    return out


@dataclass(frozen=True)
class PerturbationConstants:
    eps0: float
    eps1: float
    sig0: float
    sig1: float
    L0: float
    L1: float
    ell: float
    C: float
    c: float


def estimate_constants(problem: KolmogorovProblem, phi0: Callable, phi1: Callable,
                       probes: int = 10_000, seed: int = 0, sig0: float = 1.0,
                       sig1: float = 1.0) -> PerturbationConstants:
    """Empirical maxima of the defining ratios on ||x|| <= 5, inflated by 10%."""
    rng = stream(seed, "constants", problem.name, problem.d)
    d = problem.d
    x = _ball(rng, probes, d)
    y = np.where(rng.random((probes, 1)) < 0.5,
                 x + rng.standard_normal((probes, d)) * rng.choice([1e-3, 1e-1], (probes, 1)),
                 _ball(rng, probes, d))
    nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
    f0x, p0x, p0y = problem.initial_value(x), phi0(x), phi0(y)
    f1x, f1y, p1x = problem.drift(x), problem.drift(y), phi1(x)
    if not all(np.isfinite(a).all() for a in (p0x, p0y, p1x)):
        raise ArithmeticError("surrogates are not finite on the probe set")
    dxy = np.linalg.norm(x - y, axis=1)
    ok = dxy > 0
    eps0 = INFLATE * float(np.max(np.abs(p0x - f0x) / (1 + nx**sig0)))
    eps1 = INFLATE * float(np.max(np.linalg.norm(p1x - f1x, axis=1) / (1 + nx**sig1)))
    ell = problem.f0_lip_exponent
    L0 = INFLATE * float(np.max(np.abs(p0x - p0y)[ok] / ((1 + _segment_power(nx, ny, ell)) * dxy)[ok]))
    L1_est = float(np.max(np.linalg.norm(f1x - f1y, axis=1)[ok] / dxy[ok]))
    L1 = max(problem.drift_lipschitz, INFLATE * L1_est)
    c = problem.drift_growth[1]
    C = max(problem.drift_growth[0], INFLATE * float(np.max(np.linalg.norm(p1x, axis=1) - c * nx)))
    return PerturbationConstants(eps0, eps1, sig0, sig1, L0, L1, ell, C, c)


def weak_rhs(k: PerturbationConstants, xi, T: float, h: float, p: float, varpi: float,
             f1_zero: float) -> float:
    """Right side of the weak perturbation estimate with phi_2 = identity."""
    rate = (k.ell + 3 + 2 * k.L1
            + (k.ell * max(k.L1, k.c) + k.c * max(k.sig1, 1) + k.L1 * max(k.sig0, 1) + 2) * T)
    base = (float(np.linalg.norm(xi)) + 2.0 + max(1.0, k.C, f1_zero) * max(1.0, T) + varpi)
    power = max(1.0, k.sig0, k.sig1) + k.ell
    return (k.eps0 + k.eps1 + math.sqrt(h / T)) * math.exp(rate) * base**power * max(1.0, k.L0)


def weak_moment_index(k: PerturbationConstants, p: float) -> float:
    q = p / (p - 1)
    return max(k.sig0, k.sig1 * p, p, k.ell * q)


def weak_perturbation_check(problem: KolmogorovProblem, delta: float = 0.5, p: float = 2.0,
                            samples: int = 10_000, seed: int = 0, x0=None,
                            phi0: Callable | None = None, phi1: Callable | None = None,
                            probes: int = 10_000, refine: int = 64) -> CheckResult:
    """|E f0(X_T) - E phi0(Y_T)| against the closed-form weak perturbation bound.

    ``phi0``/``phi1`` default to the problem's network surrogates.
    """
    phi0 = phi0 or problem.f0_surrogate()
    phi1 = phi1 or problem.drift_surrogate()
    consts = estimate_constants(problem, phi0, phi1, probes, derive_seed(seed, "constants"))
    xi = _start(problem, x0)
    cfg = EulerConfig(delta, problem.T)

    def chunk(rng, n, _):
        out = simulate_coupled(problem.drift, phi1, xi, xi, problem.diffusion, cfg, rng, n, p, refine)
        return problem.initial_value(out["XT"]) - phi0(out["YT"])

    diffs = np.concatenate(map_chunks(chunk, samples, seed, "weak", problem.name))
    lhs = abs(float(diffs.mean()))
    se = float(diffs.std(ddof=1) / math.sqrt(samples))
    r = weak_moment_index(consts, p)
    varpi = brownian_moment(problem.diffusion, problem.T, r, samples, derive_seed(seed, "varpi"))
    f1_zero = float(np.linalg.norm(problem.drift(np.zeros((1, problem.d)))))
    rhs = weak_rhs(consts, xi, problem.T, cfg.h, p, varpi.estimate, f1_zero)
    details = {"problem": problem.name, "delta": delta, "h": cfg.h, "p": p, "samples": samples,
               "varpi_index": r, **{k: getattr(consts, k) for k in consts.__dataclass_fields__}}
    return CheckResult("weak-perturbation", _one_sided(lhs, rhs, se), lhs, rhs, se, details)


# -- randomized calculus checks ----------------------------------------------------


def random_network(rng: np.random.Generator, dims: Sequence[int], activation: str = "relu") -> NeuralNetwork:
    layers = []
    for n in range(1, len(dims)):
        w = rng.standard_normal((dims[n], dims[n - 1])) / math.sqrt(dims[n - 1])
        layers.append((w, 0.5 * rng.standard_normal(dims[n])))
    return NeuralNetwork(layers, activation)


def synthetic_identity(d: int, copies: int = 2) -> NeuralNetwork:
    """Depth-2 identity with hidden width 2 d copies: each sign unit duplicated."""
    w1 = np.kron(np.ones((copies, 1)), np.kron(np.eye(d), np.array([[1.0], [-1.0]])))
    w2 = np.kron(np.ones((1, copies)), np.kron(np.eye(d), np.array([[1.0, -1.0]]))) / copies
    return NeuralNetwork([(w1, np.zeros(2 * d * copies)), (w2, np.zeros(d))])


def _dims(rng, d_in, d_out, depth=None, width=8):
    depth = depth or int(rng.integers(2, 5))
    return [d_in] + [int(rng.integers(1, width + 1)) for _ in range(depth - 1)] + [d_out]


def _probes(rng, d, n=50):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True) * 10.0 * rng.random((n, 1))


def calculus_suite(trials: int = 200, seed: int = 0, tol: float = 1e-9) -> list[CheckResult]:
    """Realization, architecture and parameter-bound checks on random instances."""
    rng = stream(seed, "calculus")
    results = []
    worst = {"weighted_sum": 0.0, "compose": 0.0, "residual_step": 0.0}
    fails = {k: [] for k in worst}
    slack = {k: [] for k in worst}
    for t in range(trials):
        # weighted sum
        M = int(rng.integers(1, 5))
        dims = _dims(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        nets = [random_network(rng, dims) for _ in range(M)]
        h = rng.standard_normal(M)
        out = calculus.weighted_sum(nets, h)
        x = _probes(rng, dims[0])
        err = float(np.max(np.abs(realize(out, x) - sum(hm * realize(n, x) for hm, n in zip(h, nets)))))
        bound = calculus.weighted_sum_bound(nets[0], M)
        worst["weighted_sum"] = max(worst["weighted_sum"], err)
        slack["weighted_sum"].append(bound - param_count(out))
        if err > tol or out.dims != calculus.weighted_sum_dims(dims, M) or param_count(out) > bound:
            fails["weighted_sum"].append(t)

        # composition
        d1, d2, d3 = (int(v) for v in rng.integers(1, 9, 3))
        inner = random_network(rng, _dims(rng, d1, d2))
        outer = random_network(rng, _dims(rng, d2, d3))
        ident = calculus.relu_identity(d2) if t % 2 == 0 else synthetic_identity(d2, int(rng.integers(1, 4)))
        out = calculus.compose(outer, inner, ident)
        x = _probes(rng, d1)
        err = float(np.max(np.abs(realize(out, x) - realize(outer, realize(inner, x)))))
        bound = calculus.compose_bound(outer, inner, ident)
        worst["compose"] = max(worst["compose"], err)
        slack["compose"].append(float(bound - param_count(out)))
        if (err > tol or out.dims != calculus.compose_dims(outer.dims, inner.dims, ident.dims[1])
                or param_count(out) > bound):
            fails["compose"].append(t)

        # residual step
        d = int(rng.integers(1, 9))
        ident = calculus.relu_identity(d) if t % 2 == 0 else synthetic_identity(d, int(rng.integers(1, 4)))
        w = ident.dims[1]
        acc_dims = _dims(rng, d, d)
        inc_dims = _dims(rng, d, d)
        inc_dims[-2] = max(inc_dims[-2], acc_dims[-2] - w, 1)
        accum = random_network(rng, acc_dims)
        inc = random_network(rng, inc_dims)
        out = calculus.residual_step(accum, inc, ident)
        x = _probes(rng, d)
        ya = realize(accum, x)
        err = float(np.max(np.abs(realize(out, x) - (ya + realize(inc, ya)))))
        bound = calculus.residual_bound(accum, inc, ident)
        worst["residual_step"] = max(worst["residual_step"], err)
        slack["residual_step"].append(bound - param_count(out))
        if (err > tol or out.dims != calculus.residual_dims(accum.dims, inc.dims, w)
                or param_count(out) > bound):
            fails["residual_step"].append(t)

    for op in worst:
        results.append(CheckResult(
            f"calculus-{op}", not fails[op], worst[op], tol, 0.0,
            {"trials": trials, "failed_trials": fails[op], "min_param_slack": min(slack[op])},
        ))
    return results


def identity_suite(max_d: int = 32) -> list[CheckResult]:
    out = []
    rng = stream(0, "identity")
    for d in range(1, max_d + 1):
        net = calculus.relu_identity(d)
        x = np.vstack([rng.integers(-1000, 1000, (20, d)).astype(float), rng.standard_normal((20, d)) * 1e3])
        err = float(np.max(np.abs(realize(net, x) - x)))
        ok = err == 0.0 and net.dims == (d, 2 * d, d) and param_count(net) == 4 * d * d + 3 * d
        out.append(CheckResult(f"identity-d{d}", ok, err, 0.0, 0.0, {"dims": list(net.dims)}))
    return out


# -- rate sweeps -------------------------------------------------------------------

SWEEP_KINDS = {
    "mc": "MonteCarlo",
    "euler": "EulerWeak",
    "params-d": "ParamGrowthInD",
    "params-eps": "ParamGrowthInEps",
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class SweepResult:
    kind: str
    axis: list
    values: list
    stderrs: list
    slope: float
    slope_stderr: float
    ci: tuple
    r2: float
    intercept: float = 0.0
    extra: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    csv_path: Optional[Path] = None

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(self.extra)
        writer.writerow(["axis", "value", "stderr", *keys])
        for i, (a, v, s) in enumerate(zip(self.axis, self.values, self.stderrs)):
            writer.writerow([_fmt(a), _fmt(v), _fmt(s), *(_fmt(self.extra[k][i]) for k in keys)])
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.csv_text())
        self.csv_path = path
        return path

    def summary(self) -> dict:
        return {"kind": self.kind, "slope": self.slope, "slope_stderr": self.slope_stderr,
                "ci": list(self.ci), "r2": self.r2, "points": len(self.axis), **self.info,
                "csv": str(self.csv_path) if self.csv_path else None}


def fit_loglog(axis, values, level: float = 0.95):
    """OLS of log value on log axis: (slope, stderr, (lo, hi), r2, intercept)."""
    a = np.asarray(axis, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if a.size < 3:
        raise ValueError("a slope fit needs at least 3 points")
    if not (np.all(a > 0) and np.all(v > 0) and np.all(np.isfinite(v))):
        raise ValueError("axis and values must be positive and finite for a log-log fit")
    x, y = np.log(a), np.log(v)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("degenerate fit: zero variance")
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.5 + level / 2, x.size - 2)
    ci = (fit.slope - t * fit.stderr, fit.slope + t * fit.stderr)
    return float(fit.slope), float(fit.stderr), (float(ci[0]), float(ci[1])), float(fit.rvalue**2), float(fit.intercept)


def _make_result(kind, axis, values, stderrs, extra=None):
    axis = list(axis)
    steps = np.diff(np.asarray(axis, dtype=np.float64))
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("sweep axis must be strictly monotone")
    slope, se, ci, r2, icpt = fit_loglog(axis, values)
    return SweepResult(SWEEP_KINDS.get(kind, kind), axis, list(values), list(stderrs), slope, se, ci, r2,
                       icpt, extra or {})


def mc_sweep(problem: KolmogorovProblem, axis=(4, 16, 64, 256), delta: float | None = None, p: float = 2.0,
             replicates: int = 64, probes: int = 1000, seed: int = 0) -> SweepResult:
    """RMS over replicates of the L^p error of M-sample averages, per M."""
    reference = ReferenceSolution.for_problem(problem)
    delta = delta or min(1.0, math.sqrt(problem.T))
    cfg = EulerConfig(delta, problem.T)
    values, errs, reps = [], [], []
    for M in axis:
        e = []
        for r in range(replicates):
            s = derive_seed(seed, "mc-sweep", M, r)
            fn = euler_network_pipeline(problem, cfg, sample_noises(s, M, cfg, problem.d))
            e.append(lp_error(reference, fn, problem.measure, p, probes, derive_seed(seed, "mc-probes"),
                              problem.T, problem.d).estimate)
        e = np.asarray(e)
        ms = float(np.mean(e**2))
        values.append(math.sqrt(ms))
        errs.append(float(np.std(e**2, ddof=1) / math.sqrt(replicates) / (2 * math.sqrt(ms))))
        reps.append(replicates)
    return _make_result("mc", axis, values, errs, {"replicates": reps})


def euler_sweep(problem: KolmogorovProblem, axis=(0.1, 0.05, 0.025, 0.0125), x0=None,
                samples: int = 10_000, seed: int = 0, refine: int = 64) -> SweepResult:
    """|E f0(X_T) - E f0(Y_T)| per step size h, X on a grid ``refine`` times finer."""
    xi = np.ones(problem.d) if x0 is None else np.asarray(x0, dtype=np.float64)
    values, errs, steps = [], [], []
    for h in axis:
        cfg = EulerConfig.from_steps(max(1, round(problem.T / h)), problem.T)

        def chunk(rng, n, _):
            out = simulate_coupled(problem.drift, problem.drift, xi, xi, problem.diffusion, cfg, rng, n,
                                   2.0, refine)
            return problem.initial_value(out["XT"]) - problem.initial_value(out["YT"])

        diff = np.concatenate(map_chunks(chunk, samples, derive_seed(seed, "euler-sweep", cfg.steps),
                                         "euler", problem.name))
        values.append(abs(float(diff.mean())))
        errs.append(float(diff.std(ddof=1) / math.sqrt(samples)))
        steps.append(cfg.steps)
    return _make_result("euler", axis, values, errs, {"steps": steps})


def param_sweep_d(problem_name: str = "heat-max", axis=(1, 2, 4, 8, 16), epsilon: float = 0.2,
                  p: float = 2.0, T: float = 1.0, kappa: float | None = None) -> SweepResult:
    """Parameter count of the construction with the proof's constants, per dimension."""
    problems = [make_problem(problem_name, d, T) for d in axis]
    kappa = kappa or hypothesis_kappa(problems, [epsilon], p)
    eta = cube_eta(kappa, p)
    reps = [closed_form_report(pr, epsilon, kappa, eta, p) for pr in problems]
    counts = [r.param_count for r in reps]
    res = _make_result("params-d", axis, [float(c) for c in counts], [0.0] * len(axis),
                       {"param_count": counts, "M": [r.M for r in reps], "steps": [r.steps for r in reps],
                        "depth": [r.depth for r in reps]})
    res.info = {"kappa": kappa, "eta": eta, "certified_exponent": certified_exponents(kappa, eta, p)[0]}
    return res


def param_sweep_eps(problem_name: str = "heat-max", axis=(0.4, 0.2, 0.1, 0.05), d: int = 2,
                    p: float = 2.0, T: float = 1.0, kappa: float | None = None) -> SweepResult:
    """Parameter count per accuracy; the fit is against 1 / epsilon."""
    problem = make_problem(problem_name, d, T)
    kappa = kappa or hypothesis_kappa([problem], list(axis), p)
    eta = cube_eta(kappa, p)
    reps = [closed_form_report(problem, e, kappa, eta, p) for e in axis]
    counts = [r.param_count for r in reps]
    inv = [1.0 / e for e in axis]
    res = _make_result("params-eps", inv, [float(c) for c in counts], [0.0] * len(axis),
                       {"epsilon": list(axis), "param_count": counts, "M": [r.M for r in reps],
                        "steps": [r.steps for r in reps]})
    res.info = {"kappa": kappa, "eta": eta, "certified_exponent": certified_exponents(kappa, eta, p)[1]}
    return res


def rate_sweep(kind: str, problem=None, axis=None, fixed: dict | None = None, seed: int = 0,
               out=None) -> SweepResult:
    """Dispatch a sweep by kind ('mc', 'euler', 'params-d', 'params-eps' or the long names)."""
    fixed = dict(fixed or {})
    lookup = {v: k for k, v in SWEEP_KINDS.items()}
    kind = lookup.get(kind, kind)
    if kind not in SWEEP_KINDS:
        raise ValueError(f"unknown sweep kind {kind!r}")
    kw = {} if axis is None else {"axis": tuple(axis)}
    if kind in ("mc", "euler"):
        if problem is None:
            problem = "heat-max" if kind == "mc" else "ou-linear"
        if isinstance(problem, str):
            problem = make_problem(problem, int(fixed.pop("d", 2 if kind == "mc" else 1)),
                                   float(fixed.pop("T", 1.0)))
        fn = mc_sweep if kind == "mc" else euler_sweep
        res = fn(problem, seed=seed, **kw, **fixed)
    else:
        name = problem.name if isinstance(problem, KolmogorovProblem) else (problem or "heat-max")
        fn = param_sweep_d if kind == "params-d" else param_sweep_eps
        res = fn(name, **kw, **fixed)
    if out is not None:
        res.write_csv(out)
    return res


# -- named suites ------------------------------------------------------------------


def markov_suite(samples: int = 100_000, seed: int = 0) -> list[CheckResult]:
    out = []
    for name, sampler in DISTRIBUTIONS.items():
        for eps in (0.1, 0.5, 1.0, 2.0):
            for q in (1.0, 2.0, 3.0):
                out.append(markov_check(sampler, eps, q, samples, derive_seed(seed, name, eps, q),
                                        name=f"markov-{name}-eps{eps}-q{q}"))
    return out


def moments_suite(samples: int = 10_000, seed: int = 0, d: int = 2) -> list[CheckResult]:
    out = []
    for dd, t, p in ((1, 1.0, 2.0), (3, 2.0, 4.0), (d, 1.0, 3.0)):
        B = np.sqrt(2.0) * np.eye(dd)
        r = brownian_moment_check(B, t, p, max(samples, 10_000), derive_seed(seed, "bm", dd, p))
        r.name = f"brownian-moment-d{dd}-p{p}"
        out.append(r)
    for name in ("heat-linear", "ou-linear", "ou-quadratic", "bounded-drift"):
        problem = make_problem(name, d)
        r = apriori_check(problem, samples=samples, seed=derive_seed(seed, "apriori", name))
        r.name = f"apriori-{name}"
        out.append(r)
    return out


def perturbation_suite(problems: Sequence[str] = PROBLEMS, d: int = 2,
                       samples: int = 10_000, seed: int = 0, deltas=(0.5, 0.25)) -> list[CheckResult]:
    out = []
    for name in problems:
        problem = make_problem(name, d)
        for delta in deltas:
            s = derive_seed(seed, name, delta)
            for fn in (pathwise_check, strong_perturbation_check, weak_perturbation_check):
                r = fn(problem, delta=delta, samples=samples, seed=s)
                r.name = f"{r.name}-{name}-delta{delta}"
                out.append(r)
    return out


SUITES = {
    "calculus": lambda samples, seed, **kw: calculus_suite(seed=seed) + identity_suite(),
    "markov": lambda samples, seed, **kw: markov_suite(samples or 100_000, seed),
    "moments": lambda samples, seed, **kw: moments_suite(samples or 10_000, seed, kw.get("d") or 2),
    "perturbation": lambda samples, seed, **kw: perturbation_suite(
        kw.get("problems") or PROBLEMS, kw.get("d") or 2,
        samples or 10_000, seed),
}


def run_suite(name: str, samples: int | None = None, seed: int = 0, **kw) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](samples, seed, **kw)
