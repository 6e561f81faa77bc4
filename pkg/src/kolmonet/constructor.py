"""Assemble Monte Carlo averages of Euler-scheme networks approximating u(T, .).

One sample network hard-codes one Brownian path in its biases: starting from the
ReLU identity, each Euler step is glued on with ``residual_step`` and the initial
value network is composed on top.  Averaging M such networks with
``weighted_sum`` gives the approximation; the path set is chosen among K seeded
candidates by measured error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .calculus import compose, relu_identity, residual_step, weighted_sum
from .exceptions import ArchitectureError, CalibrationError, ShapeError
from .network import NeuralNetwork, param_count, param_count_of_dims, realize, scale_shift_output
from .oracle import ErrorReport, ReferenceSolution, lp_error
from .rng import derive_seed, stream
from .sde import EulerConfig, KolmogorovProblem, NoiseRealization, sample_noises

REPORT_VERSION = 1
_DPS = 50


# -- rate constants ----------------------------------------------------------------


@dataclass(frozen=True)
class RateConstants:
    """Monte Carlo count M and step parameter delta (h ~ delta^2)."""

    M: int
    delta: float
    mode: str = "calibrated"
    log_M: float = 0.0
    log_delta: float = 0.0
    steps: Optional[int] = None
    params: dict = field(default_factory=dict, compare=False)
    trace: tuple = field(default=(), compare=False)

    def as_dict(self) -> dict:
        return {
            "M": self.M,
            "delta": self.delta,
            "mode": self.mode,
            "log_M": self.log_M,
            "log_delta": self.log_delta,
            "steps": self.steps,
            "params": self.params,
            "trace": list(self.trace),
        }


def _check_domain(d, epsilon, kappa, eta, p, T):
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if kappa <= 0 or T <= 0:
        raise ValueError("kappa and T must be positive")
    if eta < 1:
        raise ValueError("eta must be at least 1")
    if p < 2:
        raise ValueError("p must be at least 2")


def paper_constants(d: int, epsilon: float, kappa: float, eta: float, p: float = 2.0,
                    T: float = 1.0, drift_zero_norm: float = 0.0) -> RateConstants:
    """Monte Carlo count and step parameter of the existence proof, evaluated verbatim.

    Arithmetic runs in mpmath, so the values stay finite for very large d and
    tiny epsilon.  ``M`` is the least integer above the count expression,
    ``delta`` the step expression clamped to (0, 1].
    """
    _check_domain(d, epsilon, kappa, eta, p, T)
    with mpmath.workdps(_DPS):
        d_, e_, k_, n_, p_, t_ = (mpmath.mpf(v) for v in (d, epsilon, kappa, eta, p, T))
        iota = max(k_, mpmath.mpf(1))
        kd = k_ * d_**k_
        count = (2 ** (k_ + 4) * p_ * kd * mpmath.exp(k_**2 * t_) / e_) ** 2 * (
            1 + (kd * t_ + mpmath.sqrt(2 * (p_ * iota - 1) * kd * t_)) ** (p_ * k_) + n_ * d_**n_
        ) ** (2 / p_)
        M = max(1, int(mpmath.ceil(count)))
        delta = (
            e_
            / (max(2 * kd, 1) + t_ ** mpmath.mpf(-0.5))
            * mpmath.exp(-(3 + 3 * k_ + (k_**2 + 2 * k_ * iota + 2) * t_))
            / max(1, 2 * k_ * (k_ + 1) * d_**k_)
            * 2 ** (-(2 * iota + 1))
            * (
                (2 + max(1, kd, mpmath.mpf(drift_zero_norm)) * max(1, t_)
                 + mpmath.sqrt(2 * (2 * iota - 1) * kd * t_)) ** (p_ * iota + p_ * k_)
                + n_ * d_**n_
            ) ** (-1 / p_)
        )
        delta = min(delta, mpmath.mpf(1))
        steps = max(1, int(mpmath.nint(t_ / delta**2)))
        return RateConstants(
            M=M,
            delta=float(delta),
            mode="paper",
            log_M=float(mpmath.log(M)),
            log_delta=float(mpmath.log(delta)),
            steps=steps,
            params={"d": d, "epsilon": epsilon, "kappa": kappa, "eta": eta, "p": p, "T": T,
                    "drift_zero_norm": drift_zero_norm},
        )


def log_count_bound(d, epsilon, kappa, eta, p=2.0, T=1.0) -> float:
    """log of the closed upper bound on M with d and epsilon factored out."""
    iota = max(kappa, 1.0)
    with mpmath.workdps(_DPS):
        val = (mpmath.mpf(2) ** (2 * (kappa + 4)) * p**2 * iota**2 * mpmath.exp(2 * kappa**2 * T)
               * (2 + (2 * p * iota * max(1.0, T)) ** (p * kappa) + eta)
               * mpmath.mpf(d) ** (p * kappa * iota + eta + 2 * kappa) * mpmath.mpf(epsilon) ** -2)
        return float(mpmath.log(val))


def log_step_lower_bound(d, epsilon, kappa, eta, p=2.0, T=1.0) -> float:
    """log of the closed lower bound on delta, linear in epsilon."""
    iota = max(kappa, 1.0)
    with mpmath.workdps(_DPS):
        val = (min(1.0, math.sqrt(T)) * mpmath.exp(-(3 * iota**2 + 3) * (T + 1)) * iota**-3
               * mpmath.mpf(2) ** -(2 * iota + 5)
               * ((6 * iota * max(1.0, T)) ** (p * iota + p * kappa) + eta) ** (-1 / p)
               * mpmath.mpf(d) ** -(kappa * (2 + kappa + iota) + eta) * epsilon)
        return float(mpmath.log(val))


def certified_exponents(kappa: float, eta: float, p: float = 2.0) -> tuple[float, float]:
    """Exponents (of d, of 1/epsilon) in the explicit parameter bound."""
    iota = max(kappa, 1.0)
    d_exp = 2 * (p * kappa * iota + eta + 4 * kappa) + (kappa * (2 + kappa + iota) + eta) * (3 * kappa + 2)
    return d_exp, 3 * kappa + 6


def log_param_bound(d, epsilon, kappa, eta, p=2.0, T=1.0) -> float:
    """log of the explicit polynomial bound on the parameter count of the construction."""
    iota = max(kappa, 1.0)
    d_exp, e_exp = certified_exponents(kappa, eta, p)
    with mpmath.workdps(_DPS):
        lead = (mpmath.mpf(2) ** (2 * (kappa + 4)) * p**2 * iota**2 * mpmath.exp(2 * kappa**2 * T)
                * (2 + (2 * p * iota * max(1.0, T)) ** (p * kappa) + eta))
        inner = (min(1.0, math.sqrt(T)) * mpmath.exp(-(3 * iota**2 + 3) * (T + 1)) * iota**-3
                 * mpmath.mpf(2) ** -(2 * iota + 5)
                 * ((6 * iota * max(1.0, T)) ** (p * iota + p * kappa) + eta) ** (-1 / p))
        val = (2 * lead**2 * iota**2 * kappa**2 * (T + 2) * inner ** (-3 * kappa - 2)
               * mpmath.mpf(d) ** d_exp * mpmath.mpf(epsilon) ** -e_exp)
        return float(mpmath.log(val))


# -- hypotheses of the existence statement ----------------------------------------


def cube_eta(kappa: float, p: float = 2.0) -> float:
    """eta with int ||z||^{p(2 kappa + 1)} dz <= eta d^eta on [0,1]^d, using ||z|| <= sqrt(d)."""
    return max(1.0, p * (2 * kappa + 1) / 2)


def check_growth_hypotheses(problem: KolmogorovProblem, epsilon: float, kappa: float, eta: float,
                           p: float = 2.0, probes: int = 2000, seed: int = 0) -> list[str]:
    """Return the violated growth, size and accuracy hypotheses (empty when all hold).

    Pointwise conditions are checked on probe points, not proved.
    """
    if not problem.has_networks:
        return ["problem has no network surrogates"]
    d = problem.d
    kd = kappa * d**kappa
    bad = []
    sizes = param_count(relu_identity(d)) + param_count(problem.f0_net) + param_count(problem.drift_net)
    if sizes > kd * epsilon**-kappa:
        bad.append(f"parameter budget {sizes} > kappa d^kappa eps^-kappa = {kd * epsilon**-kappa:.6g}")
    if problem.drift_lipschitz > kappa:
        bad.append(f"drift Lipschitz constant {problem.drift_lipschitz} > kappa")
    rng = stream(seed, "hypotheses", problem.name, d)
    x = rng.standard_normal((probes, d)) * rng.choice([0.3, 1.0, 3.0, 10.0], (probes, 1))
    y = x + rng.standard_normal((probes, d)) * rng.choice([1e-3, 0.1, 1.0], (probes, 1))
    nx, ny = np.linalg.norm(x, axis=1), np.linalg.norm(y, axis=1)
    tol = 1e-9
    coeff = np.abs(problem.initial_value(x)) + np.abs(problem.A).sum()
    if np.any(coeff > kd * (1 + nx**kappa) + tol):
        bad.append("|f0| + sum |a_ij| exceeds kappa d^kappa (1 + ||x||^kappa)")
    phi1 = realize(problem.drift_net, x)
    if np.any(np.linalg.norm(phi1, axis=1) > kappa * (d**kappa + nx) + tol):
        bad.append("drift network exceeds kappa (d^kappa + ||x||)")
    f0x, f0y = realize(problem.f0_net, x)[:, 0], realize(problem.f0_net, y)[:, 0]
    lip = kd * (1 + nx**kappa + ny**kappa) * np.linalg.norm(x - y, axis=1)
    if np.any(np.abs(f0x - f0y) > lip + tol):
        bad.append("initial-value network violates the local Lipschitz condition")
    err = np.abs(problem.initial_value(x) - f0x) + np.linalg.norm(problem.drift(x) - phi1, axis=1)
    if np.any(err > epsilon * kd * (1 + nx**kappa) + tol):
        bad.append("surrogate error exceeds eps kappa d^kappa (1 + ||x||^kappa)")
    if problem.measure.kind == "uniform_cube":
        moment_bound = d ** (p * (2 * kappa + 1) / 2)
    elif problem.measure.kind == "point":
        moment_bound = float(np.linalg.norm(problem.measure.point)) ** (p * (2 * kappa + 1))
    else:
        moment_bound = math.inf
    if moment_bound > eta * d**eta:
        bad.append("moment of nu exceeds eta d^eta")
    return bad


def hypothesis_kappa(problems: Sequence[KolmogorovProblem], epsilons: Sequence[float],
                     p: float = 2.0, step: float = 0.25, kappa_max: float = 10.0) -> float:
    """Smallest kappa on a grid for which every (problem, epsilon) pair meets the hypotheses."""
    kappa = step
    while kappa <= kappa_max + 1e-12:
        eta = cube_eta(kappa, p)
        if all(not check_growth_hypotheses(pr, e, kappa, eta, p) for pr in problems for e in epsilons):
            return kappa
        kappa += step
    raise ValueError(f"no kappa <= {kappa_max} satisfies the hypotheses")


# -- exact architecture bookkeeping -------------------------------------------------


def _chain_params(pre: Sequence[int], block: Sequence[int], reps: int, post: Sequence[int]) -> int:
    """Parameter count of dims = pre + block * reps + post without expanding the chain."""

    def inner(seq):
        return sum(seq[i] * (seq[i - 1] + 1) for i in range(1, len(seq)))

    total = inner(pre) + inner(post)
    if reps and block:
        total += block[0] * (pre[-1] + 1)
        total += reps * inner(block) + (reps - 1) * block[0] * (block[-1] + 1)
        total += post[0] * (block[-1] + 1)
    else:
        total += post[0] * (pre[-1] + 1)
    return total


def sample_dims(d: int, drift_dims, f0_dims, id_width: int, steps: int, M: int = 1):
    """(pre, block, post) pieces of the architecture of a (Monte Carlo) Euler network."""
    pre = [d, M * id_width]
    block = [M * (h + id_width) for h in drift_dims[1:-1]]
    post = [M * id_width] + [M * l for l in f0_dims[1:-1]] + [f0_dims[-1]]
    return pre, block, post


def mc_param_count(d: int, drift_dims, f0_dims, id_width: int, steps: int, M: int = 1) -> int:
    """Exact parameter count of the averaged network, valid for astronomically many steps."""
    pre, block, post = sample_dims(d, drift_dims, f0_dims, id_width, steps, M)
    return _chain_params(pre, block, steps, post)


def mc_depth(drift_dims, f0_dims, steps: int) -> int:
    return (len(f0_dims) - 1) + steps * (len(drift_dims) - 2) + 2


def mc_architecture(d: int, drift_dims, f0_dims, id_width: int, steps: int, M: int = 1) -> tuple:
    pre, block, post = sample_dims(d, drift_dims, f0_dims, id_width, steps, M)
    return tuple(pre + block * steps + post)


# -- network assembly --------------------------------------------------------------


def _require_networks(problem: KolmogorovProblem):
    if not problem.has_networks:
        raise ValueError(f"problem {problem.name!r} lacks drift/initial-value networks")
    for net in (problem.drift_net, problem.f0_net):
        if net.activation != "relu":
            raise ArchitectureError("the Euler network construction requires ReLU networks")


def _config(delta, T) -> EulerConfig:
    return delta if isinstance(delta, EulerConfig) else EulerConfig(float(delta), T)


def build_sample_network(problem: KolmogorovProblem, delta, noise: NoiseRealization,
                         id_net: NeuralNetwork | None = None) -> NeuralNetwork:
    """Network realizing x -> f0_net(Y_T(x)) for the Euler scheme driven by ``noise``."""
    _require_networks(problem)
    cfg = _config(delta, problem.T)
    if noise.steps != cfg.steps or not math.isclose(noise.h, cfg.h, rel_tol=1e-12):
        raise ShapeError(f"noise grid ({noise.steps} steps of {noise.h}) does not match h = {cfg.h}")
    d = problem.d
    id_net = id_net or relu_identity(d)
    shifts = noise.increments @ problem.diffusion.T
    accum = relu_identity(d)
    for k in range(cfg.steps):
        inc = scale_shift_output(problem.drift_net, cfg.h, shifts[k])
        accum = residual_step(accum, inc, id_net)
    return compose(problem.f0_net, accum, id_net)


def euler_network_pipeline(problem: KolmogorovProblem, cfg: EulerConfig, noises):
    """Batch callable x -> mean_m f0_net(Y^m_T(x)) evaluated numerically.

    Realizes the same function as the averaged network without materializing it.
    """
    drift_net, f0_net, B = problem.drift_net, problem.f0_net, problem.diffusion
    shifts = np.stack([n.increments @ B.T for n in noises])  # (M, steps, d)

    def fn(x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n, M = x.shape[0], shifts.shape[0]
        y = np.tile(x, (M, 1))
        for k in range(cfg.steps):
            y = y + cfg.h * realize(drift_net, y) + np.repeat(shifts[:, k], n, axis=0)
        vals = realize(f0_net, y)[:, 0].reshape(M, n)
        return vals.mean(axis=0)

    return fn


@dataclass
class ConstructionReport:
    """Outcome of a construction: the network (if materialized) and its bookkeeping."""

    network: Optional[NeuralNetwork]
    param_count: int
    depth: int
    M: int
    delta: float
    seed: int
    steps: int
    mode: str = "calibrated"
    trace: list = field(default_factory=list)
    selected: Optional[int] = None
    error: Optional[ErrorReport] = None
    problem: str = ""
    d: int = 0
    epsilon: Optional[float] = None
    p: float = 2.0
    constants: Optional[RateConstants] = None

    def __post_init__(self):
        if self.network is not None:
            if self.depth != len(self.network.dims) - 1:
                raise ValueError("depth disagrees with the network architecture")
            if self.param_count != param_count(self.network):
                raise ValueError("param_count disagrees with the network")

    def to_record(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "kind": "construction_report",
            "problem": self.problem,
            "d": self.d,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "p": self.p,
            "seed": self.seed,
            "M": self.M,
            "delta": self.delta,
            "steps": self.steps,
            "depth": self.depth,
            "param_count": self.param_count,
            "architecture": list(self.network.dims) if self.network is not None else None,
            "selected": self.selected,
            "error": self.error.as_dict() if self.error is not None else None,
            "trace": self.trace,
            "constants": self.constants.as_dict() if self.constants is not None else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_record(), indent=1, sort_keys=True, allow_nan=False)


# dense float64 weights above this size are refused rather than allocated
MAX_NETWORK_BYTES = 2 * 1024**3


def network_bytes(problem: KolmogorovProblem, M: int, delta: float) -> int:
    """Memory of the dense weights of the averaged network, computed without building it."""
    arch = mc_architecture(problem.d, problem.drift_net.dims, problem.f0_net.dims, 2 * problem.d,
                           EulerConfig(delta, problem.T).steps, M)
    return 8 * param_count_of_dims(arch)


def build_mc_network(problem: KolmogorovProblem, constants: RateConstants, seed: int = 0,
                     id_net: NeuralNetwork | None = None, noises=None,
                     max_bytes: int = MAX_NETWORK_BYTES) -> ConstructionReport:
    """Average of M sample networks with weights 1/M (no selection)."""
    _require_networks(problem)
    size = network_bytes(problem, constants.M, constants.delta)
    if size > max_bytes:
        raise ValueError(f"network with M = {constants.M}, delta = {constants.delta:g} needs "
                         f"{size / 1024**3:.1f} GiB of weights (limit {max_bytes / 1024**3:.1f} GiB)")
    cfg = EulerConfig(constants.delta, problem.T)
    if noises is None:
        noises = sample_noises(seed, constants.M, cfg, problem.d)
    if len(noises) != constants.M:
        raise ValueError(f"{len(noises)} noise realizations for M = {constants.M}")
    nets = [build_sample_network(problem, cfg, nz, id_net) for nz in noises]
    dims = nets[0].dims
    if any(net.dims != dims for net in nets):
        raise RuntimeError("sample networks diverged in architecture")
    net = weighted_sum(nets, [1.0 / constants.M] * constants.M)
    return ConstructionReport(
        network=net, param_count=param_count(net), depth=net.depth, M=constants.M,
        delta=constants.delta, seed=seed, steps=cfg.steps, mode=constants.mode,
        problem=problem.name, d=problem.d, constants=constants,
    )


# -- calibration and selection -----------------------------------------------------


def delta_ladder(T: float, levels: int = 3) -> list[float]:
    base = min(1.0, math.sqrt(T))
    return [base / 2**k for k in range(levels)]


def calibrate(problem: KolmogorovProblem, epsilon: float, p: float = 2.0, seed: int = 0,
              budget: int = 1024, reference: ReferenceSolution | None = None,
              probes: int = 2000, delta_levels: int = 3,
              max_bytes: int = MAX_NETWORK_BYTES) -> RateConstants:
    """Doubling search over M in {4, 8, ..., budget}, halving delta at each M.

    Stops at the first (M, delta) whose candidate meets error <= epsilon / 2.
    Pairs whose network would exceed ``max_bytes`` of weights are skipped.
    Candidate seeds depend on (seed, M, level) only, so the error trace is the
    same for every epsilon and the returned M is monotone in epsilon.
    """
    _require_networks(problem)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    reference = reference or ReferenceSolution.for_problem(problem)
    probe_seed = derive_seed(seed, "calibration-probes")
    trace, best = [], None
    M = 4
    while M <= budget:
        for level, delta in enumerate(delta_ladder(problem.T, delta_levels)):
            if network_bytes(problem, M, delta) > max_bytes:
                continue
            cfg = EulerConfig(delta, problem.T)
            cseed = derive_seed(seed, "calibrate", M, level)
            fn = euler_network_pipeline(problem, cfg, sample_noises(cseed, M, cfg, problem.d))
            rep = lp_error(reference, fn, problem.measure, p, probes, probe_seed, problem.T, problem.d)
            trace.append({"M": M, "delta": delta, "steps": cfg.steps, "seed": cseed,
                          "error": rep.estimate, "half_width": rep.half_width})
            const = RateConstants(M, delta, "calibrated", math.log(M), math.log(delta), cfg.steps,
                                  {"epsilon": epsilon, "p": p, "seed": seed}, tuple(trace))
            if best is None or rep.estimate < best[0]:
                best = (rep.estimate, const)
            if rep.estimate <= epsilon / 2:
                return const
        M *= 2
    raise CalibrationError(
        f"no (M, delta) with M <= {budget} and a network that fits in memory "
        f"reached error {epsilon / 2:g}",
        best=best[1] if best else None, trace=trace,
    )


def select_realization(problem: KolmogorovProblem, constants: RateConstants, K: int = 8,
                       seed: int = 0, epsilon: float | None = None, p: float = 2.0,
                       reference: ReferenceSolution | None = None, probes: int = 2000,
                       id_net: NeuralNetwork | None = None) -> ConstructionReport:
    """Build K seeded candidates, keep the one with the smallest measured L^p error.

    Candidate errors are measured on the numerically evaluated Euler pipeline,
    which realizes the same function as the candidate network; only the
    selected candidate is materialized and then re-measured as a network.
    Calibrated constants carry the seed of the candidate that passed
    calibration; it enters as candidate 0, so selection never does worse.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    _require_networks(problem)
    size = network_bytes(problem, constants.M, constants.delta)
    if size > MAX_NETWORK_BYTES:
        raise ValueError(f"network with M = {constants.M} would need {size / 1024**3:.1f} GiB of weights")
    reference = reference or ReferenceSolution.for_problem(problem)
    cfg = EulerConfig(constants.delta, problem.T)
    probe_seed = derive_seed(seed, "selection-probes")
    seeds = [derive_seed(seed, "candidate", k) for k in range(K)]
    last = constants.trace[-1] if constants.mode == "calibrated" and constants.trace else None
    if last and last["M"] == constants.M and last["delta"] == constants.delta:
        seeds[0] = last["seed"]
    trace, errors, pools = [], [], []
    for k, cseed in enumerate(seeds):
        noises = sample_noises(cseed, constants.M, cfg, problem.d)
        fn = euler_network_pipeline(problem, cfg, noises)
        rep = lp_error(reference, fn, problem.measure, p, probes, probe_seed, problem.T, problem.d)
        trace.append({"candidate": k, "seed": cseed, "error": rep.estimate, "half_width": rep.half_width})
        errors.append(rep.estimate)
        pools.append(noises)
    best = int(np.argmin(errors))
    report = build_mc_network(problem, constants, trace[best]["seed"], id_net, pools[best])
    report.error = lp_error(reference, report.network, problem.measure, p, probes, probe_seed,
                            problem.T)
    report.trace = trace
    report.selected = best
    report.epsilon = epsilon
    report.p = p
    return report


def closed_form_report(problem: KolmogorovProblem, epsilon: float, kappa: float, eta: float | None = None,
                 p: float = 2.0, check: bool = True) -> ConstructionReport:
    """Bookkeeping of the construction with the proof's constants, without building it.

    The network would be astronomically large; architecture and parameter count
    follow exactly from the calculus postconditions.
    """
    _require_networks(problem)
    eta = cube_eta(kappa, p) if eta is None else eta
    if check:
        bad = check_growth_hypotheses(problem, epsilon, kappa, eta, p)
        if bad:
            raise ValueError("hypotheses violated: " + "; ".join(bad))
    drift_zero = float(np.linalg.norm(problem.drift(np.zeros((1, problem.d)))))
    const = paper_constants(problem.d, epsilon, kappa, eta, p, problem.T, drift_zero)
    d, w = problem.d, 2 * problem.d
    dd, fd = problem.drift_net.dims, problem.f0_net.dims
    return ConstructionReport(
        network=None,
        param_count=mc_param_count(d, dd, fd, w, const.steps, const.M),
        depth=mc_depth(dd, fd, const.steps),
        M=const.M, delta=const.delta, seed=0, steps=const.steps, mode="paper",
        problem=problem.name, d=d, epsilon=epsilon, p=p, constants=const,
    )


@dataclass(frozen=True)
class Certificate:
    holds: bool
    margin: float
    explicit_holds: Optional[bool] = None
    explicit_margin: Optional[float] = None


def param_certificate(report: ConstructionReport, c: float, d: int, epsilon: float) -> Certificate:
    """Check P <= c d^c eps^-c in log space; paper-mode reports also get the explicit bound."""
    log_p = math.log(report.param_count)
    margin = math.log(c) + c * math.log(d) - c * math.log(epsilon) - log_p
    explicit = None
    if report.mode == "paper" and report.constants is not None:
        q = report.constants.params
        bound = log_param_bound(d, epsilon, q["kappa"], q["eta"], q["p"], q["T"])
        explicit = bound - log_p
    return Certificate(margin >= 0, margin, None if explicit is None else explicit >= 0, explicit)
