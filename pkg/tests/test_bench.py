import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from kolmonet.bench import (
    DISTRIBUTIONS,
    SweepResult,
    apriori_check,
    brownian_moment_check,
    calculus_suite,
    estimate_constants,
    fit_loglog,
    identity_suite,
    markov_check,
    markov_suite,
    pathwise_check,
    rate_sweep,
    run_suite,
    strong_perturbation_check,
    weak_perturbation_check,
    weak_rhs,
)
from kolmonet.problems import make_problem

# P(|N(0,1)| >= 2)
ABS_NORMAL_TAIL_2 = 0.04550026389635842


def test_frozen_tail():
    assert ABS_NORMAL_TAIL_2 == pytest.approx(2 * (1 - ndtr(2.0)), rel=1e-14)


def test_markov_uniform():
    r = markov_check(DISTRIBUTIONS["uniform"], 0.5, 1.0, 100_000, seed=1)
    assert r.passed
    assert abs(r.lhs - 0.5) < 0.01 and abs(r.rhs - 1.0) < 0.01


def test_markov_constant():
    r = markov_check(lambda rng, n: np.full(n, 0.3), 0.5, 2.0, 1000)
    assert r.passed and r.lhs == 0.0


def test_markov_gaussian_tail():
    r = markov_check(DISTRIBUTIONS["abs-normal"], 2.0, 2.0, 200_000, seed=2)
    assert r.passed
    assert abs(r.lhs - ABS_NORMAL_TAIL_2) <= 3 * math.sqrt(ABS_NORMAL_TAIL_2 * (1 - ABS_NORMAL_TAIL_2) / 200_000)
    assert r.rhs == pytest.approx(0.25, abs=0.01)


def test_markov_tight_for_bernoulli():
    # X in {0, eps}: both sides equal P(X = eps)
    r = markov_check(lambda rng, n: np.where(rng.random(n) < 0.5, 1.0, 0.0), 1.0, 1.0, 10_000)
    assert r.passed and r.lhs == pytest.approx(r.rhs)


def test_markov_needs_samples():
    with pytest.raises(ValueError):
        markov_check(DISTRIBUTIONS["uniform"], 0.5, 1.0, 999)


@settings(max_examples=20, deadline=None)
@given(scale=st.floats(0.1, 5.0), eps=st.floats(0.05, 5.0), q=st.floats(0.5, 4.0), seed=st.integers(0, 10**6))
def test_markov_never_fails_on_true_inequality(scale, eps, q, seed):
    r = markov_check(lambda rng, n: scale * rng.exponential(1.0, n), eps, q, 20_000, seed)
    assert r.passed


def test_markov_suite_small():
    results = markov_suite(20_000, seed=3)
    assert len(results) == 72 and all(r.passed for r in results)


def test_brownian_moment_check():
    assert brownian_moment_check(np.sqrt(2) * np.eye(3), 2.0, 4.0, 20_000, 1).passed


@pytest.mark.parametrize("name", ["ou-linear", "bounded-drift", "heat-max"])
def test_apriori_bound(name):
    r = apriori_check(make_problem(name, 2), samples=4000, seed=2)
    assert r.passed and r.lhs <= r.rhs


def test_pathwise_and_strong_on_ou():
    problem = make_problem("ou-linear", 1)
    assert pathwise_check(problem, delta=0.5, samples=2000, seed=1).passed
    strong = strong_perturbation_check(problem, delta=0.5, samples=4000, seed=1)
    assert strong.passed and 0 < strong.lhs <= strong.rhs


def test_pathwise_zero_drift_is_equality_at_zero():
    r = pathwise_check(make_problem("heat-linear", 2), delta=0.5, samples=500, seed=3)
    assert r.passed and r.lhs == 0.0


def test_weak_identical_processes():
    problem = make_problem("heat-linear", 2)
    r = weak_perturbation_check(problem, delta=1.0, samples=2000, seed=1,
                                phi0=problem.initial_value, phi1=problem.drift, probes=2000)
    assert r.passed and r.lhs == 0.0
    assert r.details["eps0"] == 0.0 and r.details["eps1"] == 0.0


@pytest.mark.parametrize("delta", [0.5, 0.25])
def test_weak_ou_exact_surrogates(delta):
    r = weak_perturbation_check(make_problem("ou-linear", 1), delta=delta, samples=10_000, seed=4, probes=4000)
    assert r.passed and r.lhs <= r.rhs


def test_weak_corrupted_surrogate():
    problem = make_problem("ou-quadratic", 1)
    f0 = problem.f0_surrogate()
    clean = weak_perturbation_check(problem, 0.5, samples=4000, seed=5, probes=4000)
    shifted = weak_perturbation_check(problem, 0.5, samples=4000, seed=5, probes=4000, phi0=lambda x: f0(x) + 0.5)
    assert clean.passed and shifted.passed
    assert shifted.details["eps0"] > clean.details["eps0"]
    assert shifted.lhs > clean.lhs
    # everything but the eps0 factor is shared between the two bounds
    h = clean.details["h"]
    ratio = (shifted.details["eps0"] + shifted.details["eps1"] + math.sqrt(h)) / (
        clean.details["eps0"] + clean.details["eps1"] + math.sqrt(h))
    assert shifted.rhs / clean.rhs == pytest.approx(ratio, rel=1e-9)


def test_weak_rhs_grows_with_each_error():
    problem = make_problem("ou-linear", 1)
    k = estimate_constants(problem, problem.f0_surrogate(), problem.drift_surrogate(), 2000)
    base = weak_rhs(k, [0.5], 1.0, 0.25, 2.0, 1.5, 0.0)
    bumped = weak_rhs(type(k)(**{**k.__dict__, "eps0": k.eps0 + 0.1}), [0.5], 1.0, 0.25, 2.0, 1.5, 0.0)
    assert bumped > base > 0


def test_calculus_suite_small():
    results = calculus_suite(trials=25, seed=2)
    assert [r.name for r in results] == ["calculus-weighted_sum", "calculus-compose", "calculus-residual_step"]
    assert all(r.passed for r in results)
    assert all(r.details["min_param_slack"] >= 0 for r in results)


def test_identity_suite():
    assert all(r.passed for r in identity_suite(8))


def test_run_suite_unknown():
    with pytest.raises(ValueError):
        run_suite("everything")


def test_fit_recovers_power_law():
    axis = [4, 16, 64, 256]
    slope, se, ci, r2, icpt = fit_loglog(axis, [3 * a**-0.5 for a in axis])
    assert slope == pytest.approx(-0.5) and r2 == pytest.approx(1.0)
    assert icpt == pytest.approx(math.log(3))
    assert ci[0] <= slope <= ci[1]


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_loglog([1, 2, 4], [5.0, 5.0, 5.0])
    with pytest.raises(ValueError):
        fit_loglog([1, 2], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_loglog([1, 2, 4], [1.0, 0.0, 2.0])


def test_sweep_axis_must_be_monotone():
    with pytest.raises(ValueError):
        rate_sweep("params-eps", axis=(0.4, 0.1, 0.2))


def test_sweep_csv_schema(tmp_path):
    res = rate_sweep("params-eps", "heat-max", fixed={"d": 2}, out=tmp_path / "eps.csv")
    rows = list(csv.reader(open(res.csv_path)))
    assert rows[0][:3] == ["axis", "value", "stderr"]
    assert rows[0][3:] == ["epsilon", "param_count", "M", "steps"]
    assert len(rows) == 5
    assert [float(r[0]) for r in rows[1:]] == [2.5, 5.0, 10.0, 20.0]
    assert [float(r[1]) for r in rows[1:]] == pytest.approx([int(r[4]) for r in rows[1:]], rel=1e-15)
    assert res.kind == "ParamGrowthInEps" and 0 < res.slope < math.inf
    assert res.summary()["csv"] == str(res.csv_path)


def test_csv_text_is_stable():
    res = SweepResult("x", [1, 2, 3], [0.1, 0.2, 0.30000000000000004], [0.0, 0.0, 0.0], 1.0, 0.0, (1.0, 1.0),
                      1.0, extra={"flag": [True, False, True]})
    assert res.csv_text() == ("axis,value,stderr,flag\n1,0.1,0.0,true\n2,0.2,0.0,false\n"
                              "3,0.30000000000000004,0.0,true\n")


def test_unknown_sweep_kind():
    with pytest.raises(ValueError):
        rate_sweep("strong")
