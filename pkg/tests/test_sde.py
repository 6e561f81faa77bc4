import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from kolmonet.exceptions import NumericError
from kolmonet.problems import make_problem
from kolmonet.rng import CHUNK, derive_seed, map_chunks
from kolmonet.sde import (
    EulerConfig,
    KolmogorovProblem,
    NoiseRealization,
    brownian_moment,
    brownian_moment_bound,
    coupled_strong_error,
    diffusion_factor,
    euler_path,
    grid_projection,
    sample_noises,
)


def _zero(y):
    return np.zeros_like(y)


def test_diffusion_factor_examples():
    np.testing.assert_allclose(diffusion_factor(np.eye(3)), math.sqrt(2) * np.eye(3), atol=1e-14)
    np.testing.assert_array_equal(diffusion_factor(np.zeros((2, 2))), np.zeros((2, 2)))
    root = diffusion_factor([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(root @ root, [[4.0, 2.0], [2.0, 4.0]], atol=1e-10)
    np.testing.assert_array_equal(root, root.T)


def test_diffusion_factor_rejects_bad_input():
    with pytest.raises(ValueError):
        diffusion_factor([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        diffusion_factor([[-1.0, 0.0], [0.0, 1.0]])


def test_diffusion_factor_clamps_roundoff():
    A = np.diag([1.0, -1e-12])
    root = diffusion_factor(A)
    assert np.all(np.linalg.eigvalsh(root) >= 0)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, (4, 4), elements=st.floats(-3, 3)))
def test_diffusion_factor_squares_back(G):
    A = G @ G.T
    root = diffusion_factor(A)
    assert np.linalg.norm(root @ root - 2 * A) <= 1e-10 * max(1.0, np.linalg.norm(A))
    assert np.linalg.eigvalsh(root).min() >= -1e-10


def test_grid_projection_examples():
    assert grid_projection(0.6, 0.25) == 0.5
    assert grid_projection(0.0, 0.25) == 0.0
    assert grid_projection(0.75, 0.25) == 0.75
    assert grid_projection(0.3, 0.1) == 0.3


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10), st.floats(1e-3, 2))
def test_grid_projection_is_floor(t, h):
    g = grid_projection(t, h)
    assert g <= t + 1e-12 and t - g < h
    assert abs(g / h - round(g / h)) < 1e-9


def test_euler_config_snaps_to_horizon():
    cfg = EulerConfig(0.3, 1.0)
    assert cfg.steps == 11
    assert abs(cfg.steps * cfg.h - 1.0) < 1e-12
    assert cfg.h <= cfg.T
    assert EulerConfig(1.0, 0.25).steps == 1
    with pytest.raises(ValueError):
        EulerConfig(1.5)


def test_noise_is_reproducible():
    a = NoiseRealization.draw(11, 5, 3, 0.2)
    b = NoiseRealization.draw(11, 5, 3, 0.2)
    assert a.increments.tobytes() == b.increments.tobytes()
    assert a.increments.shape == (5, 3)
    assert not np.array_equal(a.increments, NoiseRealization.draw(12, 5, 3, 0.2).increments)


def test_euler_frozen_dynamics():
    cfg = EulerConfig(0.5)
    noise = NoiseRealization.draw(0, cfg.steps, 2, cfg.h)
    end, _ = euler_path(_zero, [1.0, -2.0], np.zeros((2, 2)), cfg, noise)
    np.testing.assert_array_equal(end, [1.0, -2.0])


def test_euler_two_steps():
    cfg = EulerConfig(math.sqrt(0.5), 1.0)
    assert cfg.steps == 2
    noise = NoiseRealization.draw(0, 2, 1, cfg.h)
    end, path = euler_path(lambda y: -y, [1.0], np.zeros((1, 1)), cfg, noise, return_path=True)
    assert end[0] == 0.25
    np.testing.assert_array_equal(path[:, 0], [1.0, 0.5, 0.25])


def test_euler_gaussian_mean():
    cfg = EulerConfig.from_steps(4, 1.0)
    n = 100_000
    x0 = np.array([0.5, -1.0])
    ends = np.empty((n, 2))
    dw = np.random.default_rng(derive_seed(5, "gaussian-mean")).standard_normal((n, 4, 2)) * math.sqrt(cfg.h)
    for j in range(n):
        ends[j] = euler_path(_zero, x0, np.eye(2), cfg, NoiseRealization(j, dw[j], cfg.h))[0]
    disp = ends - x0
    np.testing.assert_allclose(disp, dw.sum(axis=1), atol=1e-12)
    se = disp.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(disp.mean(axis=0)) <= 3 * se)


def test_euler_reports_blow_up_step():
    cfg = EulerConfig.from_steps(50, 1.0)
    noise = NoiseRealization.draw(0, 50, 1, cfg.h)
    with pytest.raises(NumericError) as info, np.errstate(over="ignore", invalid="ignore"):
        euler_path(lambda y: 1e200 * y**3, [1.0], np.zeros((1, 1)), cfg, noise)
    assert info.value.step >= 1


def test_euler_rejects_mismatched_noise():
    cfg = EulerConfig(0.5)
    with pytest.raises(ValueError):
        euler_path(_zero, [0.0], np.eye(1), cfg, NoiseRealization.draw(0, 3, 1, 0.1))


def test_strong_error_zero_drift():
    est = coupled_strong_error(make_problem("heat-linear", 2), np.zeros(2), 0.5, 2.0, 2000, seed=1)
    assert est.estimate <= 1e-12


def test_strong_error_decreases_on_ladder():
    problem = make_problem("ou-linear", 1)
    ests = [coupled_strong_error(problem, [1.0], delta, 2.0, 4000, seed=3).estimate
            for delta in (0.2, 0.1, 0.05)]
    assert ests[0] > ests[1] > ests[2] > 0


def test_strong_error_needs_two_samples():
    with pytest.raises(ValueError):
        coupled_strong_error(make_problem("ou-linear", 1), [1.0], 0.5, 2.0, 1)


def test_brownian_moment_examples():
    assert brownian_moment(np.zeros((2, 2)), 1.0, 2.0, 1000).estimate == 0.0
    est = brownian_moment(np.eye(1), 1.0, 2.0, 100_000, seed=2)
    assert abs(est.estimate - 1.0) <= 3 * est.stderr
    assert est.estimate <= brownian_moment_bound(np.eye(1), 1.0, 2.0) + 3 * est.stderr
    est = brownian_moment(np.eye(3), 2.0, 4.0, 100_000, seed=4)
    assert brownian_moment_bound(np.eye(3), 2.0, 4.0) == pytest.approx(math.sqrt(18))
    assert est.estimate <= math.sqrt(18) + 3 * est.stderr


def test_lipschitz_declaration_is_spot_checked():
    with pytest.raises(ValueError):
        KolmogorovProblem("bad", 1, np.eye(1), lambda x: -3 * x, lambda x: x[:, 0], drift_lipschitz=1.0)


def _mean_of_noise(seed):
    def chunk(rng, n, _):
        return rng.standard_normal(n).sum()

    return sum(map_chunks(chunk, 3 * CHUNK + 17, seed, "det"))


def test_results_do_not_depend_on_thread_count(monkeypatch):
    problem = make_problem("ou-linear", 2)
    runs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("KOLMO_THREADS", threads)
        cfg = EulerConfig(0.5)
        noises = sample_noises(9, 3, cfg, 2)
        runs.append((
            _mean_of_noise(7),
            coupled_strong_error(problem, [1.0, 0.0], 0.5, 2.0, 2 * CHUNK + 5, seed=8).estimate,
            b"".join(nz.increments.tobytes() for nz in noises),
        ))
    assert runs[0] == runs[1]
