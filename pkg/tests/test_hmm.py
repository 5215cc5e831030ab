import math

import numpy as np
import pytest

from markovsa.errors import DimensionError
from markovsa.hmm import (
    HmmModel,
    SlowChainModel,
    incremental_score,
    lms_step,
    log_likelihood,
    ode_decay_rate,
    predictor_step,
    project,
    rmle_recursion,
    rmle_run,
    rmle_step,
    sensitivity_step,
    simulate_hmm,
    slow_chain_for_step,
    slow_chain_track,
    sphere_regressors,
)
from markovsa.rng import RngStream

P_TRUE = np.array([[0.9, 0.1], [0.2, 0.8]])


@pytest.fixture(scope="module")
def true_model():
    return HmmModel.from_transition(P_TRUE, [1.0, 1.0])


def random_model(rng, X=2):
    return HmmModel(rng.normal(size=(X, X)), rng.uniform(0.5, 2.0, size=X))


def filter_path(model, y):
    """Predictor and sensitivity after the whole sequence, from the uniform start."""
    pi = np.full(model.X, 1.0 / model.X)
    w = np.zeros((model.X, model.n_params))
    for k, yk in enumerate(y):
        w = sensitivity_step(w, pi, yk, model)
        pi, _ = predictor_step(pi, yk, model, k)
    return pi, w


def test_predictor_hand_example(true_model):
    # with equal unit variances, this observation makes b_0 / b_1 = 2
    y = 1.5 - math.log(2)
    b, _ = true_model.emission(y)
    assert b[0] / b[1] == pytest.approx(2.0)
    pi, _ = predictor_step([0.5, 0.5], y, true_model)
    assert np.allclose(pi, [2 / 3, 1 / 3], atol=1e-14)


def test_predictor_uninformative_and_sharp(true_model):
    pi0 = np.array([0.3, 0.7])
    pi, ll = predictor_step(pi0, 1.5, true_model)
    assert np.allclose(pi, P_TRUE.T @ pi0, atol=1e-14)
    b, _ = true_model.emission(1.5)
    assert ll == pytest.approx(math.log(b @ pi0))
    sharp = HmmModel.from_transition(P_TRUE, [0.1, 0.1])
    pi, _ = predictor_step([0.5, 0.5], 2.0, sharp)
    assert np.allclose(pi, P_TRUE[1], atol=1e-12)


def test_predictor_zero_likelihood_reports_step():
    m = HmmModel.from_transition(P_TRUE, [0.1, 0.1])
    with pytest.raises(FloatingPointError, match="step 7"):
        predictor_step([0.5, 0.5], 1e6, m, k=7)


def test_predictor_stays_on_simplex(true_model):
    _, y = simulate_hmm(true_model, 20_000, RngStream(0))
    pi = np.array([0.5, 0.5])
    for yk in y:
        pi, _ = predictor_step(pi, yk, true_model)
    assert abs(pi.sum() - 1.0) < 1e-12 and np.all(pi >= 0)


def test_sensitivity_trivial_and_column_sums():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = random_model(rng, 3)
        pi = rng.dirichlet(np.ones(3))
        w = rng.normal(size=(3, m.n_params))
        w -= w.mean(axis=0)
        w2 = sensitivity_step(w, pi, float(rng.normal(2, 1)), m)
        assert np.allclose(w2.sum(axis=0), 0.0, atol=1e-10)
    # sigma parameters do not move P, and y one standard deviation away
    # from both means makes the density flat in sigma, so the column stays 0
    m = HmmModel.from_transition(P_TRUE, [1.0, 1.0], means=[0.0, 2.0])
    assert np.allclose(m.emission(1.0)[1], 0.0)
    w = sensitivity_step(np.zeros((2, 6)), [0.4, 0.6], 1.0, m)
    assert np.allclose(w[:, 4:], 0.0, atol=1e-15)


def test_sensitivity_matches_finite_differences_after_50_steps():
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = random_model(rng)
        _, y = simulate_hmm(m, 50, RngStream(int(rng.integers(1000))))
        _, w = filter_path(m, y)
        theta = m.params()
        h = 1e-6
        for l in range(m.n_params):
            e = np.zeros_like(theta)
            e[l] = h
            fd = (filter_path(m.with_params(theta + e), y)[0] - filter_path(m.with_params(theta - e), y)[0]) / (2 * h)
            assert np.allclose(w[:, l], fd, rtol=1e-4, atol=1e-8)


def test_score_trivial():
    m = HmmModel.from_transition(P_TRUE, [1.0, 1.0])
    s = incremental_score([0.5, 0.5], np.zeros((2, 6)), 1.5, m)
    assert np.allclose(s[:4], 0.0)


def test_score_matches_finite_difference_of_one_step_loglik():
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(50):
        X = int(rng.integers(2, 4))
        m = random_model(rng, X)
        _, y = simulate_hmm(m, 11, RngStream(int(rng.integers(10_000))))
        pi, w = filter_path(m, y[:10])
        s = incremental_score(pi, w, y[10], m)
        theta = m.params()
        for l in range(m.n_params):
            e = np.zeros_like(theta)
            e[l] = h
            lp = [predictor_step(filter_path(m.with_params(theta + sgn * e), y[:10])[0], y[10],
                                 m.with_params(theta + sgn * e))[1] for sgn in (1, -1)]
            fd = (lp[0] - lp[1]) / (2 * h)
            assert s[l] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_score_has_zero_mean_at_truth(true_model):
    _, y = simulate_hmm(true_model, 100_000, RngStream(4))
    pi = np.array([0.5, 0.5])
    w = np.zeros((2, 6))
    scores = np.empty((len(y), 6))
    for k, yk in enumerate(y):
        scores[k] = incremental_score(pi, w, yk, true_model)
        w = sensitivity_step(w, pi, yk, true_model)
        pi, _ = predictor_step(pi, yk, true_model)
    # scores are martingale differences, so the plain standard error applies
    se = scores.std(axis=0, ddof=1) / math.sqrt(len(y))
    assert np.all(np.abs(scores.mean(axis=0)) <= 3 * se + 1e-12)


def test_likelihood_peaks_at_truth(true_model):
    wins = 0
    rng = np.random.default_rng(5)
    for seed in range(100):
        _, y = simulate_hmm(true_model, 100_000, RngStream(seed))
        d = rng.normal(size=6)
        d *= 0.1 / np.linalg.norm(d)
        wins += log_likelihood(y, true_model) > log_likelihood(y, true_model.with_params(true_model.params() + d))
    assert wins >= 95


def test_rmle_step_and_projection(true_model):
    assert np.array_equal(rmle_step(true_model, np.zeros(6), 0.1).params(), true_model.params())
    m = rmle_step(true_model, np.array([0, 0, 0, 0, 1e3, -1e3]), 0.1)
    assert m.sigma.tolist() == [10.0, 0.1]
    assert np.array_equal(project(true_model, true_model.params()).psi, true_model.psi)
    with pytest.raises(ValueError):
        rmle_step(true_model, np.zeros(6), 0.0)


def test_rmle_kernel_matches_reference_recursion(true_model):
    _, y = simulate_hmm(true_model, 400, RngStream(6))
    start = HmmModel(np.zeros((2, 2)), [1.5, 1.5])
    a, lla = rmle_recursion(y, start, 1e-2)
    b, llb = rmle_run(y, start, 1e-2)
    assert np.allclose(a.params(), b.params(), atol=1e-12)
    assert lla == pytest.approx(llb, rel=1e-12)


def test_log_likelihood_matches_predictor_sum(true_model):
    _, y = simulate_hmm(true_model, 300, RngStream(7))
    pi = np.array([0.5, 0.5])
    total = 0.0
    for yk in y:
        pi, inc = predictor_step(pi, yk, true_model)
        total += inc
    assert log_likelihood(y, true_model) == pytest.approx(total, rel=1e-12)


def test_model_validation():
    with pytest.raises(DimensionError):
        HmmModel(np.zeros((2, 3)), [1.0, 1.0])
    with pytest.raises(ValueError):
        HmmModel(np.zeros((2, 2)), [0.01, 1.0])
    with pytest.raises(ValueError):
        HmmModel.from_transition([[1.0, 0.0], [0.5, 0.5]], [1.0, 1.0])


def test_lms_examples():
    theta = np.array([1.0, -2.0])
    phi = np.array([0.5, 0.3])
    assert np.array_equal(lms_step(theta, phi, phi @ theta, 0.1), theta)
    assert lms_step([0.0], [1.0], 3.0, 1.0).tolist() == [3.0]
    e0, mu, target = 2.0, 0.05, 1.0
    th = np.array([target + e0])
    for n in range(1, 101):
        th = lms_step(th, [1.0], target, mu)
        assert th[0] - target == pytest.approx((1 - mu) ** n * e0, rel=1e-12)
    with pytest.raises(ValueError):
        lms_step(theta, phi, 0.0, 0.0)


def test_sphere_regressors_have_identity_second_moment():
    phi = sphere_regressors(200_000, 3, RngStream(0))
    assert np.allclose(np.linalg.norm(phi, axis=1), math.sqrt(3))
    assert np.allclose(phi.T @ phi / len(phi), np.eye(3), atol=0.02)


def test_slow_chain_validation():
    with pytest.raises(ValueError):
        SlowChainModel([[-1.0, 1.0], [1.0, -1.0]], 2.0, [[0.0], [1.0]])
    with pytest.raises(ValueError):
        SlowChainModel([[1.0, -1.0], [1.0, -1.0]], 0.1, [[0.0], [1.0]])
    with pytest.raises(DimensionError):
        SlowChainModel([[-1.0, 1.0], [1.0, -1.0]], 0.1, [[0.0]])
    m = slow_chain_for_step([[-1.0, 1.0], [1.0, -1.0]], [[0.0], [1.0]], 0.1, kappa=2.0)
    assert m.eps == pytest.approx(0.02)


def test_frozen_noise_free_tracking_error_vanishes():
    m = SlowChainModel(np.zeros((2, 2)), 0.0, [[1.0, -1.0], [0.0, 0.0]])
    res = slow_chain_track(m, 0.05, 5000, RngStream(0), noise_sd=0.0, x0=1)
    assert np.all(res["states"] == 1)
    assert res["mse"] < 1e-12


def test_ode_decay_rate_within_twenty_percent():
    assert ode_decay_rate(0.01, 2, 300, 200, RngStream(0)) == pytest.approx(1.0, rel=0.2)
