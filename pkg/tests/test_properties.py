import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from markovsa.cmdp import PrimalDualState, primal_dual_update
from markovsa.gradients import hahn_jordan_decompose
from markovsa.hmm import HmmModel, predictor_step, sensitivity_step
from markovsa.markov import dobrushin_coefficient, stationary_distribution, variational_distance
from markovsa.mdp import (
    MdpModel,
    PolicyParam,
    average_cost,
    flatten,
    occupation_measure,
    theta_from_params,
    unflatten,
)
from markovsa.meanfield import adoption_kernel, drift_H, population_step
from markovsa.rng import RngStream
from markovsa.textio import format_matrix, parse_matrix

finite = st.floats(-20, 20, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def stochastic(seed, X, Y=None):
    A = np.random.default_rng(seed).random((X, Y or X)) + 0.01
    return A / A.sum(axis=1, keepdims=True)


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite),
       st.sampled_from(["exponential", "spherical"]))
def test_theta_rows_are_pmfs(psi, kind):
    theta = theta_from_params(PolicyParam(kind, psi))
    assert np.all(theta >= 0)
    assert np.allclose(theta.sum(axis=1), 1.0)


@given(seeds, st.integers(1, 6))
def test_stationary_is_invariant(seed, X):
    P = stochastic(seed, X)
    pi = stationary_distribution(P)
    assert np.allclose(pi @ P, pi, atol=1e-12)
    assert abs(pi.sum() - 1) < 1e-12 and np.all(pi >= 0)


@given(seeds, st.integers(1, 5))
def test_dobrushin_contracts_distributions(seed, X):
    P = stochastic(seed, X)
    p, q = stochastic(seed + 1, 2, X)
    assert variational_distance(p @ P, q @ P) <= dobrushin_coefficient(P) * variational_distance(p, q) + 1e-12


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite))
def test_hahn_jordan_reconstructs(D):
    D = D - D.mean(axis=1, keepdims=True)
    t = hahn_jordan_decompose(D, tol=1e-9)
    assert np.allclose(t.reconstruct(), D, atol=1e-9)
    assert np.all(t.g >= 0)
    for rows in (t.p_dot, t.p_ddot):
        assert np.all(rows >= 0) and np.allclose(rows.sum(axis=1), 1.0)


@given(st.floats(0, 0.3), st.floats(0, 0.7), st.floats(0, 1), st.floats(0, 1))
def test_drift_sums_to_zero(a, b, c, t):
    H = drift_H([1 - t, t], adoption_kernel(a, b, c), 0)
    assert abs(H.sum()) < 1e-12


@given(st.integers(1, 50), st.integers(0, 50), seeds)
def test_population_step_conserves_agents(n1, n2, seed):
    counts = np.array([n1, n2])
    new = population_step(counts, adoption_kernel(0.05, 0.4, 0.1), 0, RngStream(seed))
    assert new.sum() == counts.sum() and np.all(new >= 0)
    assert np.abs(new - counts).sum() in (0, 2)


@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_occupation_on_simplex_and_consistent(seed, X, U):
    rng = np.random.default_rng(seed)
    P = np.stack([stochastic(seed + u, X) for u in range(U)])
    m = MdpModel(P, rng.random((X, U)))
    theta = stochastic(seed + 99, X, U)
    occ = occupation_measure(m, theta)
    assert occ.shape == (X, U) and np.all(occ >= -1e-15) and abs(occ.sum() - 1) < 1e-12
    assert abs((occ * m.c).sum() - average_cost(m, theta)) < 1e-10


@given(st.integers(0, 30), st.integers(1, 7))
def test_flatten_round_trip(idx, U):
    i, u = unflatten(idx, U)
    assert 0 <= u < U and flatten(i, u, U) == idx


@given(seeds, st.floats(-3, 5))
def test_sensitivity_columns_sum_to_zero(seed, y):
    model = HmmModel.from_transition(stochastic(seed, 2), [0.8, 1.3])
    w = np.zeros((2, model.n_params))
    pi = np.array([0.5, 0.5])
    for _ in range(3):
        w = sensitivity_step(w, pi, y, model)
        pi, _ = predictor_step(pi, y, model)
    assert np.allclose(w.sum(axis=0), 0.0, atol=1e-12)
    assert abs(pi.sum() - 1) < 1e-12


@given(arrays(np.float64, 2, elements=st.floats(0, 10)), arrays(np.float64, 2, elements=finite),
       arrays(np.float64, (2, 1, 2), elements=finite), arrays(np.float64, (1, 2), elements=finite))
def test_multipliers_stay_nonnegative(lam, B_hat, grad_B, grad_C):
    state = PrimalDualState(PolicyParam("exponential", np.zeros((1, 2))), lam, np.zeros(2))
    new = primal_dual_update(state, grad_C, grad_B, B_hat)
    assert np.all(new.lam >= 0)


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_text_round_trip(A):
    assert np.array_equal(parse_matrix(format_matrix(A)), A)
