import math

import numpy as np
import pytest

from markovsa.errors import DimensionError
from markovsa.mdp import MdpModel, value_iteration
from markovsa.qlearn import (
    primal_dual_q_learning,
    q_learning_run,
    q_update,
    qmdp_policy,
    submodular_constraint_matrix,
    visit_step_size,
)
from markovsa.rng import RngStream

from .helpers import random_stochastic

ONE = MdpModel(np.ones((1, 1, 1)), [[1.0]])


def submodular_mdp():
    # both actions share the transition law, so Q* inherits the
    # supermodular cross difference of the cost matrix
    P = np.stack([np.array([[0.6, 0.4], [0.3, 0.7]])] * 2)
    return MdpModel(P, [[0.0, 0.5], [0.2, 1.5]])


def test_q_update_examples():
    Q = np.zeros((1, 1))
    Q = q_update(Q, (0, 0, 1.0, 0), 0.5, 1.0)
    assert Q[0, 0] == 1.0
    Q = q_update(Q, (0, 0, 1.0, 0), 0.5, 1.0)
    assert Q[0, 0] == 1.5
    for _ in range(60):
        Q = q_update(Q, (0, 0, 1.0, 0), 0.5, 1.0)
    assert Q[0, 0] == pytest.approx(2.0)
    assert q_update(Q, (0, 0, 5.0, 0), 0.5, 0.0)[0, 0] == Q[0, 0]


def test_q_update_fixed_point_and_locality():
    P = np.stack([np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2)])
    m = MdpModel(P, [[1.0, 2.0], [0.5, 3.0]])
    Qs = value_iteration(m, 0.7, 3000).Q
    for x in range(2):
        for u in range(2):
            x2 = int(np.argmax(m.P[u, x]))
            Q2 = q_update(Qs, (x, u, m.c[x, u], x2), 0.7, 0.3)
            assert np.allclose(Q2, Qs, atol=1e-12)
    Q0 = np.arange(4.0).reshape(2, 2)
    Q1 = q_update(Q0, (1, 0, 9.0, 0), 0.7, 0.5)
    changed = np.argwhere(Q1 != Q0)
    assert changed.tolist() == [[1, 0]]


def test_visit_step_size():
    counts = np.zeros((2, 2), dtype=int)
    with pytest.raises(ValueError):
        visit_step_size(counts, 0, 0)
    counts[0, 0] = 1
    assert visit_step_size(counts, 0, 0, 0.7) == 0.7
    counts[0, 0] = 10
    assert visit_step_size(counts, 0, 0) == 0.1


def test_synchronous_sweeps_converge():
    rng = np.random.default_rng(5)
    for _ in range(5):
        P = np.stack([random_stochastic(rng, 3) for _ in range(3)])
        m = MdpModel(P, rng.uniform(0, 1, size=(3, 3)))
        Qs = value_iteration(m, 0.5, 200).Q
        Q = np.zeros((3, 3))
        stream = RngStream(int(rng.integers(1000)))
        for k in range(1, 4001):
            u = stream.child(k).uniforms(9)
            for idx in range(9):
                x, a = divmod(idx, 3)
                x2 = int(np.searchsorted(np.cumsum(m.P[a, x]), u[idx], side="right"))
                Q = q_update(Q, (x, a, m.c[x, a], min(x2, 2)), 0.5, 1.0 / k)
        assert np.abs(Q - Qs).max() < 0.02


def test_single_state_run_follows_harmonic_product():
    # with steps 1/n the error obeys e_n = e_{n-1} (1 - (1 - rho)/n), so
    # e_n = 2 Gamma(n + 1/2) / (Gamma(1/2) Gamma(n + 1)) for rho = 1/2
    for n in (10, 1000, 10**4):
        r = q_learning_run(ONE, 0.5, 1, n, rng=RngStream(0))
        err = 2 * math.exp(math.lgamma(n + 0.5) - math.lgamma(0.5) - math.lgamma(n + 1))
        assert 2.0 - r.Q[0, 0] == pytest.approx(err, rel=1e-9)
        assert r.unvisited == []


@pytest.mark.xfail(strict=True, reason="1/n steps leave error 0.0113 after 1e4 steps; see ledger")
def test_single_state_run_reference_tolerance():
    r = q_learning_run(ONE, 0.5, 1, 10**4, rng=RngStream(0))
    assert r.Q[0, 0] == pytest.approx(2.0, abs=0.01)


def test_unvisited_pairs_are_flagged():
    # state 1 is absorbing under both actions and the run starts there
    P = np.stack([np.array([[0.5, 0.5], [0.0, 1.0]])] * 2)
    m = MdpModel(P, [[1.0, 2.0], [0.0, 1.0]])
    r = q_learning_run(m, 0.5, 1, 1000, explore=0.0, rng=RngStream(0), x0=1)
    assert (0, 0) in r.unvisited and (0, 1) in r.unvisited and (1, 1) in r.unvisited
    assert r.Q[0, 0] == 0.0


def test_submodular_matrix():
    M = submodular_constraint_matrix(2, 2)
    assert M[:, 0].tolist() == [1.0, -1.0, -1.0, 1.0]
    assert M.shape == (4, 1)
    assert np.all(np.tile([1.0, 4.0, 2.0], (3, 1)).ravel() @ submodular_constraint_matrix(3, 3) == 0)
    Q = np.outer(np.arange(1, 4), np.arange(1, 5)).astype(float)
    assert np.allclose(Q.ravel() @ submodular_constraint_matrix(3, 4), 1.0)
    with pytest.raises(DimensionError):
        submodular_constraint_matrix(1, 3)


def test_primal_dual_without_constraints_is_plain_q_learning():
    m = submodular_mdp()
    a = q_learning_run(m, 0.8, 1, 5000, rng=RngStream(3))
    b = primal_dual_q_learning(m, 0.8, np.zeros((4, 0)), 5000, RngStream(3))
    assert np.array_equal(a.Q, b.Q)
    assert np.array_equal(a.counts, b.counts)


def test_primal_dual_on_submodular_instance():
    m = submodular_mdp()
    M = submodular_constraint_matrix(2, 2)
    assert value_iteration(m, 0.8, 2000).Q.ravel() @ M > 0
    for seed in range(5):
        r = primal_dual_q_learning(m, 0.8, M, 200_000, RngStream(seed))
        assert np.all(r.lam >= 0)
        assert np.all(r.lam <= 1.0)
        assert np.all(r.Q.ravel() @ M >= -0.05)


def test_primal_dual_multipliers_stay_nonnegative_when_violated():
    m = MdpModel(submodular_mdp().P, [[0.0, 1.5], [0.2, 0.5]])
    r = primal_dual_q_learning(m, 0.8, submodular_constraint_matrix(2, 2), 50_000, RngStream(1))
    assert np.all(r.lam >= 0)
    with pytest.raises(DimensionError):
        primal_dual_q_learning(m, 0.8, np.zeros((3, 1)), 10)


def test_qmdp_policy():
    Q = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert qmdp_policy(Q, [1.0, 0.0]) == 1
    assert qmdp_policy(Q, [0.0, 1.0]) == 0
    assert qmdp_policy(Q, [0.5, 0.5]) == 0
    assert qmdp_policy(np.ones((2, 3)), [0.3, 0.7]) == 0


def test_run_rejects_bad_discount():
    with pytest.raises(ValueError):
        q_learning_run(ONE, 1.0, 1, 10)
