"""Tabular Q-learning for discounted-cost MDPs, a primal-dual variant that
enforces submodularity of the Q-factors, and the Q-MDP belief heuristic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionError
from .markov import cumulative_rows
from .mdp import MdpModel
from .rng import as_stream


def q_update(Q, obs, rho: float, eps_k: float) -> np.ndarray:
    """One asynchronous update of the (x, u) entry from obs = (x, u, cost, x_next)."""
    x, u, cost, x2 = obs
    Q = np.array(Q, dtype=np.float64, copy=True)
    Q[x, u] += eps_k * (cost + rho * Q[x2].min() - Q[x, u])
    return Q


def visit_step_size(counts, x: int, u: int, eps: float = 1.0) -> float:
    n = counts[x, u]
    if n <= 0:
        raise ValueError(f"pair ({x}, {u}) has not been visited")
    return eps / n


@dataclass
class QLearningResult:
    Q: np.ndarray
    policy: np.ndarray
    counts: np.ndarray
    unvisited: list
    lam: np.ndarray | None = None


def _run(mdp: MdpModel, rho, n_steps, interval, explore, eps, rng, x0, M, lam0):
    if not 0.0 < rho < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    rng = as_stream(rng)
    u = rng.child("qlearn").uniforms(n_steps, 3)
    Q, counts, lam = kernels.qlearn(cumulative_rows(mdp.P), np.ascontiguousarray(mdp.c), float(rho),
                                    float(eps), int(x0), int(interval), float(explore), u,
                                    np.ascontiguousarray(M, dtype=np.float64), np.asarray(lam0, dtype=np.float64))
    unvisited = [tuple(int(v) for v in p) for p in np.argwhere(counts == 0)]
    return QLearningResult(Q, np.argmin(Q, axis=1), counts, unvisited, lam)


def q_learning_run(mdp: MdpModel, rho: float, interval: int, n_intervals: int, explore: float = 0.1,
                   eps: float = 1.0, rng=None, x0: int = 0) -> QLearningResult:
    """Two-time-scale Q-learning.

    The behaviour policy is frozen for ``interval`` steps and then reset to
    the greedy (argmin) policy of the current Q; with probability
    ``explore`` a uniformly random action is used instead. The step for
    pair (x, u) is eps / visits(x, u). Unvisited pairs are reported in
    ``unvisited`` and keep their initial value 0.
    """
    M = np.zeros((mdp.X * mdp.U, 0))
    return _run(mdp, rho, interval * n_intervals, interval, explore, eps, rng, x0, M, np.zeros(0))


def submodular_constraint_matrix(X: int, U: int) -> np.ndarray:
    """Columns encode Q(i+1,u+1) - Q(i+1,u) - Q(i,u+1) + Q(i,u) >= 0 on vec(Q)
    (row-major, index i * U + u), one column per (i, u) with i < X-1, u < U-1."""
    if X < 2 or U < 2:
        raise DimensionError("need X >= 2 and U >= 2")
    M = np.zeros((X * U, (X - 1) * (U - 1)))
    col = 0
    for i in range(X - 1):
        for u in range(U - 1):
            M[(i + 1) * U + u + 1, col] = 1.0
            M[i * U + u, col] = 1.0
            M[(i + 1) * U + u, col] = -1.0
            M[i * U + u + 1, col] = -1.0
            col += 1
    return M


def primal_dual_q_learning(mdp: MdpModel, rho: float, M, n_steps: int, rng=None, eps: float = 1.0,
                           interval: int = 1, explore: float = 0.1, x0: int = 0,
                           lam0=None) -> QLearningResult:
    """Q-learning with Lagrange multipliers for the linear constraints vec(Q) M >= 0.

    Primal: Q(x,u) += eps_k [cost + rho min Q(x') - Q(x,u) + (M lam)(x,u)].
    Dual: lam = max(lam - eps_k vec(Q) M, 0), with the same eps_k.
    With M having zero columns this is exactly ``q_learning_run``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != mdp.X * mdp.U:
        raise DimensionError(f"M must have {mdp.X * mdp.U} rows")
    lam0 = np.zeros(M.shape[1]) if lam0 is None else np.asarray(lam0, dtype=np.float64)
    return _run(mdp, rho, n_steps, interval, explore, eps, rng, x0, M, lam0)


def qmdp_policy(Q, belief) -> int:
    """argmin_u sum_x belief(x) Q(x, u), lowest index on ties."""
    vals = np.asarray(belief, dtype=np.float64) @ np.asarray(Q, dtype=np.float64)
    return int(np.argmin(vals))
