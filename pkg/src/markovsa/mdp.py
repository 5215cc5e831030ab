"""Finite MDPs, randomized-policy parametrizations and exact oracles.

Augmented states z = (x, u) are flattened as ``x * U + u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from ._backend import kernels
from .errors import DimensionError, PoleError
from .markov import as_stochastic, cumulative_rows, fundamental_matrix, stationary_distribution
from .rng import RngStream, as_stream
from .textio import parse_mdp

POLE_TOL = 1e-8

Kind = Literal["exponential", "spherical"]


@dataclass(frozen=True)
class MdpModel:
    P: np.ndarray  # (U, X, X)
    c: np.ndarray  # (X, U)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if P.ndim != 3 or P.shape[1] != P.shape[2]:
            raise DimensionError(f"P must have shape (U, X, X), got {P.shape}")
        U, X, _ = P.shape
        if c.shape != (X, U):
            raise DimensionError(f"cost matrix must have shape {(X, U)}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("costs must be finite")
        P = np.stack([as_stochastic(P[u], f"P[{u}]") for u in range(U)])
        P.setflags(write=False)
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "c", c)

    @property
    def X(self) -> int:
        return self.P.shape[1]

    @property
    def U(self) -> int:
        return self.P.shape[0]

    def with_costs(self, c) -> "MdpModel":
        return MdpModel(self.P, c)

    @classmethod
    def from_text(cls, text: str) -> "MdpModel":
        return cls(*parse_mdp(text))

    @classmethod
    def from_file(cls, path) -> "MdpModel":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class PolicyParam:
    """Unconstrained policy parameter.

    ``exponential``: psi has shape (X, U) and theta is the row softmax.
    ``spherical``: psi has shape (X, U-1), angles in radians.
    """

    kind: Kind
    psi: np.ndarray

    def __post_init__(self):
        if self.kind not in ("exponential", "spherical"):
            raise ValueError(f"unknown parametrization {self.kind!r}")
        psi = np.array(self.psi, dtype=np.float64)
        if psi.ndim != 2:
            raise DimensionError("psi must be 2-dimensional")
        object.__setattr__(self, "psi", psi)

    def n_actions(self) -> int:
        return self.psi.shape[1] + (1 if self.kind == "spherical" else 0)

    def replace(self, psi) -> "PolicyParam":
        return PolicyParam(self.kind, psi)


def flatten(i: int, u: int, U: int) -> int:
    return i * U + u


def unflatten(idx: int, U: int) -> tuple[int, int]:
    return divmod(idx, U)


def theta_from_params(param: PolicyParam) -> np.ndarray:
    psi = param.psi
    if param.kind == "exponential":
        z = psi - psi.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
    X, K = psi.shape
    c2 = np.cos(psi) ** 2
    s2 = np.sin(psi) ** 2
    theta = np.empty((X, K + 1))
    run = np.ones(X)
    for a in range(K):
        theta[:, a] = c2[:, a] * run
        run = run * s2[:, a]
    theta[:, K] = run
    return theta


def spherical_guard(psi: np.ndarray) -> None:
    """Raise if any angle makes tan or cot blow up."""
    c = np.abs(np.cos(psi))
    s = np.abs(np.sin(psi))
    bad = np.argwhere((c < POLE_TOL) | (s < POLE_TOL))
    if bad.size:
        i, a = (int(v) for v in bad[0])
        raise PoleError(i, a)


def dtheta_dpsi(param: PolicyParam) -> np.ndarray:
    """D[i, a, b] = d theta[i, b] / d psi[i, a].

    Cross-state derivatives vanish, so only the within-row block is stored.
    """
    psi = param.psi
    theta = theta_from_params(param)
    if param.kind == "exponential":
        X, U = theta.shape
        D = -theta[:, :, None] * theta[:, None, :]
        idx = np.arange(U)
        D[:, idx, idx] += theta
        return D
    spherical_guard(psi)
    X, K = psi.shape
    U = K + 1
    c2, s2 = np.cos(psi) ** 2, np.sin(psi) ** 2
    sc2 = 2.0 * np.sin(psi) * np.cos(psi)  # d sin^2 = sc2, d cos^2 = -sc2
    D = np.zeros((X, K, U))
    for b in range(U):
        lead = c2[:, b] if b < K else np.ones(X)
        for a in range(min(b + 1, K)):
            if a == b:
                prod = np.prod(s2[:, :b], axis=1)
                D[:, a, b] = -sc2[:, a] * prod
            else:
                others = [p for p in range(b) if p != a]
                prod = np.prod(s2[:, others], axis=1) if others else np.ones(X)
                D[:, a, b] = lead * sc2[:, a] * prod
    return D


def augmented_kernel(mdp: MdpModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    X, U = mdp.X, mdp.U
    if theta.shape != (X, U):
        raise DimensionError(f"theta must have shape {(X, U)}, got {theta.shape}")
    # K[(i,u),(j,b)] = P_ij(u) * theta[j,b]
    K = np.einsum("uij,jb->iujb", mdp.P, theta)
    return K.reshape(X * U, X * U)


def stationary_augmented(mdp: MdpModel, theta) -> np.ndarray:
    return stationary_distribution(augmented_kernel(mdp, theta))


def average_cost(mdp: MdpModel, theta) -> float:
    pi = stationary_augmented(mdp, theta)
    return float(pi @ mdp.c.ravel())


def exact_policy_gradient(mdp: MdpModel, param: PolicyParam) -> np.ndarray:
    """Gradient of the average cost with respect to psi, via the fundamental matrix."""
    theta = theta_from_params(param)
    if theta.shape != (mdp.X, mdp.U):
        raise DimensionError("policy parameter does not match the MDP")
    Paug = augmented_kernel(mdp, theta)
    pi = stationary_distribution(Paug)
    Z = fundamental_matrix(Paug)
    zc = Z @ mdp.c.ravel()
    D = dtheta_dpsi(param)
    X, U = mdp.X, mdp.U
    grad = np.zeros(D.shape[:2])
    for x in range(X):
        for a in range(D.shape[1]):
            dth = np.zeros((X, U))
            dth[x] = D[x, a]
            dP = np.einsum("uij,jb->iujb", mdp.P, dth).reshape(X * U, X * U)
            grad[x, a] = pi @ dP @ zc
    return grad


@dataclass
class ValueIterationResult:
    V: np.ndarray
    Q: np.ndarray
    policy: np.ndarray
    bound: float


def argmin_rows(A: np.ndarray) -> np.ndarray:
    """Row-wise argmin, lowest index on ties."""
    return np.argmin(A, axis=1)


def value_iteration(mdp: MdpModel, rho: float, N: int) -> ValueIterationResult:
    """N discounted Bellman backups from V_0 = 0.

    Q is formed from V_N and the reported V is its row minimum, so V and Q
    both sit within ``bound`` of their fixed points.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("discount must lie in (0, 1)")
    V = np.zeros(mdp.X)
    for _ in range(N):
        V = (mdp.c + rho * np.einsum("uij,j->iu", mdp.P, V)).min(axis=1)
    Q = mdp.c + rho * np.einsum("uij,j->iu", mdp.P, V)
    bound = rho ** (N + 1) / (1.0 - rho) * float(np.abs(mdp.c).max())
    return ValueIterationResult(Q.min(axis=1), Q, argmin_rows(Q), bound)


def policy_q_values(mdp: MdpModel, policy, rho: float) -> np.ndarray:
    """Exact discounted Q-function of a deterministic stationary policy."""
    policy = np.asarray(policy, dtype=np.int64)
    X = mdp.X
    P_pi = mdp.P[policy, np.arange(X)]
    c_pi = mdp.c[np.arange(X), policy]
    V = np.linalg.solve(np.eye(X) - rho * P_pi, c_pi)
    return mdp.c + rho * np.einsum("uij,j->iu", mdp.P, V)


def occupation_measure(mdp: MdpModel, theta) -> np.ndarray:
    """Stationary pi(x, u) = pi_X(x) theta(x, u) from the state chain
    sum_u theta(x, u) P(u); valid for deterministic policies too."""
    theta = np.asarray(theta, dtype=np.float64)
    P_theta = np.einsum("xu,uxy->xy", theta, mdp.P)
    return stationary_distribution(P_theta)[:, None] * theta


def simulate_mdp(mdp: MdpModel, theta, n: int, x0: int, rng: RngStream | int | None = None):
    """Sample (x_k, u_k, c(x_k, u_k)) for k < n under the randomized policy theta."""
    theta = np.asarray(theta, dtype=np.float64)
    rng = as_stream(rng)
    uu = rng.uniforms(n)
    ux = rng.uniforms(max(n - 1, 0))
    xs, us = kernels.sample_mdp(cumulative_rows(mdp.P), cumulative_rows(theta), int(x0), ux, uu)
    return xs, us, mdp.c[xs, us]
