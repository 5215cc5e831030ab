"""Discrete stochastic optimization over a finite candidate set: smooth
best-response adaptive search (AS), random search (RS), discounted UCB and
the Poisson-mode benchmark."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import poisson

from ._backend import kernels
from .markov import categorical
from .rng import RngStream, as_stream

CHECKPOINTS = (10, 50, 100, 500, 1000, 5000, 10000)

# objective(candidate, rng) -> noisy cost (AS, RS) or payoff (UCB)
NoisyObjective = Callable[[int, RngStream], float]


def boltzmann_weights(phi, gamma: float) -> np.ndarray:
    """b_i proportional to exp(-phi_i / gamma), computed after subtracting min(phi)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    phi = np.asarray(phi, dtype=np.float64)
    w = np.exp(-(phi - phi.min()) / gamma)
    return w / w.sum()


def boltzmann_sample(phi, gamma: float, rng) -> int:
    rng = as_stream(rng)
    return categorical(boltzmann_weights(phi, gamma), rng.uniform())


def as_step(phi, gamma: float, mu: float, objective: NoisyObjective, rng):
    """One adaptive-search step: sample from the Boltzmann law, observe the
    cost and move phi toward the importance-weighted cost vector."""
    if not 0 < mu <= 1:
        raise ValueError("step size must lie in (0, 1]")
    rng = as_stream(rng)
    phi = np.asarray(phi, dtype=np.float64)
    b = boltzmann_weights(phi, gamma)
    theta = categorical(b, rng.child("draw").uniform())
    cost = float(objective(theta, rng.child("cost")))
    f = np.zeros_like(phi)
    f[theta] = cost / b[theta]
    return phi + mu * (f - phi), theta, cost


def as_decreasing_schedule(n: int, gamma0: float = 1.0, exponent: float = 0.2) -> tuple[float, float]:
    """Step mu(n) = 1/n and exploration gamma(n) = gamma0 / n**exponent, n >= 1."""
    if n < 1:
        raise ValueError("iteration index starts at 1")
    return 1.0 / n, gamma0 / n ** exponent


def as_decreasing_variant(phi, n: int, objective: NoisyObjective, rng, gamma0: float = 1.0,
                          exponent: float = 0.2):
    mu, gamma = as_decreasing_schedule(n, gamma0, exponent)
    return as_step(phi, gamma, mu, objective, rng)


@dataclass(frozen=True)
class RandomSearchState:
    current: int
    occupation: np.ndarray

    @property
    def estimate(self) -> int:
        return int(np.argmax(self.occupation))


def rs_start(S: int, theta0: int = 0) -> RandomSearchState:
    occ = np.zeros(S)
    occ[theta0] = 1.0
    return RandomSearchState(theta0, occ)


def rs_step(state: RandomSearchState, objective: NoisyObjective, mu: float, rng) -> RandomSearchState:
    """Compare the current candidate with one drawn uniformly from the others;
    move only on a strictly lower cost, then update occupation probabilities."""
    S = len(state.occupation)
    if S < 2:
        raise ValueError("random search needs at least 2 candidates")
    rng = as_stream(rng)
    cand = min(int(rng.child("cand").uniform() * (S - 1)), S - 2)
    if cand >= state.current:
        cand += 1
    c_cur = objective(state.current, rng.child("cur"))
    c_cand = objective(cand, rng.child("cand-cost"))
    cur = cand if c_cand < c_cur else state.current
    occ = state.occupation * (1.0 - mu)
    occ[cur] += mu
    return RandomSearchState(cur, occ)


@dataclass(frozen=True)
class UcbState:
    """Discounted statistics: s = discounted payoff sums, m = discounted counts."""

    s: np.ndarray
    m: np.ndarray
    disc: float = 1.0
    xi: float = 2.0
    bound: float = 1.0

    def __post_init__(self):
        if not 0 < self.disc <= 1:
            raise ValueError("discount must lie in (0, 1]")

    @property
    def c_hat(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.m > 0, self.s / np.where(self.m > 0, self.m, 1.0), 0.0)

    @property
    def total(self) -> float:
        return float(self.m.sum())

    def index(self) -> np.ndarray:
        return self.c_hat + self.bound * np.sqrt(self.xi * math.log(self.total + 1.0) / self.m)


def ucb_init(objective: NoisyObjective, S: int, rng, disc: float = 1.0, xi: float = 2.0,
             bound: float = 1.0) -> UcbState:
    """Pull every arm once."""
    rng = as_stream(rng)
    s = np.array([float(objective(i, rng.child("init", i))) for i in range(S)])
    return UcbState(s, np.ones(S), disc, xi, bound)


def ucb_step(state: UcbState, objective: NoisyObjective, rng) -> tuple[UcbState, int, float]:
    """Pull the arm with the largest upper confidence index (lowest index on ties)."""
    if np.any(state.m <= 0):
        raise ValueError("every arm must be pulled once before ucb_step")
    rng = as_stream(rng)
    theta = int(np.argmax(state.index()))
    pay = float(objective(theta, rng))
    s = state.s * state.disc
    m = state.m * state.disc
    s[theta] += pay
    m[theta] += 1.0
    return replace(state, s=s, m=m), theta, pay


# Poisson-mode benchmark ---------------------------------------------------------

def poisson_bins(lam: float, S: int) -> tuple[np.ndarray, np.ndarray]:
    """[lo, hi) intervals of the uniform that make an inverse-CDF Poisson draw equal theta."""
    if not lam > 0:
        raise ValueError("Poisson rate must be positive")
    cdf = poisson.cdf(np.arange(S + 1), lam)
    lo = np.concatenate([[0.0], cdf[:-1]])
    return np.ascontiguousarray(lo), np.ascontiguousarray(cdf)


def poisson_indicator_objective(lam: float, S: int) -> NoisyObjective:
    """Payoff 1 if a fresh Poisson(lam) draw equals the candidate, else 0."""
    lo, hi = poisson_bins(lam, S)

    def sample(theta: int, rng) -> float:
        v = as_stream(rng).uniform()
        return 1.0 if lo[theta] <= v < hi[theta] else 0.0

    return sample


def optimum_set(lam: float) -> set[int]:
    """Modes of Poisson(lam): floor(lam), plus lam - 1 when lam is an integer."""
    if not lam > 0:
        raise ValueError("Poisson rate must be positive")
    if float(lam).is_integer():
        return {int(lam) - 1, int(lam)}
    return {int(math.floor(lam))}


def poisson_mode_benchmark(lam: float, S: int, algo: str, n_steps: int, n_runs: int, rng=None,
                           checkpoints: Sequence[int] = CHECKPOINTS, decreasing: bool = True,
                           mu: float = 0.01, gamma0: float = 1.0, gamma_exp: float = 0.2,
                           disc: float = 1.0, xi: float = 2.0, bound: float = 1.0) -> dict:
    """Percentage of independent runs whose estimate lies in the mode set at each checkpoint.

    Candidates are 0..S. Budgets count simulations, so an RS iteration
    (two samples) uses two units. AS estimates by the most-sampled
    candidate, RS by the largest occupation probability and UCB by the
    largest discounted mean payoff.
    """
    if algo not in ("AS", "RS", "UCB"):
        raise ValueError(f"unknown algorithm {algo!r}")
    rng = as_stream(rng)
    lo, hi = poisson_bins(lam, S)
    cps = np.array(sorted(c for c in checkpoints if c <= n_steps), dtype=np.int64)
    G = optimum_set(lam)
    hits = np.zeros(len(cps))
    effort = np.zeros(S + 1)
    for r in range(n_runs):
        sub = rng.child(algo, r)
        if algo == "AS":
            est, eff = kernels.as_run(lo, hi, int(n_steps), bool(decreasing), float(mu), float(gamma0),
                                      float(gamma_exp if decreasing else 0.0), sub.uniforms(n_steps, 2), cps)
        elif algo == "RS":
            iters = (n_steps + 1) // 2
            est, eff, _ = kernels.rs_run(lo, hi, int(n_steps), bool(decreasing), float(mu), 0,
                                         sub.uniforms(iters, 3), cps)
        else:
            est, eff, _, _ = kernels.ucb_run(lo, hi, int(n_steps), float(disc), float(xi), float(bound),
                                             sub.uniforms(n_steps), cps)
        hits += np.isin(est, list(G))
        effort += eff
    return {
        "checkpoints": cps.tolist(),
        "percent": (100.0 * hits / n_runs).tolist(),
        "optimum_set": sorted(G),
        "effort": (effort / n_runs).tolist(),
    }
