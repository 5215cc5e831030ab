"""Finite Markov chains: validation, simulation, ergodicity metrics and
simulation-length bounds, plus the exact linear-algebra oracles the
estimators are checked against.

States are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._backend import kernels
from .errors import BoundsUndefinedError, DimensionError, NotRegularError, NotStochasticError
from .rng import RngStream, as_stream

ROW_TOL = 1e-12
RENORM_TOL = 1e-9
REGULAR_TOL = 1e-14


def as_stochastic(P, name: str = "P") -> np.ndarray:
    """Validate a row-stochastic matrix.

    Rows whose sum is off by less than 1e-9 are renormalized, larger
    deviations are rejected.
    """
    P = np.array(P, dtype=np.float64, copy=True)
    if P.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise NotStochasticError(f"{name} has non-finite entries")
    if np.any(P < -ROW_TOL) or np.any(P > 1 + ROW_TOL):
        raise NotStochasticError(f"{name} has entries outside [0, 1]")
    P = np.clip(P, 0.0, 1.0)
    sums = P.sum(axis=1)
    dev = np.abs(sums - 1.0)
    if np.any(dev > RENORM_TOL):
        bad = int(np.argmax(dev))
        raise NotStochasticError(f"{name} row {bad} sums to {sums[bad]!r}")
    fix = dev > 0
    if np.any(fix):
        P[fix] /= sums[fix, None]
    return P


def as_pmf(p, name: str = "pmf") -> np.ndarray:
    p = np.array(p, dtype=np.float64, copy=True).ravel()
    if np.any(p < -ROW_TOL) or not np.all(np.isfinite(p)):
        raise NotStochasticError(f"{name} has invalid entries")
    p = np.clip(p, 0.0, None)
    s = p.sum()
    if abs(s - 1.0) > RENORM_TOL:
        raise NotStochasticError(f"{name} sums to {s!r}")
    return p / s


def cumulative_rows(P: np.ndarray) -> np.ndarray:
    """Row-wise cumulative sums used for inverse-CDF sampling."""
    return np.ascontiguousarray(np.cumsum(P, axis=-1))


def categorical(p: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from ``p`` with one uniform."""
    cum = np.cumsum(p)
    j = 0
    while j < len(cum) - 1 and u >= cum[j]:
        j += 1
    return j


def simulate_chain(P, pi0, n: int, rng: RngStream | int | None = None) -> np.ndarray:
    """Sample path x_0..x_{n-1}.

    The initial state uses one uniform against ``pi0``; every transition
    uses one uniform against the current row of ``P``.
    """
    P = as_stochastic(P)
    pi0 = as_pmf(pi0, "pi0")
    if P.shape[0] != P.shape[1] or pi0.shape[0] != P.shape[0]:
        raise DimensionError(f"P {P.shape} and pi0 {pi0.shape} disagree")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_stream(rng)
    u = rng.uniforms(n)
    x0 = categorical(pi0, u[0])
    return kernels.sample_chain(cumulative_rows(P), x0, np.ascontiguousarray(u[1:]))


def is_regular(P: np.ndarray) -> bool:
    X = P.shape[0]
    return bool(np.all(np.linalg.matrix_power(P, X) > REGULAR_TOL))


def stationary_distribution(P) -> np.ndarray:
    """Unique invariant pmf of a regular chain.

    One balance equation is replaced by the normalization constraint and
    the resulting square system is solved directly.
    """
    P = as_stochastic(P)
    X = P.shape[0]
    if P.shape[1] != X:
        raise DimensionError("P must be square")
    if not is_regular(P):
        raise NotRegularError("transition matrix is not regular")
    A = P.T - np.eye(X)
    A[-1, :] = 1.0
    b = np.zeros(X)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NotRegularError("transition matrix is not regular") from exc
    if np.any(pi <= 0):
        raise NotRegularError("stationary solution is not strictly positive")
    return pi / pi.sum()


def dobrushin_coefficient(P) -> float:
    P = as_stochastic(P)
    diff = np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2)
    return float(0.5 * diff.max())


def variational_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise DimensionError(f"pmfs have different lengths {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


@dataclass
class SimulationBounds:
    """Finite-sample guarantees for the time average of ``h`` over ``n`` steps."""

    bias_bound: float
    msd_bound: float
    n: int
    h: np.ndarray
    rho: float
    spread: float
    degenerate: bool = False
    concentration: Callable[[float], float] = field(repr=False, default=None)


def howlong_bounds(P, h, pi0, n: int) -> SimulationBounds:
    """Bias, mean-square-deviation and concentration bounds for the time
    average of ``h`` along an ``n``-point sample path started from ``pi0``.

    The mean-square bound omits the O(1/n^2) remainder.
    """
    P = as_stochastic(P)
    h = np.asarray(h, dtype=np.float64).ravel()
    pi0 = as_pmf(pi0, "pi0")
    if h.shape[0] != P.shape[0] or pi0.shape[0] != P.shape[0]:
        raise DimensionError("P, h and pi0 dimensions disagree")
    rho = dobrushin_coefficient(P)
    if rho >= 1.0:
        raise BoundsUndefinedError("Dobrushin coefficient is 1; bounds undefined")
    pi = stationary_distribution(P)
    spread = float(h.max() - h.min())
    gap = 1.0 - rho
    bias = spread / (n * gap) * variational_distance(pi0, pi)
    X = P.shape[0]
    dv2 = sum(variational_distance(np.eye(X)[i], pi) ** 2 * pi[i] for i in range(X))
    msd = 2.0 * spread**2 / (n * gap) * dv2
    degenerate = spread == 0.0

    def concentration(eps: float) -> float:
        if degenerate:
            return 0.0
        return 2.0 * float(np.exp(-(eps**2) * gap**2 * n / spread**2))

    return SimulationBounds(bias, msd, n, h, rho, spread, degenerate, concentration)


def bounds_experiment(P, h, pi0, n: int, seeds: int, rng=None) -> dict:
    """Empirical bias and mean-square deviation of the n-point time average
    of h over independent sample paths, next to the theoretical bounds."""
    rng = as_stream(rng)
    h = np.asarray(h, dtype=np.float64).ravel()
    b = howlong_bounds(P, h, pi0, n)
    target = float(h @ stationary_distribution(P))
    avgs = np.array([empirical_average(simulate_chain(P, pi0, n, rng.child("path", s)), h) for s in range(seeds)])
    dev = avgs - target
    bias = float(abs(dev.mean()))
    msd = float(np.mean(dev**2))
    return {
        "target": target,
        "bias_bound": b.bias_bound,
        "empirical_bias": bias,
        "bias_se": float(dev.std(ddof=1) / np.sqrt(seeds)),
        "msd_bound": b.msd_bound,
        "empirical_msd": msd,
        "dobrushin": b.rho,
    }


def fundamental_matrix(P) -> np.ndarray:
    """Z = (I - P + 1 pi')^{-1}."""
    P = as_stochastic(P)
    X = P.shape[0]
    pi = stationary_distribution(P)
    A = np.eye(X) - P + np.outer(np.ones(X), pi)
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise NotRegularError("I - P + 1 pi' is singular") from exc


def empirical_average(traj, h) -> float:
    traj = np.asarray(traj)
    if traj.size == 0:
        raise ValueError("empty trajectory")
    return float(np.mean(np.asarray(h, dtype=np.float64)[traj]))
