"""Gradient estimators for expected costs of Markov chains.

Black-box: Kiefer-Wolfowitz central differences and SPSA.
Model-based: score function (likelihood ratio) and weak derivative with
coupled chains. Also a generic stochastic-gradient driver and a small
bias/variance harness.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from ._backend import kernels
from .errors import EstimatorError, NonFiniteError, ScheduleError
from .markov import as_pmf, as_stochastic, cumulative_rows, is_regular
from .errors import NotRegularError
from .rng import RngStream, as_stream

CostOracle = Callable[[np.ndarray, RngStream], float]

Z95 = 1.96


@dataclass
class StepSchedule:
    """Step sizes for the parameter update and the finite-difference width.

    Decreasing: eps_n = eps / (n + 1 + shift)**zeta and
    delta_n = delta / (n + 1)**gamma_exp, which requires 2 zeta - 2 gamma_exp > 1.
    """

    kind: Literal["constant", "decreasing"] = "constant"
    eps: float = 0.01
    shift: float = 0.0
    zeta: float = 1.0
    delta: float = 0.1
    gamma_exp: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "decreasing"):
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.eps <= 0 or self.delta <= 0:
            raise ScheduleError("eps and delta must be positive")
        if self.kind == "decreasing":
            if not 0.5 < self.zeta <= 1.0:
                raise ScheduleError(f"zeta={self.zeta} must lie in (0.5, 1]")
            if not 0.0 <= self.gamma_exp <= 1.0:
                raise ScheduleError(f"gamma_exp={self.gamma_exp} must lie in [0, 1]")
            if not 2 * self.zeta - 2 * self.gamma_exp > 1:
                raise ScheduleError(
                    f"2*zeta - 2*gamma_exp = {2 * self.zeta - 2 * self.gamma_exp:g} must exceed 1"
                )

    def eps_n(self, n: int) -> float:
        if self.kind == "constant":
            return self.eps
        return self.eps / (n + 1 + self.shift) ** self.zeta

    def delta_n(self, n: int) -> float:
        if self.kind == "constant":
            return self.delta
        return self.delta / (n + 1) ** self.gamma_exp


@dataclass
class GradientEstimate:
    value: np.ndarray
    n_samples: int
    variance: np.ndarray
    half_width: np.ndarray
    truncations: int = 0
    info: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples, truncations: int = 0, **info) -> "GradientEstimate":
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        if n > 1:
            var = samples.var(axis=0, ddof=1)
        else:
            var = np.full_like(mean, np.nan)
        return cls(mean, n, var, Z95 * np.sqrt(var / n), truncations, dict(info))

    def to_records(self) -> list[dict]:
        val = np.atleast_1d(self.value)
        var = np.atleast_1d(self.variance)
        hw = np.atleast_1d(self.half_width)
        recs = []
        for idx in np.ndindex(val.shape):
            recs.append({
                "component": list(idx),
                "mean": float(val[idx]),
                "variance": float(var[idx]),
                "half_width": float(hw[idx]),
                "truncations": int(self.truncations),
            })
        return recs


def _call_oracle(oracle: CostOracle, theta, rng, component) -> float:
    try:
        val = float(oracle(theta, rng))
    except Exception as exc:
        raise EstimatorError(f"cost oracle failed for component {component}: {exc}") from exc
    return val


def kw_gradient(oracle: CostOracle, theta, delta: float, rng=None) -> np.ndarray:
    """Central finite differences, two independent oracle calls per coordinate."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    theta = np.asarray(theta, dtype=np.float64)
    rng = as_stream(rng)
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e.flat[i] = delta
        up = _call_oracle(oracle, theta + e, rng.child("kw", i, 0), i)
        dn = _call_oracle(oracle, theta - e, rng.child("kw", i, 1), i)
        g.flat[i] = (up - dn) / (2 * delta)
    return g


def bernoulli_direction(shape, rng: RngStream) -> np.ndarray:
    return np.where(rng.uniforms(*shape) < 0.5, -1.0, 1.0)


def spsa_gradient(oracle: CostOracle, theta, delta: float, rng=None, direction=None) -> np.ndarray:
    """Simultaneous perturbation along one random +-1 direction (two oracle calls)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    theta = np.asarray(theta, dtype=np.float64)
    rng = as_stream(rng)
    d = bernoulli_direction(theta.shape, rng.child("spsa-dir")) if direction is None else np.asarray(direction, float)
    up = _call_oracle(oracle, theta + delta * d, rng.child("spsa", 0), "+d")
    dn = _call_oracle(oracle, theta - delta * d, rng.child("spsa", 1), "-d")
    # 1/d_i == d_i for +-1 entries
    return (up - dn) / (2 * delta) * d


def sgd_drive(oracle: CostOracle, estimator, schedule: StepSchedule, theta0, n_iter: int, rng=None) -> np.ndarray:
    """theta_{n+1} = theta_n - eps_n * g_n. Returns all n_iter + 1 iterates.

    ``estimator`` is ``"kw"``, ``"spsa"`` or a callable
    ``(oracle, theta, delta, rng) -> gradient``.
    """
    rng = as_stream(rng)
    if estimator == "kw":
        est = kw_gradient
    elif estimator == "spsa":
        est = spsa_gradient
    elif callable(estimator):
        est = estimator
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    theta = np.array(theta0, dtype=np.float64)
    traj = np.empty((n_iter + 1,) + theta.shape)
    traj[0] = theta
    for n in range(n_iter):
        g = est(oracle, theta, schedule.delta_n(n), rng.child("iter", n))
        theta = theta - schedule.eps_n(n) * g
        if not np.all(np.isfinite(theta)):
            raise NonFiniteError(n)
        traj[n + 1] = theta
    return traj


# score function ------------------------------------------------------------

def _score_ratio(P: np.ndarray, dP: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(dP != 0, dP / P, 0.0)
    return R


def score_path_value(xs: np.ndarray, ratio: np.ndarray, c: np.ndarray, beta: float = 1.0) -> float:
    """(1/N) sum_{k=1}^N c(x_k) S_k for one path x_0..x_N."""
    inc = ratio[xs[:-1], xs[1:]]
    if beta == 1.0:
        S = np.cumsum(inc)
    else:
        S = np.empty_like(inc)
        s = 0.0
        for k, v in enumerate(inc):
            s = v + beta * s
            S[k] = s
    return float(np.mean(c[xs[1:]] * S))


def score_gradient_chain(P, dP, c, pi0, N: int, rng=None, replications: int = 1) -> GradientEstimate:
    """Score-function estimate of d/dtheta E[(1/N) sum c(x_k)] for a scalar parameter."""
    P = as_stochastic(P)
    dP = np.asarray(dP, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    pi0 = as_pmf(pi0, "pi0")
    if dP.shape != P.shape:
        raise ValueError("dP shape differs from P")
    rng = as_stream(rng)
    ratio = _score_ratio(P, dP)
    undefined = (dP != 0) & (P == 0)
    cum = cumulative_rows(P)
    cum0 = np.cumsum(pi0)
    vals = np.empty(replications)
    for r in range(replications):
        u = rng.child("score-chain", r).uniforms(N + 1)
        x0 = int(min(np.searchsorted(cum0, u[0], side="right"), len(pi0) - 1))
        xs = kernels.sample_chain(cum, x0, np.ascontiguousarray(u[1:]))
        if undefined.any():
            hit = undefined[xs[:-1], xs[1:]]
            if hit.any():
                k = int(np.argmax(hit)) + 1
                raise EstimatorError(f"score undefined at step {k}: transition {xs[k - 1]} -> {xs[k]}")
        vals[r] = score_path_value(xs, ratio, c)
    return GradientEstimate.from_samples(vals)


def finite_score_expectation(P, dP, c, pi0, N: int) -> float:
    """Exact mean of the score estimator: average over n = 1..N of the
    n-step truncated gradients pi0' sum_{j<n} P^j dP P^{n-1-j} c."""
    P = np.asarray(P, dtype=np.float64)
    dP = np.asarray(dP, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    pi0 = np.asarray(pi0, dtype=np.float64)
    X = P.shape[0]
    pows = [np.eye(X)]
    for _ in range(N):
        pows.append(pows[-1] @ P)
    total = 0.0
    for n in range(1, N + 1):
        total += sum(pi0 @ pows[j] @ dP @ pows[n - 1 - j] @ c for j in range(n))
    return float(total / N)


# weak derivative -------------------------------------------------------------

@dataclass
class WeakDerivativeTriplet:
    g: np.ndarray
    p_dot: np.ndarray
    p_ddot: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.g[:, None] * (self.p_dot - self.p_ddot)


def hahn_jordan_decompose(dP, tol: float = 1e-12) -> WeakDerivativeTriplet:
    """Split each row of a row-sum-zero matrix into scaled positive and
    negative probability rows."""
    dP = np.asarray(dP, dtype=np.float64)
    sums = dP.sum(axis=1)
    if np.any(np.abs(sums) > tol):
        raise ValueError(f"rows of dP must sum to 0 (max deviation {np.abs(sums).max():.3g})")
    pos = np.clip(dP, 0.0, None)
    neg = np.clip(-dP, 0.0, None)
    g = pos.sum(axis=1)
    X, Y = dP.shape
    # rows with no mass get a point-mass placeholder; it is weighted by g = 0
    placeholder = np.zeros((X, Y))
    placeholder[np.arange(X), np.arange(X) % Y] = 1.0
    p_dot = placeholder.copy()
    p_ddot = placeholder.copy()
    g_neg = neg.sum(axis=1)
    nz = (g > 0) & (g_neg > 0)
    g = np.where(nz, g, 0.0)
    p_dot[nz] = pos[nz] / g[nz, None]
    p_ddot[nz] = neg[nz] / g_neg[nz, None]
    return WeakDerivativeTriplet(g, p_dot, p_ddot)


def weak_derivative_gradient_chain(P, triplet: WeakDerivativeTriplet, c, pi0, m: int, N: int,
                                   rng=None, replications: int = 1, chunk: int = 4096) -> GradientEstimate:
    """Coupled-chain weak-derivative estimate, one branch pair per replication.

    The nominal chain runs to x_{m-1}; the two branch states are drawn
    from the positive and negative rows with two fresh uniforms, then both
    branches move on a shared uniform sequence until they meet or step N.
    """
    P = as_stochastic(P)
    if not is_regular(P):
        raise NotRegularError("transition matrix is not regular")
    if not 1 <= m < N:
        raise ValueError("need 1 <= m < N")
    c = np.asarray(c, dtype=np.float64)
    pi0 = as_pmf(pi0, "pi0")
    rng = as_stream(rng)
    cum = cumulative_rows(P)
    cum_dot = cumulative_rows(triplet.p_dot)
    cum_ddot = cumulative_rows(triplet.p_ddot)
    cum0 = np.cumsum(pi0)
    g = np.asarray(triplet.g, dtype=np.float64)
    vals = np.empty(replications)
    trunc = 0
    for start in range(0, replications, chunk):
        R = min(chunk, replications - start)
        sub = rng.child("wd-chain", start)
        u0 = sub.uniforms(R)
        x0s = np.minimum(np.searchsorted(cum0, u0, side="right"), len(pi0) - 1).astype(np.int64)
        ub = sub.uniforms(R, 2)
        u = sub.uniforms(R, N - 1)
        v, t = kernels.wd_chain(cum, cum_dot, cum_ddot, g, c, x0s, ub, u, m, N)
        vals[start:start + R] = v
        trunc += int(t.sum())
    return GradientEstimate.from_samples(vals, truncations=trunc)


def bias_variance_harness(estimator: Callable[[RngStream], float], truth: float, batches: int, rng=None) -> dict:
    if batches < 2:
        raise ValueError("need at least 2 batches")
    rng = as_stream(rng)
    vals = np.array([float(estimator(rng.child("batch", b))) for b in range(batches)])
    bias = float(vals.mean() - truth)
    var = float(vals.var(ddof=1))
    return {"bias": bias, "variance": var, "mse": bias**2 + var}
