"""Simulation-based policy-gradient estimation and training for
average-cost MDPs with randomized stationary policies."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from ._backend import kernels
from .errors import EstimatorError, NonFiniteError
from .gradients import GradientEstimate, StepSchedule
from .markov import cumulative_rows
from .mdp import (
    MdpModel,
    PolicyParam,
    average_cost,
    exact_policy_gradient,
    spherical_guard,
    theta_from_params,
)
from .rng import RngStream, as_stream

Estimator = Literal["score", "wd", "wd_parameter_free"]


@dataclass
class BatchTrajectory:
    xs: np.ndarray
    us: np.ndarray
    costs: np.ndarray
    index: int = 0

    def __post_init__(self):
        if not (len(self.xs) == len(self.us) == len(self.costs)):
            raise ValueError("batch arrays must have equal lengths")

    def __len__(self) -> int:
        return len(self.xs)


def simulate_batch(mdp: MdpModel, theta, n: int, x0: int, rng: RngStream, index: int = 0,
                   costs=None) -> BatchTrajectory:
    cost = mdp.c if costs is None else np.asarray(costs, dtype=np.float64)
    uu = rng.uniforms(n)
    ux = rng.uniforms(max(n - 1, 0))
    xs, us = kernels.sample_mdp(cumulative_rows(mdp.P), cumulative_rows(theta), int(x0), ux, uu)
    return BatchTrajectory(xs, us, cost[xs, us], index)


# score function -------------------------------------------------------------

def score_increments(param: PolicyParam, theta: np.ndarray) -> np.ndarray:
    """inc[x, u, a]: derivative of log theta[x, u] with respect to psi[x, a]."""
    X, U = theta.shape
    if param.kind == "exponential":
        return np.eye(U)[None, :, :] - theta[:, None, :]
    psi = param.psi
    spherical_guard(psi)
    K = U - 1
    t = np.tan(psi)
    inc = np.zeros((X, U, K))
    for u in range(U):
        for a in range(K):
            if a < u:
                inc[:, u, a] = 2.0 / t[:, a]
            elif a == u:
                inc[:, u, a] = -2.0 * t[:, a]
    return inc


def score_gradient_mdp(batch: BatchTrajectory, theta, param: PolicyParam, beta: float = 1.0,
                       costs=None) -> GradientEstimate:
    """Score-function estimate from one batch z_0..z_N.

    The score is S_k = inc(z_k) + beta S_{k-1} and the estimate is the mean
    of c(z_k) S_k over k = 1..N.
    """
    theta = np.asarray(theta, dtype=np.float64)
    X, U = theta.shape
    cost = np.zeros((X, U))
    # costs are carried by the batch; rebuild a lookup table for the kernel
    cost[batch.xs, batch.us] = batch.costs if costs is None else np.asarray(costs)[batch.xs, batch.us]
    inc = np.ascontiguousarray(score_increments(param, theta))
    est = kernels.score_accumulate(batch.xs, batch.us, cost, inc, float(beta))
    return GradientEstimate(est, 1, np.full(est.shape, np.nan), np.full(est.shape, np.nan))


# weak derivative -------------------------------------------------------------

def wd_components(param: PolicyParam, theta: np.ndarray):
    """Per-component (x, a): scale g and branch pmf for the negative part.

    exponential: d theta[x] / d psi[x,a] = g (e_a - q) with g = theta_a (1 - theta_a)
    and q proportional to theta over the other actions.
    spherical: the same form with g = -2 theta_a tan psi_a and q proportional
    to theta over actions after a.
    """
    X, U = theta.shape
    K = param.psi.shape[1]
    g = np.zeros((X, K))
    q = np.zeros((X, K, U))
    if param.kind == "spherical":
        spherical_guard(param.psi)
    for x in range(X):
        for a in range(K):
            if param.kind == "exponential":
                w = theta[x].copy()
                w[a] = 0.0
                g[x, a] = theta[x, a] * (1.0 - theta[x, a])
            else:
                w = np.zeros(U)
                w[a + 1:] = theta[x, a + 1:]
                g[x, a] = -2.0 * theta[x, a] * np.tan(param.psi[x, a])
            s = w.sum()
            if s > 0 and g[x, a] != 0:
                q[x, a] = w / s
            else:
                g[x, a] = 0.0
                q[x, a, a] = 1.0
    return g, q


def _component_arrays(g):
    comps = [(x, a) for x in range(g.shape[0]) for a in range(g.shape[1]) if g[x, a] != 0]
    cx = np.array([c[0] for c in comps], dtype=np.int64)
    ca = np.array([c[1] for c in comps], dtype=np.int64)
    return comps, cx, ca


def wd_gradient_mdp(mdp: MdpModel, param: PolicyParam, m: int, N: int, rng=None,
                    batches: int = 1, x0: int = 0, costs=None) -> GradientEstimate:
    """Model-based weak-derivative estimate with coupled branch chains.

    Each batch simulates N steps. Every visit to (x, a) at or after step m
    that is not inside an earlier coupling window starts a branch at
    (x, u_branch); the branch is propagated with the nominal chain's
    uniforms until it rejoins the nominal chain. The component estimate is
    g * (visits to x / (N - m)) * mean branch cost difference.
    """
    if not 0 <= m < N:
        raise ValueError("need 0 <= m < N")
    rng = as_stream(rng)
    cost = mdp.c if costs is None else np.asarray(costs, dtype=np.float64)
    theta = theta_from_params(param)
    g, q = wd_components(param, theta)
    comps, cx, ca = _component_arrays(g)
    branch_cum = np.ascontiguousarray(np.cumsum(q[cx, ca], axis=1)) if comps else np.zeros((0, mdp.U))
    cum_p = cumulative_rows(mdp.P)
    cum_t = cumulative_rows(theta)
    samples = np.zeros((batches,) + g.shape)
    trunc = 0
    anchors = np.zeros(g.shape, dtype=np.int64)
    for b in range(batches):
        sub = rng.child("wd-mdp", b)
        uu = sub.uniforms(N)
        ux = sub.uniforms(N - 1)
        ub = sub.uniforms(len(comps), N)
        xs, us = kernels.sample_mdp(cum_p, cum_t, int(x0), ux, uu)
        if not comps:
            continue
        sums, _, counts, tr = kernels.wd_mdp_coupled(cum_p, cum_t, cost, xs, us, ux, uu,
                                                     cx, ca, branch_cum, ub, int(m))
        visits = np.bincount(xs[m:], minlength=mdp.X) / (N - m)
        for k, (x, a) in enumerate(comps):
            anchors[x, a] += counts[k]
            if counts[k]:
                samples[b, x, a] = g[x, a] * visits[x] * sums[k] / counts[k]
        trunc += int(tr.sum())
    return GradientEstimate.from_samples(samples, truncations=trunc, anchors=anchors)


def wd_gradient_parameter_free(batch: BatchTrajectory, theta, param: PolicyParam,
                               c_hat: float | None = None, N: int | None = None,
                               rng=None) -> GradientEstimate:
    """Weak-derivative estimate that needs no transition model.

    For an anchor at a visit to (x, a) a branch action u_b is drawn and the
    batch is searched for the next visit to (x, u_b), nu steps later. The
    anchor contributes sum_{k=m}^{m+nu-1} c(z_k) - nu * c_hat, an estimate
    of the relative-value difference between (x, a) and (x, u_b). Anchors
    with no later visit are dropped and counted.
    """
    rng = as_stream(rng)
    theta = np.asarray(theta, dtype=np.float64)
    X, U = theta.shape
    n = len(batch) if N is None else int(N)
    xs, us, cz = batch.xs[:n], batch.us[:n], batch.costs[:n]
    if c_hat is None:
        c_hat = float(np.mean(cz))
    cost = np.zeros((X, U))
    cost[xs, us] = cz
    g, q = wd_components(param, theta)
    comps, cx, ca = _component_arrays(g)
    est = np.zeros(g.shape)
    if not comps:
        return GradientEstimate(est, 1, np.full(est.shape, np.nan), np.full(est.shape, np.nan))
    branch_cum = np.ascontiguousarray(np.cumsum(q[cx, ca], axis=1))
    ub = rng.child("wd-free", batch.index).uniforms(len(comps), n)
    sums, _, counts, dropped = kernels.wd_free(xs, us, cost, cx, ca, branch_cum, ub, float(c_hat))
    if counts.sum() == 0:
        raise EstimatorError("no valid anchor in batch")
    visits = np.bincount(xs, minlength=X) / n
    empty = []
    for k, (x, a) in enumerate(comps):
        if counts[k]:
            est[x, a] = g[x, a] * visits[x] * sums[k] / counts[k]
        else:
            empty.append((x, a))
    return GradientEstimate(est, 1, np.full(est.shape, np.nan), np.full(est.shape, np.nan),
                            truncations=int(dropped.sum()),
                            info={"dropped": dropped.tolist(), "empty_components": empty})


# training ----------------------------------------------------------------------

@dataclass
class TrainResult:
    psi: np.ndarray
    cost_estimates: np.ndarray
    failures: int = 0


def estimate_gradient(mdp: MdpModel, param: PolicyParam, estimator: Estimator, N: int, rng: RngStream,
                      x0: int = 0, beta: float = 1.0, m: int | None = None, index: int = 0,
                      costs=None) -> tuple[np.ndarray, BatchTrajectory]:
    theta = theta_from_params(param)
    batch = simulate_batch(mdp, theta, N + 1, x0, rng.child("batch", index), index, costs)
    if estimator == "score":
        g = score_gradient_mdp(batch, theta, param, beta).value
    elif estimator == "wd":
        mm = max(1, N // 10) if m is None else m
        g = wd_gradient_mdp(mdp, param, mm, N, rng.child("wd", index), x0=x0, costs=costs).value
    elif estimator == "wd_parameter_free":
        g = wd_gradient_parameter_free(batch, theta, param, rng=rng.child("wdpf", index)).value
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return g, batch


def policy_gradient_train(mdp: MdpModel, param0: PolicyParam, schedule: StepSchedule, N: int,
                          n_batches: int, estimator: Estimator = "score", rng=None,
                          beta: float = 1.0, m: int | None = None) -> TrainResult:
    """psi_{n+1} = psi_n - eps_n * grad_estimate_n, one simulated batch per step."""
    rng = as_stream(rng)
    param = param0
    psis = np.empty((n_batches + 1,) + param0.psi.shape)
    psis[0] = param0.psi
    costs = np.empty(n_batches)
    failures = 0
    x = 0
    for n in range(n_batches):
        try:
            g, batch = estimate_gradient(mdp, param, estimator, N, rng, x, beta, m, n)
            x = int(batch.xs[-1])
            costs[n] = float(np.mean(batch.costs))
        except EstimatorError:
            g = np.zeros_like(param.psi)
            costs[n] = np.nan
            failures += 1
        with np.errstate(over="ignore", invalid="ignore"):  # reported as NonFiniteError below
            psi = param.psi - schedule.eps_n(n) * g
        if not np.all(np.isfinite(psi)):
            raise NonFiniteError(n)
        param = param.replace(psi)
        psis[n + 1] = psi
    return TrainResult(psis, costs, failures)


# variance comparison -------------------------------------------------------------

def variance_comparison_experiment(mdp: MdpModel, param: PolicyParam, Ns: Sequence[int] = (1000, 10000),
                                   batches: int = 100, rng=None, estimators=("wd", "score"),
                                   score_batches: int | None = None, m: int = 100) -> dict:
    """Per estimator and batch size: mean, variance and 95% half-width of
    every gradient component across independent batches, plus CPU time."""
    rng = as_stream(rng)
    truth = exact_policy_gradient(mdp, param)
    theta = theta_from_params(param)
    out = {"truth": truth, "results": []}
    for est in estimators:
        for N in Ns:
            nb = score_batches if (est == "score" and score_batches) else batches
            sub = rng.child(est, N)
            t0 = time.process_time()
            if est == "wd":
                ge = wd_gradient_mdp(mdp, param, m, N, sub, batches=nb)
            elif est == "score":
                vals = np.empty((nb,) + truth.shape)
                for b in range(nb):
                    batch = simulate_batch(mdp, theta, N + 1, 0, sub.child("batch", b), b)
                    vals[b] = score_gradient_mdp(batch, theta, param).value
                ge = GradientEstimate.from_samples(vals)
            elif est == "wd_parameter_free":
                vals = np.empty((nb,) + truth.shape)
                for b in range(nb):
                    batch = simulate_batch(mdp, theta, N, 0, sub.child("batch", b), b)
                    vals[b] = wd_gradient_parameter_free(batch, theta, param, rng=sub.child("free", b)).value
                ge = GradientEstimate.from_samples(vals)
            else:
                raise ValueError(f"unknown estimator {est!r}")
            cpu = time.process_time() - t0
            out["results"].append({"estimator": est, "N": N, "batches": nb, "estimate": ge, "cpu": cpu})
    return out


# sliding-window state ------------------------------------------------------------

@dataclass
class WindowState:
    window: int
    n_obs: int
    n_act: int
    contents: list = field(default_factory=list)

    @property
    def base(self) -> int:
        return self.n_obs * self.n_act + 1

    @property
    def n_states(self) -> int:
        return self.base ** self.window

    def push(self, y: int, u: int) -> None:
        self.contents.append((int(y), int(u)))
        if len(self.contents) > self.window:
            self.contents.pop(0)

    def index(self) -> int:
        return encode_window(self.contents, self.window, self.n_obs, self.n_act)


NULL = None


def encode_window(history, window: int, n_obs: int, n_act: int) -> int:
    """Encode the last ``window`` (obs, action) pairs as one integer.

    Symbol 0 marks an empty slot; pair (y, u) maps to 1 + y * n_act + u.
    Slot 0 is the most recent pair.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    base = n_obs * n_act + 1
    if base ** window > np.iinfo(np.int64).max:
        raise OverflowError("window encoding does not fit in int64")
    recent = list(history)[-window:][::-1]
    idx = 0
    for slot in range(window):
        if slot < len(recent):
            y, u = recent[slot]
            if not (0 <= y < n_obs and 0 <= u < n_act):
                raise ValueError(f"pair {(y, u)} outside the alphabets")
            sym = 1 + y * n_act + u
        else:
            sym = 0
        idx += sym * base**slot
    return idx


def decode_window(idx: int, window: int, n_obs: int, n_act: int) -> list:
    """Inverse of encode_window; empty slots decode to None (most recent first)."""
    base = n_obs * n_act + 1
    out = []
    for _ in range(window):
        idx, sym = divmod(idx, base)
        out.append(NULL if sym == 0 else divmod(sym - 1, n_act))
    return out


def window_state_adapter(history, window: int, n_obs: int, n_act: int) -> int:
    return encode_window(history, window, n_obs, n_act)
