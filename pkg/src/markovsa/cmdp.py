"""Primal-dual policy-gradient learning for constrained average-cost MDPs
and an exhaustive grid oracle for small instances."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DimensionError, EstimatorError, InfeasibleError, NonFiniteError
from .mdp import MdpModel, PolicyParam, occupation_measure, theta_from_params
from .policy_gradient import (
    BatchTrajectory,
    Estimator,
    score_gradient_mdp,
    simulate_batch,
    wd_gradient_mdp,
    wd_gradient_parameter_free,
)
from .rng import as_stream
from .textio import parse_cmdp


@dataclass(frozen=True)
class CmdpModel:
    """Minimize the average cost subject to average beta_l <= gamma_l."""

    mdp: MdpModel
    betas: np.ndarray  # (L, X, U)
    levels: np.ndarray  # (L,)

    def __post_init__(self):
        betas = np.array(self.betas, dtype=np.float64)
        levels = np.array(self.levels, dtype=np.float64).ravel()
        if betas.ndim == 2:
            betas = betas[None]
        if betas.ndim != 3 or betas.shape[1:] != (self.mdp.X, self.mdp.U):
            raise DimensionError(f"constraint matrices must have shape (L, {self.mdp.X}, {self.mdp.U})")
        if betas.shape[0] < 1:
            raise DimensionError("need at least one constraint")
        if levels.shape != (betas.shape[0],):
            raise DimensionError(f"expected {betas.shape[0]} levels, got {levels.shape[0]}")
        if not (np.all(np.isfinite(betas)) and not np.any(np.isnan(levels))):
            raise ValueError("constraint data must be finite")
        betas.setflags(write=False)
        levels.setflags(write=False)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "levels", levels)

    @property
    def L(self) -> int:
        return self.betas.shape[0]

    @classmethod
    def from_text(cls, text: str) -> "CmdpModel":
        P, c, betas, levels = parse_cmdp(text)
        return cls(MdpModel(P, c), betas, levels)

    @classmethod
    def from_file(cls, path) -> "CmdpModel":
        return cls.from_text(Path(path).read_text())


def exact_values(cmdp: CmdpModel, theta) -> tuple[float, np.ndarray]:
    """Exact average cost and constraint values sum pi beta_l (levels not subtracted)."""
    pi = occupation_measure(cmdp.mdp, theta)
    return float(np.sum(pi * cmdp.mdp.c)), np.einsum("xu,lxu->l", pi, cmdp.betas)


@dataclass(frozen=True)
class PrimalDualState:
    param: PolicyParam
    lam: np.ndarray
    B_hat: np.ndarray  # smoothed constraint-minus-level estimates
    penalty: float = 100.0
    eps: float = 0.005

    def __post_init__(self):
        lam = np.array(self.lam, dtype=np.float64).ravel()
        B_hat = np.array(self.B_hat, dtype=np.float64).ravel()
        if lam.shape != B_hat.shape:
            raise DimensionError("lam and B_hat must have the same length")
        if np.any(lam < 0):
            raise ValueError("multipliers must be nonnegative")
        if not self.penalty > 0:
            raise ValueError("penalty must be positive")
        if not 0 < self.eps < self.penalty:
            raise ValueError("step size must satisfy 0 < eps < penalty")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "B_hat", B_hat)


def constraint_estimate_update(state: PrimalDualState, batch: BatchTrajectory, cmdp: CmdpModel) -> np.ndarray:
    """B_hat_l + sqrt(eps) * (batch mean of beta_l - gamma_l - B_hat_l)."""
    means = cmdp.betas[:, batch.xs, batch.us].mean(axis=1)
    return state.B_hat + np.sqrt(state.eps) * (means - cmdp.levels - state.B_hat)


def primal_dual_update(state: PrimalDualState, grad_C, grad_B, B_hat) -> PrimalDualState:
    """Augmented-Lagrangian step on psi and multiplier step on lam."""
    grad_C = np.asarray(grad_C, dtype=np.float64)
    grad_B = np.asarray(grad_B, dtype=np.float64)
    B_hat = np.asarray(B_hat, dtype=np.float64)
    psi = state.param.psi
    if grad_C.shape != psi.shape or grad_B.shape != (len(state.lam),) + psi.shape:
        raise DimensionError("gradients must be shaped like psi")
    weights = np.maximum(0.0, state.lam + state.penalty * B_hat)
    new_psi = psi - state.eps * (grad_C + np.einsum("l,l...->...", weights, grad_B))
    new_lam = np.maximum((1.0 - state.eps / state.penalty) * state.lam, state.lam + state.eps * B_hat)
    if not (np.all(np.isfinite(new_psi)) and np.all(np.isfinite(new_lam))):
        raise NonFiniteError(-1, "non-finite primal-dual update")
    return replace(state, param=state.param.replace(new_psi), lam=new_lam, B_hat=B_hat)


@dataclass
class CmdpTrajectory:
    psi: np.ndarray  # (n+1, ...) iterates
    lam: np.ndarray  # (n+1, L)
    B_hat: np.ndarray  # (n+1, L)
    cost: np.ndarray  # (n+1,) exact average cost
    constraints: np.ndarray  # (n+1, L) exact sum pi beta_l
    failures: int = 0
    info: dict = field(default_factory=dict)

    def final_theta(self, kind: str) -> np.ndarray:
        return theta_from_params(PolicyParam(kind, self.psi[-1]))


def _gradients(cmdp: CmdpModel, param: PolicyParam, theta, batch: BatchTrajectory, estimator: Estimator,
               N: int, x0: int, m: int | None, sub):
    cost_tables = [cmdp.mdp.c] + [cmdp.betas[l] for l in range(cmdp.L)]
    out = []
    for k, table in enumerate(cost_tables):
        b = BatchTrajectory(batch.xs, batch.us, table[batch.xs, batch.us], batch.index)
        if estimator == "score":
            g = score_gradient_mdp(b, theta, param).value
        elif estimator == "wd":
            mm = max(1, N // 10) if m is None else m
            # the same stream for every cost table gives common random numbers
            g = wd_gradient_mdp(cmdp.mdp, param, mm, N, sub.child("wd"), x0=x0, costs=table).value
        elif estimator == "wd_parameter_free":
            g = wd_gradient_parameter_free(b, theta, param, rng=sub.child("wdpf")).value
        else:
            raise ValueError(f"unknown estimator {estimator!r}")
        out.append(g)
    return out[0], np.stack(out[1:])


def cmdp_train(cmdp: CmdpModel, kind: str, N: int, n_batches: int, eps: float = 0.005, penalty: float = 100.0,
               estimator: Estimator = "wd", rng=None, psi0=None, lam0=None, m: int | None = None) -> CmdpTrajectory:
    """Primal-dual reinforcement learning, one simulated batch of N steps per iteration.

    Each iteration observes a batch under the current policy, smooths the
    constraint estimates, estimates the gradients of the cost and of every
    beta_l on that batch and applies ``primal_dual_update``. Exact cost and
    constraint values of every iterate are recorded for diagnostics.
    Estimator failures leave the iterate unchanged and are counted.
    """
    rng = as_stream(rng)
    mdp = cmdp.mdp
    if psi0 is None:
        psi0 = np.zeros((mdp.X, mdp.U if kind == "exponential" else mdp.U - 1))
        if kind == "spherical":
            psi0 += np.pi / 4  # away from the poles
    state = PrimalDualState(PolicyParam(kind, psi0), np.zeros(cmdp.L) if lam0 is None else lam0,
                            np.zeros(cmdp.L), penalty, eps)
    psis = np.empty((n_batches + 1,) + state.param.psi.shape)
    lams = np.empty((n_batches + 1, cmdp.L))
    Bs = np.empty((n_batches + 1, cmdp.L))
    costs = np.empty(n_batches + 1)
    cons = np.empty((n_batches + 1, cmdp.L))

    def record(i):
        theta = theta_from_params(state.param)
        psis[i], lams[i], Bs[i] = state.param.psi, state.lam, state.B_hat
        costs[i], cons[i] = exact_values(cmdp, theta)

    record(0)
    failures = 0
    x = 0
    for n in range(n_batches):
        sub = rng.child("cmdp", n)
        theta = theta_from_params(state.param)
        batch = simulate_batch(mdp, theta, N + 1, x, sub.child("batch"), n)
        B_hat = constraint_estimate_update(state, batch, cmdp)
        try:
            gC, gB = _gradients(cmdp, state.param, theta, batch, estimator, N, x, m, sub)
        except EstimatorError:
            failures += 1
            state = replace(state, B_hat=B_hat)
        else:
            try:
                state = primal_dual_update(state, gC, gB, B_hat)
            except NonFiniteError as exc:
                raise NonFiniteError(n) from exc
        x = int(batch.xs[-1])
        record(n + 1)
    return CmdpTrajectory(psis, lams, Bs, costs, cons, failures)


def simplex_grid(U: int, points: int) -> np.ndarray:
    """All probability vectors of length U with coordinates in {0, 1/(points-1), ..., 1}."""
    k = points - 1
    rows = [c for c in itertools.product(range(k + 1), repeat=U - 1) if sum(c) <= k]
    return np.array([list(c) + [k - sum(c)] for c in rows], dtype=np.float64) / k


def cmdp_grid_oracle(cmdp: CmdpModel, points: int = 41) -> dict:
    """Exhaustive search over randomized policies whose rows lie on a simplex grid.

    Returns the feasible minimizer with its exact cost and constraint
    values; raises InfeasibleError if no grid point is feasible.
    """
    X, U = cmdp.mdp.X, cmdp.mdp.U
    if X * (U - 1) > 4:
        raise DimensionError("grid oracle needs X * (U - 1) <= 4")
    if points < 2:
        raise ValueError("need at least 2 grid points per axis")
    rows = simplex_grid(U, points)
    best = None
    tol = 1e-12
    for idx in itertools.product(range(len(rows)), repeat=X):
        theta = rows[list(idx)]
        C, B = exact_values(cmdp, theta)
        if np.all(B <= cmdp.levels + tol) and (best is None or C < best[1]):
            best = (theta, C, B)
    if best is None:
        raise InfeasibleError("no grid point satisfies the constraints")
    return {"theta": best[0], "cost": best[1], "constraints": best[2]}
