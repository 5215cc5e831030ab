"""Hidden Markov model filtering, recursive maximum-likelihood estimation and
LMS tracking of a slowly jumping Markov parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import kernels
from .errors import DimensionError
from .markov import as_pmf, as_stochastic, cumulative_rows, simulate_chain
from .rng import as_stream

SIGMA_LO = 0.1
SIGMA_HI = 10.0


@dataclass(frozen=True)
class HmmModel:
    """y_k = mean[x_k] + sigma[x_k] v_k with v_k standard normal.

    Transitions are the row softmax of ``psi`` (X x X). The parameter
    vector packs psi row-major followed by sigma.
    """

    psi: np.ndarray
    sigma: np.ndarray
    means: np.ndarray | None = None
    sigma_lo: float = SIGMA_LO
    sigma_hi: float = SIGMA_HI

    def __post_init__(self):
        psi = np.array(self.psi, dtype=np.float64)
        sigma = np.array(self.sigma, dtype=np.float64).ravel()
        X = psi.shape[0]
        if psi.shape != (X, X) or sigma.shape != (X,):
            raise DimensionError("psi must be X x X and sigma must have X entries")
        means = np.arange(1, X + 1, dtype=np.float64) if self.means is None else np.array(self.means, dtype=np.float64)
        if means.shape != (X,):
            raise DimensionError("means must have X entries")
        if not 0 < self.sigma_lo <= self.sigma_hi:
            raise ValueError("need 0 < sigma_lo <= sigma_hi")
        if np.any(sigma < self.sigma_lo) or np.any(sigma > self.sigma_hi):
            raise ValueError(f"sigma must lie in [{self.sigma_lo}, {self.sigma_hi}]")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "means", means)

    @classmethod
    def from_transition(cls, P, sigma, **kw) -> "HmmModel":
        P = as_stochastic(P)
        if np.any(P <= 0):
            raise ValueError("the exponential parametrization needs strictly positive transitions")
        return cls(np.log(P), sigma, **kw)

    @property
    def X(self) -> int:
        return self.psi.shape[0]

    @property
    def n_params(self) -> int:
        return self.X * self.X + self.X

    @property
    def P(self) -> np.ndarray:
        z = self.psi - self.psi.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def params(self) -> np.ndarray:
        return np.concatenate([self.psi.ravel(), self.sigma])

    def with_params(self, theta) -> "HmmModel":
        theta = np.asarray(theta, dtype=np.float64)
        X = self.X
        return replace(self, psi=theta[: X * X].reshape(X, X), sigma=theta[X * X:])

    def dP(self) -> np.ndarray:
        """dP[l] = derivative of P with respect to parameter l (zero for sigma entries)."""
        X = self.X
        P = self.P
        out = np.zeros((self.n_params, X, X))
        for r in range(X):
            for c in range(X):
                out[r * X + c, r] = P[r, c] * ((np.arange(X) == c) - P[r])
        return out

    def emission(self, y: float) -> tuple[np.ndarray, np.ndarray]:
        """Densities b_i = p(y | x = i) and db_i / dsigma_i."""
        z = y - self.means
        s = self.sigma
        b = np.exp(-0.5 * (z / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        return b, b * (z * z / s ** 3 - 1.0 / s)

    def dB(self, y: float) -> np.ndarray:
        """dB[l] = derivative of the emission diagonal with respect to parameter l."""
        X = self.X
        _, db = self.emission(y)
        out = np.zeros((self.n_params, X))
        out[X * X + np.arange(X), np.arange(X)] = db
        return out


def _likelihood(pi, b, k=None, y=None):
    d = float(b @ pi)
    if not d > 0:
        raise FloatingPointError(f"zero likelihood at step {k} (y = {y})")
    return d


def predictor_step(pi, y: float, model: HmmModel, k: int | None = None) -> tuple[np.ndarray, float]:
    """Return the next one-step predictor P' B_y pi / (1' B_y pi) and log(1' B_y pi)."""
    pi = np.asarray(pi, dtype=np.float64)
    b, _ = model.emission(y)
    d = _likelihood(pi, b, k, y)
    new = model.P.T @ (b * pi) / d
    return new / new.sum(), math.log(d)


def incremental_score(pi, w, y: float, model: HmmModel) -> np.ndarray:
    """Gradient of log(1' B_y pi) with respect to every parameter, given the
    predictor pi and its sensitivity w (X x p)."""
    pi = np.asarray(pi, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    b, _ = model.emission(y)
    d = _likelihood(pi, b, y=y)
    return (b @ w + model.dB(y) @ pi) / d


def sensitivity_step(w, pi, y: float, model: HmmModel, component: int | None = None) -> np.ndarray:
    """Propagate the predictor sensitivity: w_l <- R1 w_l + R2_l with

    R1 = P' [I - B pi 1' / d] B / d and
    R2_l = P' [I - B pi 1' / d] (dB_l) pi / d + (dP_l)' B pi / d.
    """
    pi = np.asarray(pi, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    X = model.X
    b, _ = model.emission(y)
    d = _likelihood(pi, b, y=y)
    P = model.P
    proj = np.eye(X) - np.outer(b * pi, np.ones(X)) / d
    R1 = P.T @ proj @ np.diag(b) / d
    q = b * pi / d
    dB = model.dB(y)
    dP = model.dP()
    cols = range(model.n_params) if component is None else [component]
    out = w.copy()
    for l in cols:
        R2 = P.T @ proj @ (dB[l] * pi) / d + dP[l].T @ q
        out[:, l] = R1 @ w[:, l] + R2
    return out


def project(model: HmmModel, theta) -> HmmModel:
    """Clip the sigma entries to their bounds; transition parameters are unconstrained."""
    theta = np.array(theta, dtype=np.float64)
    X = model.X
    theta[X * X:] = np.clip(theta[X * X:], model.sigma_lo, model.sigma_hi)
    return model.with_params(theta)


def rmle_step(model: HmmModel, score, eps: float) -> HmmModel:
    if not eps > 0:
        raise ValueError("step size must be positive")
    return project(model, model.params() + eps * np.asarray(score, dtype=np.float64))


def rmle_recursion(y, model0: HmmModel, eps: float):
    """Reference recursion built from the single-step functions.

    Per observation: score at the current predictor, then sensitivity and
    predictor updates, then the parameter step. Returns the final model
    and the accumulated log-likelihood.
    """
    model = model0
    pi = np.full(model.X, 1.0 / model.X)
    w = np.zeros((model.X, model.n_params))
    ll = 0.0
    for k, yk in enumerate(np.asarray(y, dtype=np.float64)):
        s = incremental_score(pi, w, yk, model)
        w = sensitivity_step(w, pi, yk, model)
        pi, inc = predictor_step(pi, yk, model, k)
        ll += inc
        model = rmle_step(model, s, eps)
    return model, ll


def rmle_run(y, model0: HmmModel, eps: float = 1e-3):
    """Same recursion as ``rmle_recursion`` through the simulation kernel."""
    psi, sigma, ll = kernels.rmle_gauss_exp(np.ascontiguousarray(y, dtype=np.float64), model0.psi.copy(),
                                            model0.sigma.copy(), model0.means, float(eps),
                                            float(model0.sigma_lo), float(model0.sigma_hi))
    return replace(model0, psi=psi, sigma=sigma), ll


def log_likelihood(y, model: HmmModel) -> float:
    """Log-likelihood of y starting from the uniform predictor."""
    return float(kernels.hmm_loglik(np.ascontiguousarray(y, dtype=np.float64), model.P, model.means, model.sigma))


def simulate_hmm(model: HmmModel, n: int, rng=None, pi0=None):
    rng = as_stream(rng)
    X = model.X
    pi0 = np.full(X, 1.0 / X) if pi0 is None else as_pmf(pi0)
    xs = simulate_chain(model.P, pi0, n, rng.child("states"))
    v = rng.child("noise").generator.standard_normal(n)
    return xs, model.means[xs] + model.sigma[xs] * v


# LMS tracking ---------------------------------------------------------------------

def lms_step(theta, phi, y: float, mu: float) -> np.ndarray:
    if not mu > 0:
        raise ValueError("step size must be positive")
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    return theta + mu * phi * (y - phi @ theta)


@dataclass(frozen=True)
class SlowChainModel:
    """Parameter process jumping among the rows of ``values`` with kernel I + eps Q."""

    Q: np.ndarray
    eps: float
    values: np.ndarray  # (S, d)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        S = Q.shape[0]
        if Q.shape != (S, S) or values.ndim != 2 or values.shape[0] != S:
            raise DimensionError("Q must be S x S and values must have S rows")
        off = Q - np.diag(np.diag(Q))
        if np.any(off < 0) or np.any(np.abs(Q.sum(axis=1)) > 1e-12):
            raise ValueError("Q must be a generator (nonnegative off-diagonals, zero row sums)")
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")
        K = np.eye(S) + self.eps * Q
        if np.any(K < 0) or np.any(K > 1):
            raise ValueError("I + eps Q is not a transition matrix")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "values", values)

    @property
    def kernel(self) -> np.ndarray:
        return np.eye(self.Q.shape[0]) + self.eps * self.Q


def sphere_regressors(n: int, d: int, rng) -> np.ndarray:
    """i.i.d. vectors uniform on the sphere of radius sqrt(d), so E[phi phi'] = I."""
    g = as_stream(rng).generator.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True) * math.sqrt(d)


def slow_chain_track(model: SlowChainModel, mu: float, n_steps: int, rng=None, noise_sd: float = 1.0,
                     burn_in: int | None = None, x0: int = 0) -> dict:
    """Simulate the jumping parameter and track it with LMS.

    Returns the parameter path index, the squared error trajectory and the
    time-averaged squared error after ``burn_in`` steps.
    """
    if not mu > 0:
        raise ValueError("step size must be positive")
    rng = as_stream(rng)
    S, d = model.values.shape
    pi0 = np.zeros(S)
    pi0[x0] = 1.0
    states = simulate_chain(model.kernel, pi0, n_steps, rng.child("chain"))
    truth = np.ascontiguousarray(model.values[states])
    phi = sphere_regressors(n_steps, d, rng.child("phi"))
    y = np.einsum("nd,nd->n", phi, truth) + noise_sd * rng.child("noise").generator.standard_normal(n_steps)
    theta, err = kernels.lms_run(phi, y, truth, float(mu), model.values[x0].copy())
    burn = n_steps // 10 if burn_in is None else burn_in
    return {"states": states, "theta": theta, "sq_error": err, "mse": float(err[burn:].mean())}


def slow_chain_for_step(Q, values, mu: float, kappa: float = 1.0) -> SlowChainModel:
    """Slow chain with eps = kappa mu^2."""
    return SlowChainModel(Q, kappa * mu * mu, values)


def ode_decay_rate(mu: float, d: int, n_steps: int, replications: int, rng=None) -> float:
    """Fitted decay rate, in ODE time t = mu n, of the mean LMS error under a
    frozen parameter with no noise; the limit ODE predicts rate 1 when
    E[phi phi'] = I."""
    rng = as_stream(rng)
    e0 = np.ones(d) / math.sqrt(d)
    mean_err = np.zeros((n_steps, d))
    for r in range(replications):
        phi = sphere_regressors(n_steps, d, rng.child("rep", r))
        # the target is 0, so theta itself is the error
        theta = e0.copy()
        traj = np.empty((n_steps, d))
        for k in range(n_steps):
            theta = theta - mu * phi[k] * (phi[k] @ theta)
            traj[k] = theta
        mean_err += traj
    mean_err /= replications
    t = mu * np.arange(1, n_steps + 1)
    slope = np.polyfit(t, np.log(np.linalg.norm(mean_err, axis=1)), 1)[0]
    return float(-slope)
