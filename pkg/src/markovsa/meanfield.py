"""Finite populations of interacting agents updated one agent at a time and
their deterministic mean-field approximation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels
from .errors import DimensionError, NotStochasticError
from .markov import categorical
from .rng import as_stream

SIMPLEX_TOL = 1e-12


class PopulationKernel:
    """Transition law of one agent: row(i, e, theta) is a pmf over the L agent states."""

    L: int

    def row(self, i: int, e: int, theta) -> np.ndarray:
        raise NotImplementedError

    def matrix(self, e: int, theta) -> np.ndarray:
        return np.stack([self.row(i, e, theta) for i in range(self.L)])


class CallableKernel(PopulationKernel):
    def __init__(self, L: int, fn: Callable[[int, int, np.ndarray], Sequence[float]]):
        self.L = L
        self._fn = fn

    def row(self, i, e, theta):
        return np.asarray(self._fn(i, e, np.asarray(theta, dtype=np.float64)), dtype=np.float64)


@dataclass(frozen=True)
class AffinePopulationKernel(PopulationKernel):
    """P_ij(e, theta) = base[e, i, j] + sum_l theta_l slopes[e, l, i, j].

    Runs on the compiled simulation path. Validity is checked at the
    vertices of the simplex, which suffices because the rows are affine
    in theta.
    """

    base: np.ndarray  # (E, L, L)
    slopes: np.ndarray  # (E, L, L, L)

    def __post_init__(self):
        base = np.ascontiguousarray(self.base, dtype=np.float64)
        slopes = np.ascontiguousarray(self.slopes, dtype=np.float64)
        if base.ndim != 3 or base.shape[1] != base.shape[2]:
            raise DimensionError("base must have shape (E, L, L)")
        E, L, _ = base.shape
        if slopes.shape != (E, L, L, L):
            raise DimensionError(f"slopes must have shape {(E, L, L, L)}")
        for e in range(E):
            for v in range(L):
                K = base[e] + slopes[e, v]
                if np.any(K < -SIMPLEX_TOL) or np.any(np.abs(K.sum(axis=1) - 1.0) > 1e-9):
                    raise NotStochasticError(f"kernel rows invalid at exogenous state {e}, vertex {v}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "slopes", slopes)

    @property
    def L(self) -> int:
        return self.base.shape[1]

    def row(self, i, e, theta):
        return self.base[e, i] + np.asarray(theta, dtype=np.float64) @ self.slopes[e, :, i, :]

    def matrix(self, e, theta):
        return self.base[e] + np.einsum("l,lij->ij", np.asarray(theta, dtype=np.float64), self.slopes[e])


def adoption_kernel(a: float, b: float, c: float) -> AffinePopulationKernel:
    """Two-state adoption model: P_12 = a + b theta(2), P_21 = c."""
    base = np.array([[[1.0 - a, a], [c, 1.0 - c]]])
    slopes = np.zeros((1, 2, 2, 2))
    slopes[0, 1, 0] = [-b, b]
    return AffinePopulationKernel(base, slopes)


def population_step(counts, kernel: PopulationKernel, e: int, rng) -> np.ndarray:
    """Choose an agent uniformly, move it to a state drawn from its kernel row."""
    counts = np.array(counts, dtype=np.int64)
    M = int(counts.sum())
    rng = as_stream(rng)
    u0, u1 = rng.uniforms(2)
    i = categorical(counts / M, u0)
    j = categorical(kernel.row(i, e, counts / M), u1)
    counts[i] -= 1
    counts[j] += 1
    return counts


def simulate_population(counts0, kernel: PopulationKernel, psi, rng=None) -> np.ndarray:
    """Population fractions theta_0..theta_n along the exogenous path psi (length n)."""
    counts = np.ascontiguousarray(counts0, dtype=np.int64)
    if counts.shape != (kernel.L,) or np.any(counts < 0) or counts.sum() < 1:
        raise ValueError("counts must be a nonnegative integer vector with a positive total")
    psi = np.ascontiguousarray(psi, dtype=np.int64)
    rng = as_stream(rng)
    u = rng.child("population").uniforms(len(psi), 2)
    if isinstance(kernel, AffinePopulationKernel):
        return kernels.population_affine(counts, kernel.base, kernel.slopes, psi, u)
    M = int(counts.sum())
    traj = np.empty((len(psi) + 1, kernel.L))
    traj[0] = counts / M
    counts = counts.copy()
    for k, e in enumerate(psi):
        i = categorical(counts / M, u[k, 0])
        j = categorical(kernel.row(i, int(e), counts / M), u[k, 1])
        counts[i] -= 1
        counts[j] += 1
        traj[k + 1] = counts / M
    return traj


def drift_H(theta, kernel: PopulationKernel, e: int) -> np.ndarray:
    """Expected one-step increment times M: sum_i theta_i sum_j (e_j - e_i) P_ij = theta' P - theta."""
    theta = np.asarray(theta, dtype=np.float64)
    return theta @ kernel.matrix(e, theta) - theta


def mean_field_step(theta, kernel: PopulationKernel, e: int, M: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    new = theta + drift_H(theta, kernel, e) / M
    if np.any(new < -SIMPLEX_TOL) or abs(new.sum() - 1.0) > SIMPLEX_TOL:
        raise NotStochasticError("mean-field iterate left the simplex")
    return new


def mean_field_path(theta0, kernel: PopulationKernel, psi, M: int) -> np.ndarray:
    traj = np.empty((len(psi) + 1, kernel.L))
    traj[0] = theta0
    for k, e in enumerate(psi):
        traj[k + 1] = mean_field_step(traj[k], kernel, int(e), M)
    return traj


def deviation_experiment(kernel: PopulationKernel, theta0, Ms: Sequence[int], runs: int, rng=None,
                         psi: Callable[[int], np.ndarray] | None = None,
                         eps_grid: Sequence[float] = (0.01, 0.02, 0.05, 0.1)) -> dict:
    """For each population size M simulate M agent updates ``runs`` times and
    record max_k |mean-field theta_k - theta_k|_inf.

    theta0 * M must be integral so both systems start at the same point.
    ``psi(n)`` supplies the exogenous path (default: all zeros).
    """
    rng = as_stream(rng)
    theta0 = np.asarray(theta0, dtype=np.float64)
    out = {"M": [], "max_deviation": [], "median": [], "tail": {}}
    for M in Ms:
        counts0 = np.rint(theta0 * M).astype(np.int64)
        if counts0.sum() != M or not np.allclose(counts0 / M, theta0, atol=1e-12):
            raise ValueError(f"theta0 * {M} is not an integer count vector")
        path = np.zeros(M, dtype=np.int64) if psi is None else np.asarray(psi(M), dtype=np.int64)
        mf = mean_field_path(counts0 / M, kernel, path, M)
        devs = np.array([np.abs(simulate_population(counts0, kernel, path, rng.child("M", int(M), r)) - mf).max()
                         for r in range(runs)])
        out["M"].append(int(M))
        out["max_deviation"].append(devs.tolist())
        out["median"].append(float(np.median(devs)))
        out["tail"][int(M)] = {float(eps): float(np.mean(devs >= eps)) for eps in eps_grid}
    return out
