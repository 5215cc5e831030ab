"""Time the compiled kernels against the pure-Python fallback.

Both backends receive identical pre-drawn uniforms, so every pair of
calls also checks that the outputs agree.

    python benchmarks/bench_backends.py [--scale 0.1]
"""
import argparse
import time

import numpy as np

from markovsa import _kernels_py
from markovsa.discrete_opt import poisson_bins
from markovsa.markov import cumulative_rows
from markovsa.meanfield import adoption_kernel

try:
    from markovsa import _kernels
except ImportError:
    _kernels = None


def cases(n, rng):
    P = np.array([[0.9, 0.1], [0.2, 0.8]])
    Ps = np.stack([P, P[::-1]])
    theta = np.array([[0.2, 0.8], [0.6, 0.4]])
    cost = rng.random((2, 2))
    lo, hi = poisson_bins(1.0, 10)
    k = adoption_kernel(0.05, 0.4, 0.1)
    xs, us = _kernels_py.sample_mdp(cumulative_rows(Ps), cumulative_rows(theta), 0, rng.random(n - 1), rng.random(n))
    inc = rng.normal(size=(2, 2, 2))
    cps = np.array([n], dtype=np.int64)
    phi = rng.normal(size=(n, 2))
    return {
        "sample_chain": (cumulative_rows(P), 0, rng.random(n)),
        "score_accumulate": (xs, us, cost, inc, 1.0),
        "qlearn": (cumulative_rows(Ps), cost, 0.8, 1.0, 0, 1, 0.1, rng.random((n, 3)), np.zeros((4, 0)), np.zeros(0)),
        "as_run": (lo, hi, n, True, 0.01, 1.0, 0.2, rng.random((n, 2)), cps),
        "population_affine": (np.array([800, 200], dtype=np.int64), k.base, k.slopes, np.zeros(n, dtype=np.int64),
                              rng.random((n, 2))),
        "lms_run": (phi, phi @ [1.0, -1.0], np.tile([1.0, -1.0], (n, 1)), 0.01, np.zeros(2)),
        "hmm_loglik": (rng.normal(1.5, 1.0, n), P, np.array([1.0, 2.0]), np.array([1.0, 1.0])),
    }


def timed(fn, args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-13)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies the 200000-step default length")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    n = max(10, int(200_000 * args.scale))
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return
    print(f"{'kernel':<20}{'python s':>12}{'compiled s':>12}{'speedup':>10}  equal")
    for name, call in cases(n, np.random.default_rng(args.seed)).items():
        tp, op = timed(getattr(_kernels_py, name), call)
        tc, oc = timed(getattr(_kernels, name), call)
        print(f"{name:<20}{tp:>12.3f}{tc:>12.4f}{tp / max(tc, 1e-9):>10.0f}  {same(op, oc)}")


if __name__ == "__main__":
    main()
