"""Plain-text formats for matrices, MDP/CMDP instances and observation files.

Matrix block::

    rows cols
    a11 a12 ...
    ...

MDP file: a header line ``X U`` followed by U transition matrix blocks
(X x X) and one cost matrix block (X x U). A CMDP file continues with a
line holding L, then L constraint matrix blocks (X x U) and one level
block (1 x L). Text after ``#`` is ignored.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DimensionError


def _tokens(text: str) -> Iterator[str]:
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        yield from line.split()


class _Reader:
    def __init__(self, text: str):
        self._it = _tokens(text)

    def int(self) -> int:
        tok = self._next()
        try:
            return int(tok)
        except ValueError as exc:
            raise ValueError(f"expected integer, got {tok!r}") from exc

    def matrix(self) -> np.ndarray:
        r, c = self.int(), self.int()
        vals = [float(self._next()) for _ in range(r * c)]
        return np.array(vals, dtype=np.float64).reshape(r, c)

    def _next(self) -> str:
        try:
            return next(self._it)
        except StopIteration:
            raise ValueError("unexpected end of input") from None

    def done(self) -> bool:
        return next(self._it, None) is None


def format_matrix(A) -> str:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in A]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rd = _Reader(text)
    A = rd.matrix()
    if not rd.done():
        raise ValueError("trailing data after matrix")
    return A


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, A) -> None:
    Path(path).write_text(format_matrix(A))


def _parse_mdp(rd: _Reader):
    X, U = rd.int(), rd.int()
    P = []
    for u in range(U):
        Pu = rd.matrix()
        if Pu.shape != (X, X):
            raise DimensionError(f"transition matrix {u} has shape {Pu.shape}, expected {(X, X)}")
        P.append(Pu)
    c = rd.matrix()
    if c.shape != (X, U):
        raise DimensionError(f"cost matrix has shape {c.shape}, expected {(X, U)}")
    return np.stack(P), c


def parse_mdp(text: str):
    """Return ``(P, c)`` with P of shape (U, X, X)."""
    rd = _Reader(text)
    out = _parse_mdp(rd)
    if not rd.done():
        raise ValueError("trailing data after MDP")
    return out


def parse_cmdp(text: str):
    """Return ``(P, c, betas, levels)``."""
    rd = _Reader(text)
    P, c = _parse_mdp(rd)
    L = rd.int()
    betas = []
    for _ in range(L):
        b = rd.matrix()
        if b.shape != c.shape:
            raise DimensionError(f"constraint matrix has shape {b.shape}, expected {c.shape}")
        betas.append(b)
    levels = rd.matrix().ravel()
    if levels.shape[0] != L:
        raise DimensionError(f"expected {L} levels, got {levels.shape[0]}")
    if not rd.done():
        raise ValueError("trailing data after CMDP")
    return P, c, np.stack(betas), levels


def format_mdp(P, c) -> str:
    P = np.asarray(P)
    U, X, _ = P.shape
    parts = [f"{X} {U}\n"] + [format_matrix(P[u]) for u in range(U)] + [format_matrix(c)]
    return "".join(parts)


def format_cmdp(P, c, betas, levels) -> str:
    betas = np.asarray(betas)
    parts = [format_mdp(P, c), f"{betas.shape[0]}\n"]
    parts += [format_matrix(b) for b in betas]
    parts.append(format_matrix(np.asarray(levels, dtype=np.float64)[None, :]))
    return "".join(parts)


def read_observations(path) -> np.ndarray:
    vals = [float(t) for t in _tokens(Path(path).read_text())]
    return np.array(vals, dtype=np.float64)


def write_observations(path, y) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.ravel(y)))
