"""qDRIFT and first-order Trotter compilers for comparison.

Both emit :class:`~ctmc_compiler.compiler.GateSequence` objects so they run
through the same channel and cost machinery as the Markov-chain compiler.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compiler import GateSequence, Propagator, make_sequence
from .quantum import operator_norm

BASELINE_KINDS = ("qdrift", "trotter1-det", "trotter1-random")


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    N: int
    M: int = 1000  # Monte-Carlo repetitions for randomized kinds

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.M < 1:
            raise ValueError("M must be >= 1")

    @property
    def randomized(self) -> bool:
        return self.kind != "trotter1-det"


def qdrift_probabilities(hamiltonians, weights=None) -> tuple[np.ndarray, float]:
    """Sampling distribution ``h_j / c`` with ``h_j = w_j ||H_j||``."""
    w = np.ones(len(hamiltonians)) if weights is None else np.asarray(weights, dtype=float)
    h = w * np.array([operator_norm(H) for H in hamiltonians])
    if np.any(h == 0):
        raise ValueError("qDRIFT needs every term to have nonzero norm")
    c = float(h.sum())
    return h / c, c


def qdrift_sequence(hamiltonians, T: float, N: int, rng: np.random.Generator, weights=None,
                    propagator: Propagator | None = None) -> GateSequence:
    """``N`` factors ``exp(-i H_j c T / (N h_j))`` with ``j ~ h_j / c``.

    Simulates ``sum_j H_j`` for time ``T``; each factor's expected generator
    is ``(T/N) sum_j H_j``. With ``weights`` the terms are ``w_j H_j`` and the
    dwell is reported as time under ``H_j``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    w = np.ones(len(hamiltonians)) if weights is None else np.asarray(weights, dtype=float)
    probs, c = qdrift_probabilities(hamiltonians, w)
    prop = propagator or Propagator(hamiltonians)
    nodes = rng.choice(len(probs), size=N, p=probs)
    h = probs * c
    dwells = w[nodes] * c * T / (N * h[nodes])
    return make_sequence(nodes, dwells, prop, T)


def trotter1_sequence(hamiltonians, w, T: float, N: int, order: str = "fixed",
                      rng: np.random.Generator | None = None,
                      propagator: Propagator | None = None) -> GateSequence:
    """``N`` repetitions of ``prod_i exp(-i w_i H_i T/N)``.

    ``order="random-permutation"`` draws a fresh factor order per repetition.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    w = np.asarray(w, dtype=float)
    Q = len(w)
    prop = propagator or Propagator(hamiltonians)
    if order == "fixed":
        nodes = np.tile(np.arange(Q), N)
    elif order == "random-permutation":
        if rng is None:
            raise ValueError("randomized Trotter needs an rng")
        nodes = np.concatenate([rng.permutation(Q) for _ in range(N)])
    else:
        raise ValueError(f"unknown order {order!r}")
    dwells = w[nodes] * T / N
    return make_sequence(nodes, dwells, prop, T)
