"""Turn chain realizations into gate sequences, and the cost/rate formulas around them."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .markov import Realization
from .quantum import _ordered_product, check_hermitian, operator_norm


class ConfigurationError(ValueError):
    pass


class Propagator:
    """Cached eigendecompositions of ``H_0..H_{Q-1}`` for fast ``exp(-i H_k tau)``."""

    def __init__(self, hamiltonians: Sequence[np.ndarray]):
        Hs = [check_hermitian(H, f"H_{k}") for k, H in enumerate(hamiltonians)]
        if not Hs:
            raise ValueError("need at least one Hamiltonian")
        dims = {H.shape for H in Hs}
        if len(dims) != 1:
            raise ValueError(f"Hamiltonians have mismatched dimensions {sorted(dims)}")
        self.hamiltonians = np.stack(Hs)
        self.evals, self.vecs = np.linalg.eigh(self.hamiltonians)
        self.vecs_h = np.swapaxes(self.vecs.conj(), -1, -2)

    @property
    def dim(self) -> int:
        return self.hamiltonians.shape[-1]

    @property
    def Q(self) -> int:
        return self.hamiltonians.shape[0]

    def unitaries(self, nodes, taus) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=int)
        taus = np.asarray(taus, dtype=float)
        phases = np.exp(-1j * self.evals[nodes] * taus[:, None])
        return (self.vecs[nodes] * phases[:, None, :]) @ self.vecs_h[nodes]


@dataclass(frozen=True, eq=False)
class GateSequence:
    """Ordered unitaries ``exp(-i H_node dwell)``; index 0 acts first."""

    nodes: np.ndarray
    dwells: np.ndarray
    unitaries: np.ndarray
    total_time: float

    @property
    def segments(self):
        return list(zip(self.nodes.tolist(), self.dwells.tolist(), list(self.unitaries)))

    def __len__(self):
        return len(self.nodes)

    def product(self) -> np.ndarray:
        return _ordered_product(self.unitaries)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        U = self.product()
        return U @ rho @ U.conj().T

    def to_json(self) -> str:
        circuit = [[int(k), float(tau)] for k, tau in zip(self.nodes, self.dwells)]
        return json.dumps({"total_time": self.total_time, "circuit": circuit})

    def summary(self) -> str:
        counts = np.bincount(self.nodes, minlength=int(self.nodes.max(initial=0)) + 1)
        lines = [f"segments: {len(self)}", f"total time: {self.total_time:.6g}"]
        for k, c in enumerate(counts):
            lines.append(f"  node {k}: {c} segments, time {self.dwells[self.nodes == k].sum():.6g}")
        return "\n".join(lines)


def make_sequence(nodes, dwells, propagator: Propagator, total_time: float) -> GateSequence:
    nodes = np.asarray(nodes, dtype=int)
    dwells = np.asarray(dwells, dtype=float)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= propagator.Q):
        raise ValueError("node index out of range")
    return GateSequence(nodes, dwells, propagator.unitaries(nodes, dwells), float(total_time))


def compile_sequence(realization: Realization, hamiltonians) -> GateSequence:
    """One unitary per realization segment, order preserved.

    ``hamiltonians`` is a list of matrices or a prepared :class:`Propagator`.
    """
    prop = hamiltonians if isinstance(hamiltonians, Propagator) else Propagator(hamiltonians)
    return make_sequence(realization.nodes, realization.dwells, prop, realization.total)


@dataclass(frozen=True)
class CostModel:
    """Gate cost ``alpha + beta*C*tau`` per segment, times ``ln(1/epsilon1)`` if imperfect."""

    alpha: float = 1.0
    beta: float = 1.0
    C: float = 1.0
    epsilon1: float | None = None

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.epsilon1 is not None and not 0 < self.epsilon1 < 1:
            raise ValueError("epsilon1 must lie in (0, 1)")

    @property
    def log_factor(self) -> float:
        return 1.0 if self.epsilon1 is None else math.log(1.0 / self.epsilon1)


def lambda_for_target_error(C: float, T: float, epsilon0: float, model: str = "perfect"):
    """Total rate meeting error ``epsilon0``; returns ``(lam, epsilon1)``.

    perfect: ``lam = 4 C^2 T / eps0 + 2C`` and ``epsilon1`` is None.
    imperfect: ``lam = 4 C^2 T / eps0 * (1 + 1/ln(8 C^2 T^2 / eps0)) + 2C``, and
    ``epsilon1`` saturates ``8 C^2 T / (lam - 2C) + lam T eps1 = 2 eps0``.
    """
    if min(C, T, epsilon0) <= 0:
        raise ConfigurationError("C, T and epsilon0 must be positive")
    base = 4 * C**2 * T / epsilon0
    if model == "perfect":
        return base + 2 * C, None
    if model != "imperfect":
        raise ConfigurationError(f"unknown cost model {model!r}")
    ratio = 8 * C**2 * T**2 / epsilon0
    if ratio <= math.e:
        raise ConfigurationError("8 C^2 T^2 / epsilon0 must exceed e for the imperfect-gate rate")
    lam = base * (1 + 1 / math.log(ratio)) + 2 * C
    eps1 = (2 * epsilon0 - 8 * C**2 * T / (lam - 2 * C)) / (lam * T)
    return lam, eps1


def gate_cost(seq: GateSequence | Realization, model: CostModel) -> float:
    """Realized cost ``sum_k (alpha + beta C dwell_k)``, scaled by ``ln(1/eps1)``."""
    dwells = seq.dwells
    return float(np.sum(model.alpha + model.beta * model.C * dwells)) * model.log_factor


def gate_cost_bound(T: float, lam: float, model: CostModel) -> float:
    """Expected-cost bound ``T (alpha lam + beta C)``, scaled by ``ln(1/eps1)``."""
    return T * (model.alpha * lam + model.beta * model.C) * model.log_factor


def expected_gate_cost(weights: Sequence[float], lam: float, T: float, model: CostModel) -> float:
    """``sum_i w_i (alpha (lam - a_i) + beta C) T`` for constant weights, ``a_i = lam w_i``."""
    w = np.asarray(weights, dtype=float)
    return float(np.sum(w * (model.alpha * (lam - lam * w) + model.beta * model.C)) * T) * model.log_factor


def renormalize_decomposition(hamiltonians, drop_zero: bool = False):
    """Rewrite ``sum_i H_i`` as ``sum_i w_i H~_i`` with every ``||H~_i|| = c``.

    Returns ``(weights, H_tilde, c)`` where ``c = sum_j ||H_j||_inf``. Zero-norm
    terms raise unless ``drop_zero`` is set.
    """
    Hs = [check_hermitian(H) for H in hamiltonians]
    norms = np.array([operator_norm(H) for H in Hs])
    if np.any(norms == 0):
        if not drop_zero:
            raise ValueError("zero-norm term in decomposition")
        Hs = [H for H, h in zip(Hs, norms) if h > 0]
        norms = norms[norms > 0]
        if not Hs:
            raise ValueError("all terms have zero norm")
    c = float(norms.sum())
    weights = norms / c
    H_tilde = [H * (c / h) for H, h in zip(Hs, norms)]
    return weights, H_tilde, c
