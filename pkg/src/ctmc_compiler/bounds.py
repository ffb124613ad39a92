"""Analytic upper bounds on the simulation error of balanced schemes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .markov import WeightSchedule
from .quantum import operator_norm


class PoleError(ValueError):
    """The bound's denominator is not positive, so the bound is vacuous."""


def _p_factor(Q: int, w, p) -> float:
    """``Q^((p-1)/p) * ||w||_p``; equals 1 for ``p = 1`` or uniform ``w``."""
    w = np.asarray(w, dtype=float)
    if p == 1:
        return float(np.sum(np.abs(w)))
    if p == 2:
        return float(np.sqrt(Q) * np.linalg.norm(w))
    if p in (np.inf, "inf"):
        return float(Q * np.max(np.abs(w)))
    raise ValueError(f"unsupported Schatten index {p!r}")


@dataclass(frozen=True)
class BoundInputs:
    Q: int
    T: float
    lam: float
    p: float
    H_norm: float  # max_i ||H_i||
    spread_norm: float  # max_i ||H_i - H||
    w_factor: float  # Q^((p-1)/p) ||w||_p
    w_sup_product: float | None = None  # sup_t w_1 w_2, two nodes only
    delta_norm: float | None = None  # ||H_1 - H_2||, two nodes only

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if min(self.H_norm, self.spread_norm, self.w_factor) < 0:
            raise ValueError("norms must be nonnegative")

    @classmethod
    def from_problem(cls, hamiltonians, schedule: WeightSchedule, T: float, lam: float, p=1,
                     grid_points: int = 10_000) -> "BoundInputs":
        """Collect every norm the bounds need.

        Time-dependent schedules use the supremum of each weight-dependent
        factor over a grid of ``[0, T]`` with endpoints.
        """
        Hs = [np.asarray(H, dtype=complex) for H in hamiltonians]
        Hstack = np.stack(Hs)
        Q = len(Hs)
        if schedule.kind == "constant":
            W = schedule.value(np.array([0.0]))
            W_spread = W
        else:
            W = schedule.value(np.linspace(0.0, T, grid_points + 1))
            W_spread = schedule.value(np.linspace(0.0, T, 201))
        spread = 0.0
        for w in W_spread:
            H = np.tensordot(w, Hstack, axes=1)
            spread = max(spread, max(operator_norm(Hi - H) for Hi in Hs))
        w_factor = max(_p_factor(Q, w, p) for w in W)
        sup_prod = delta = None
        if Q == 2:
            sup_prod = float(np.max(W[:, 0] * W[:, 1]))
            delta = operator_norm(Hs[0] - Hs[1])
        return cls(Q, float(T), float(lam), p, max(operator_norm(H) for H in Hs), spread,
                   w_factor, sup_prod, delta)


def bound_two_node(w_sup_product: float, deltaH_norm: float, T: float, lam: float) -> float:
    """``4 T / lam * sup(w_1 w_2) * ||H_1 - H_2||^2``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    return 4 * T / lam * w_sup_product * deltaH_norm**2


def bound_balanced_qnode(C: float, T: float, lam: float) -> float:
    """``8 C^2 T / (lam - 2C)``, independent of the number of terms."""
    if lam <= 2 * C:
        raise PoleError(f"lam={lam} must exceed 2C={2 * C}")
    return 8 * C**2 * T / (lam - 2 * C)


def bound_general_p(inputs: BoundInputs) -> float:
    """General Schatten-p bound for a balanced scheme with ``Q`` terms.

    ``4 f ||H_i - H|| ||H|| T / (lam - 2 f ||H||)`` with ``f = Q^((p-1)/p) ||w||_p``.
    """
    f = inputs.w_factor
    den = inputs.lam - 2 * f * inputs.H_norm
    if den <= 0:
        raise PoleError(f"lam={inputs.lam} must exceed {2 * f * inputs.H_norm}")
    return 4 * f * inputs.spread_norm * inputs.H_norm * inputs.T / den


def bound_imperfect(C: float, T: float, lam: float, epsilon1: float) -> float:
    """Perfect-gate bound plus ``lam T epsilon1`` for per-segment gate errors."""
    return bound_balanced_qnode(C, T, lam) + lam * T * epsilon1
