"""Numerical tolerances shared by every module.

All thresholds live here so acceptance runs use one bit-stable set of values.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12  # elementwise, relative to max(1, max|entry|)
    unitary: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-10
    weight_sum: float = 1e-12
    weight_derivative_sum: float = 1e-10
    rate_negativity: float = 1e-10
    row_sum: float = 1e-10
    null_gap: float = 1e-8
    pure_rank: float = 1e-8
    quadrature: float = 1e-10
    ode: float = 1e-9
    ode_max_doublings: int = 20
    block_psd: float = 1e-9
    bound_slack: float = 1e-7  # measured error may exceed an analytic bound by at most this
    max_qubits: int = 10


TOL = Tolerances()
