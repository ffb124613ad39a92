"""Dense linear algebra on small qubit systems.

Operators are plain complex ``numpy`` arrays. Functions that need a Hermitian
or unitary input validate it and raise :class:`ValueError` otherwise.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import TOL

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliTerm(NamedTuple):
    coefficient: float
    word: str


class NumericalError(ArithmeticError):
    """A computed quantity violated an identity it must satisfy."""


def check_hermitian(H: np.ndarray, name: str = "operator") -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if not np.all(np.isfinite(H)):
        raise ValueError(f"{name} has non-finite entries")
    if np.max(np.abs(H - H.conj().T)) > TOL.hermitian * scale:
        raise ValueError(f"{name} is not Hermitian")
    return H


def check_density_matrix(rho: np.ndarray, name: str = "state") -> np.ndarray:
    rho = check_hermitian(rho, name)
    if abs(np.trace(rho).real - 1.0) > TOL.trace:
        raise ValueError(f"{name} has trace {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -TOL.psd:
        raise ValueError(f"{name} is not positive semidefinite")
    return rho


def is_unitary(U: np.ndarray, atol: float = TOL.unitary) -> bool:
    U = np.asarray(U)
    return schatten_norm(U.conj().T @ U - np.eye(U.shape[0]), np.inf) < atol


def pauli_to_dense(terms: Sequence[PauliTerm | tuple], n: int) -> np.ndarray:
    """Dense matrix of ``sum_k c_k P_k`` for Pauli words of length ``n``."""
    if n < 1 or n > TOL.max_qubits:
        raise ValueError(f"qubit count must be in [1, {TOL.max_qubits}], got {n}")
    H = np.zeros((2**n, 2**n), dtype=complex)
    for coefficient, word in terms:
        word = word.upper()
        if len(word) != n:
            raise ValueError(f"Pauli word {word!r} has length {len(word)}, expected {n}")
        if not np.isfinite(coefficient):
            raise ValueError(f"non-finite coefficient for {word!r}")
        try:
            factors = [PAULI[c] for c in word]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli letter in {word!r}") from exc
        P = factors[0]
        for f in factors[1:]:
            P = np.kron(P, f)
        H += float(coefficient) * P
    return H


def matexp_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(-i H t)`` via the eigendecomposition of ``H``."""
    H = check_hermitian(H, "generator")
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    evals, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * evals * t)) @ V.conj().T


def schatten_norm(M: np.ndarray, p: float = 1) -> float:
    """Schatten ``p``-norm for ``p`` in ``{1, 2, inf}``."""
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False)
    if p == 1:
        return float(np.sum(s))
    if p == 2:
        return float(np.sqrt(np.sum(s**2)))
    if p in (np.inf, "inf"):
        return float(s[0]) if s.size else 0.0
    raise ValueError(f"unsupported Schatten index {p!r}")


def operator_norm(M: np.ndarray) -> float:
    return schatten_norm(M, np.inf)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    evals, V = np.linalg.eigh(rho)
    return (V * np.sqrt(np.clip(evals, 0.0, None))) @ V.conj().T


def _pure_vector(rho: np.ndarray) -> np.ndarray | None:
    evals, V = np.linalg.eigh(rho)
    if evals[-1] > 1.0 - TOL.pure_rank:
        return V[:, -1]
    return None


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    If either argument is numerically rank one the pure-state shortcut
    ``<psi|sigma|psi>`` is used.
    """
    psi = _pure_vector(rho)
    if psi is not None:
        return float(np.real(psi.conj() @ sigma @ psi))
    psi = _pure_vector(sigma)
    if psi is not None:
        return float(np.real(psi.conj() @ rho @ psi))
    s = _psd_sqrt(rho)
    evals = np.linalg.eigvalsh(s @ sigma @ s)
    return float(np.sum(np.sqrt(np.clip(evals, 0.0, None))) ** 2)


def state_metrics(rho: np.ndarray, sigma: np.ndarray) -> tuple[float, float]:
    """Trace distance and fidelity of two density matrices.

    When one argument is pure, the Fuchs-van de Graaf inequality
    ``1 - F <= T`` is verified and :class:`NumericalError` raised on failure.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    td = trace_distance(rho, sigma)
    F = fidelity(rho, sigma)
    if _pure_vector(rho) is not None or _pure_vector(sigma) is not None:
        if 1.0 - F > td + TOL.trace:
            raise NumericalError(f"Fuchs-van de Graaf violated: 1-F={1 - F}, T={td}")
    return td, F


def _ordered_product(Us: np.ndarray) -> np.ndarray:
    """``Us[-1] @ ... @ Us[0]`` by pairwise reduction."""
    Us = np.asarray(Us)
    d = Us.shape[-1]
    if Us.shape[0] == 0:
        return np.eye(d, dtype=complex)
    while Us.shape[0] > 1:
        if Us.shape[0] % 2:
            Us = np.concatenate([Us, np.eye(d, dtype=complex)[None]], axis=0)
        Us = Us[1::2] @ Us[0::2]
    return Us[0]


def time_ordered_unitary(
    H_of_t: Callable[[float], np.ndarray], t0: float, t1: float, steps: int
) -> np.ndarray:
    """Midpoint-rule approximation of the time-ordered exponential.

    Returns ``prod_k exp(-i H(t_k + dt/2) dt)`` with later factors on the left.
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = (t1 - t0) / steps
    mids = t0 + dt * (np.arange(steps) + 0.5)
    Hs = np.stack([check_hermitian(H_of_t(t), f"H({t})") for t in mids])
    evals, V = np.linalg.eigh(Hs)
    Us = (V * np.exp(-1j * evals * dt)[:, None, :]) @ np.swapaxes(V.conj(), -1, -2)
    return _ordered_product(Us)


def ket(labels: str) -> np.ndarray:
    """Product state vector from single-qubit labels in ``{0,1,+,-,r,l}``."""
    single = {
        "0": np.array([1, 0], dtype=complex),
        "1": np.array([0, 1], dtype=complex),
        "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
        "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
        "r": np.array([1, 1j], dtype=complex) / np.sqrt(2),
        "l": np.array([1, -1j], dtype=complex) / np.sqrt(2),
    }
    psi = np.ones(1, dtype=complex)
    for c in labels:
        if c not in single:
            raise ValueError(f"unknown qubit label {c!r}")
        psi = np.kron(psi, single[c])
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def haar_states(rng: np.random.Generator, n_states: int, dim: int) -> np.ndarray:
    """Haar-random pure state vectors, shape ``(n_states, dim)``."""
    z = rng.standard_normal((n_states, dim)) + 1j * rng.standard_normal((n_states, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
