"""Exact, ODE-averaged and Monte-Carlo channels, and distances between them.

A *channel* here is any callable mapping a stack of matrices ``(B, d, d)`` to
a stack of the same shape.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .compiler import GateSequence, Propagator, compile_sequence
from .config import TOL
from .markov import BalancedScheme, RateMatrix, WeightSchedule, sample_realization
from .quantum import check_density_matrix, haar_states, schatten_norm, time_ordered_unitary
from .rng import CHAIN, stream

Channel = Callable[[np.ndarray], np.ndarray]


class ConvergenceError(RuntimeError):
    """Step halving did not reach the requested tolerance."""


def target_hamiltonian(schedule: WeightSchedule, hamiltonians) -> Callable[[float], np.ndarray]:
    Hs = np.stack([np.asarray(H, dtype=complex) for H in hamiltonians])

    def H_of_t(t):
        return np.tensordot(schedule.value(t), Hs, axes=1)

    return H_of_t


def exact_unitary(H_of_t, T: float, steps: int) -> np.ndarray:
    return time_ordered_unitary(H_of_t, 0.0, T, steps)


def exact_channel(H_of_t, T: float, rho0: np.ndarray, steps: int) -> np.ndarray:
    """``U rho0 U^dag`` with ``U`` the time-ordered evolution over ``[0, T]``."""
    rho0 = check_density_matrix(rho0, "rho0")
    U = exact_unitary(H_of_t, T, steps)
    return U @ rho0 @ U.conj().T


def unitary_channel(U: np.ndarray) -> Channel:
    Ud = U.conj().T
    return lambda X: U @ X @ Ud


def transfer_channel(basis_outputs: np.ndarray) -> Channel:
    """Linear channel from its action on the matrix units ``|k><l|``.

    ``basis_outputs[k*d + l]`` is the image of ``|k><l|``.
    """
    d = basis_outputs.shape[-1]
    M = basis_outputs.reshape(d * d, d * d)

    def apply(X):
        X = np.asarray(X)
        return (X.reshape(X.shape[:-2] + (d * d,)) @ M).reshape(X.shape)

    return apply


def matrix_units(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex).reshape(d * d, d, d)


def depolarize(X: np.ndarray, eps: float) -> np.ndarray:
    d = X.shape[-1]
    tr = np.trace(X, axis1=-2, axis2=-1)[..., None, None]
    return (1 - eps) * X + eps * tr * np.eye(d) / d


@dataclass
class BlockState:
    """Sub-normalized node marginals ``rho_i``; their sum is the average state."""

    blocks: np.ndarray  # (Q, d, d)
    time: float

    @property
    def reduced(self) -> np.ndarray:
        return self.blocks.sum(axis=0)

    @property
    def traces(self) -> np.ndarray:
        return np.trace(self.blocks, axis1=-2, axis2=-1).real

    def bias_blocks(self, w) -> np.ndarray:
        """``rho_i - w_i rho``: the node blocks of the deviation from ``rho (x) W``."""
        return self.blocks - np.asarray(w)[:, None, None] * self.reduced

    def check(self, atol: float = TOL.block_psd):
        for i, b in enumerate(self.blocks):
            if np.max(np.abs(b - b.conj().T)) > atol:
                raise ValueError(f"block {i} is not Hermitian")
            if np.linalg.eigvalsh(b)[0] < -atol:
                raise ValueError(f"block {i} has a negative eigenvalue")
        if abs(self.traces.sum() - 1) > atol:
            raise ValueError("block traces do not sum to 1")


@dataclass
class BlockTrajectory:
    times: np.ndarray
    blocks: np.ndarray  # (K+1, Q, *batch, d, d)
    steps: int
    error_estimate: float
    epsilon1: float | None = None

    def state(self, k: int) -> BlockState:
        return BlockState(self.blocks[k], float(self.times[k]))

    @property
    def final(self) -> BlockState:
        return self.state(-1)

    def reduced(self) -> np.ndarray:
        return self.blocks.sum(axis=1)

    def traces(self) -> np.ndarray:
        return np.trace(self.blocks, axis1=-2, axis2=-1).real

    def output(self) -> np.ndarray:
        """Averaged-channel output at ``T`` (with the final kick, if any)."""
        rho = self.blocks[-1].sum(axis=0)
        if self.epsilon1:
            rho = depolarize(rho, self.epsilon1)
        return rho


def _generator_table(rates, times: np.ndarray) -> np.ndarray:
    """``A(t)`` for every ``t`` in ``times``, shape ``(len(times), Q, Q)``."""
    if isinstance(rates, BalancedScheme):
        a = np.clip(rates._rates(times), 0.0, None)
        Q = rates.Q
        A = np.repeat(a[:, None, :], Q, axis=1)
        idx = np.arange(Q)
        A[:, idx, idx] = 0.0
        A[:, idx, idx] = -A.sum(axis=2)
        return A
    return np.stack([rates(t) for t in times])


def _max_exit_rate(rates, T: float) -> float:
    grid = np.linspace(0.0, T, 201)
    A = _generator_table(rates, grid)
    return float(np.max(-np.diagonal(A, axis1=1, axis2=2)))


def _rk4(H, A_table, y0, h, n, every, eps):
    """Fixed-step RK4 on the block ODE; keeps every ``every``-th state."""
    Hb = H.reshape(H.shape[:1] + (1,) * (y0.ndim - 3) + H.shape[1:])
    Q = H.shape[0]
    idx = np.arange(Q)

    def rhs(y, A):
        out = -1j * (Hb @ y - y @ Hb)
        off = A.copy()
        off[idx, idx] = 0.0
        src = depolarize(y, eps) if eps else y
        out += np.tensordot(off.T, src, axes=1)
        out -= off.sum(axis=1).reshape((Q,) + (1,) * (y.ndim - 1)) * y
        return out

    snaps = [y0]
    y = y0
    for k in range(n):
        A0, Am, A1 = A_table[2 * k], A_table[2 * k + 1], A_table[2 * k + 2]
        k1 = rhs(y, A0)
        k2 = rhs(y + 0.5 * h * k1, Am)
        k3 = rhs(y + 0.5 * h * k2, Am)
        k4 = rhs(y + h * k3, A1)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % every == 0:
            snaps.append(y)
    return np.stack(snaps)


def averaged_channel_ode(
    rates: BalancedScheme | RateMatrix,
    hamiltonians,
    T: float,
    rho0: np.ndarray,
    tol: float = TOL.ode,
    checkpoints: int = 100,
    p0: Sequence[float] | None = None,
    epsilon1: float | None = None,
    max_doublings: int = TOL.ode_max_doublings,
) -> BlockTrajectory:
    """Integrate the node marginals ``rho_i`` of the chain-controlled system.

    ``d rho_i/dt = -i[H_i, rho_i] + sum_{j!=i} A_ji rho_j - sum_{j!=i} A_ij rho_i``
    from ``rho_i(0) = p0_i rho0`` (``p0 = w(0)`` for a balanced scheme). RK4
    steps are halved until successive solutions differ by less than ``tol``
    (summed trace norm over blocks, max over checkpoints).

    ``rho0`` may carry leading batch axes; it is then not required to be a
    state, which lets callers build the channel's transfer matrix. With
    ``epsilon1`` every segment ends with a depolarizing kick of that strength.
    """
    Hs = np.stack([np.asarray(H, dtype=complex) for H in hamiltonians])
    Q = Hs.shape[0]
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 2:
        check_density_matrix(rho0, "rho0")
    if p0 is None:
        if not isinstance(rates, BalancedScheme):
            raise ValueError("p0 is required for a general rate matrix")
        p0 = rates.schedule.value(0.0)
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (Q,):
        raise ValueError("initial occupation does not match the number of Hamiltonians")
    y0 = p0.reshape((Q,) + (1,) * rho0.ndim) * rho0[None]

    hnorm = max(schatten_norm(H, np.inf) for H in Hs)
    stiff = max(_max_exit_rate(rates, T), hnorm, 1e-12)
    per_chunk = max(1, math.ceil(T * stiff / 0.1 / checkpoints))
    times = np.linspace(0.0, T, checkpoints + 1)

    def solve(per):
        n = per * checkpoints
        h = T / n
        A_table = _generator_table(rates, np.linspace(0.0, T, 2 * n + 1))
        return _rk4(Hs, A_table, y0, h, n, per, epsilon1)

    prev = solve(per_chunk)
    for _ in range(max_doublings):
        per_chunk *= 2
        cur = solve(per_chunk)
        diff = cur - prev
        flat = diff.reshape((-1,) + diff.shape[-2:])
        err = np.linalg.svd(flat, compute_uv=False).sum(axis=-1).reshape(diff.shape[:-2])
        err = float(np.max(err.sum(axis=1)))
        if err < tol:
            return BlockTrajectory(times, cur, per_chunk * checkpoints, err, epsilon1)
        prev = cur
    raise ConvergenceError(f"RK4 step halving did not reach tol={tol} (last change {err:.3g})")


def averaged_channel_map(rates, hamiltonians, T, tol=TOL.ode, p0=None, epsilon1=None) -> Channel:
    """The averaged channel as a linear map, built from the block ODE."""
    d = np.asarray(hamiltonians[0]).shape[0]
    traj = averaged_channel_ode(rates, hamiltonians, T, matrix_units(d), tol, 1, p0, epsilon1)
    return transfer_channel(traj.output())


@dataclass
class ChannelEstimate:
    output: np.ndarray
    stderr: float
    realizations: int


def _map_indexed(fn, M: int, threads: int) -> np.ndarray:
    if threads <= 1:
        return np.stack([fn(r) for r in range(M)])
    chunk = math.ceil(M / threads)
    ranges = [range(s, min(s + chunk, M)) for s in range(0, M, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda rg: np.stack([fn(r) for r in rg]), ranges))
    return np.concatenate(parts)


def estimate_from_samples(samples: np.ndarray) -> ChannelEstimate:
    """Mean output; stderr is the trace norm of the entrywise sample std over sqrt(M)."""
    M = samples.shape[0]
    mean = samples.mean(axis=0)
    if M > 1:
        std = np.sqrt(samples.real.var(axis=0, ddof=1) + samples.imag.var(axis=0, ddof=1))
        stderr = schatten_norm(std, 1) / math.sqrt(M)
    else:
        stderr = 0.0
    return ChannelEstimate(mean, stderr, M)


def average_sequences(make_sequence, rho0, M: int, seed: int, domain: int, threads: int = 1,
                      epsilon1: float | None = None) -> ChannelEstimate:
    """Monte-Carlo average of ``seq.apply(rho0)`` over ``M`` seeded sequences.

    ``make_sequence(rng)`` builds one sequence; realization ``r`` always uses
    stream ``(seed, r)`` so the estimate is independent of ``threads``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]

    def one(r):
        seq = make_sequence(stream(seed, r, domain=domain))
        out = seq.apply(rho0)
        if epsilon1:
            # depolarizing commutes with unitary conjugation, so K kicks collapse
            f = (1 - epsilon1) ** len(seq)
            out = f * out + (1 - f) * np.eye(d) / d
        return out

    return estimate_from_samples(_map_indexed(one, M, threads))


def mc_channel(scheme: BalancedScheme, hamiltonians, T: float, rho0: np.ndarray, M: int, seed: int,
               epsilon1: float | None = None, threads: int = 1) -> ChannelEstimate:
    """Average of compiled-sequence conjugations over ``M`` sampled realizations."""
    if M < 1:
        raise ValueError("M must be >= 1")
    prop = Propagator(hamiltonians)
    rho0 = check_density_matrix(rho0, "rho0")

    def make(rng) -> GateSequence:
        return compile_sequence(sample_realization(scheme, T, rng), prop)

    return average_sequences(make, rho0, M, seed, CHAIN, threads, epsilon1)


def bias_norm(exact: np.ndarray, averaged: np.ndarray, p=1) -> float:
    exact = np.asarray(exact)
    averaged = np.asarray(averaged)
    if exact.shape != averaged.shape:
        raise ValueError("dimension mismatch")
    return schatten_norm(exact - averaged, p)


def channel_distance_lb(channel_a: Channel, channel_b: Channel, dim: int, n_samples: int,
                        rng: np.random.Generator, refine_steps: int = 50, return_state: bool = False):
    """Certified lower bound on the induced 1->1 norm of ``channel_a - channel_b``.

    Evaluates ``||A(psi) - B(psi)||_1`` on Haar-random pure states (plus the
    computational basis), then hill-climbs from the best one.
    """

    def score(psis):
        rhos = psis[:, :, None] * psis[:, None, :].conj()
        diff = channel_a(rhos) - channel_b(rhos)
        diff = 0.5 * (diff + np.swapaxes(diff.conj(), -1, -2))
        return np.abs(np.linalg.eigvalsh(diff)).sum(axis=-1)

    candidates = np.concatenate([np.eye(dim, dtype=complex), haar_states(rng, n_samples, dim)])
    values = score(candidates)
    k = int(np.argmax(values))
    best, best_val = candidates[k], float(values[k])
    step = 0.1
    for _ in range(refine_steps):
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        trial = best + step * z / np.linalg.norm(z)
        trial /= np.linalg.norm(trial)
        val = float(score(trial[None])[0])
        if val > best_val:
            best, best_val = trial, val
            step *= 1.5
        else:
            step *= 0.7
    return (best_val, best) if return_state else best_val
