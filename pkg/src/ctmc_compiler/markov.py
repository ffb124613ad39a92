"""Continuous-time Markov chain over Hamiltonian indices.

A :class:`WeightSchedule` fixes the target occupation ``w(t)``; a
:class:`BalancedScheme` adds the total rate ``lam`` and yields the rates
``a_j(t) = w_j'(t) + lam * w_j(t)`` into node ``j`` from any other node.
Realizations are drawn by uniformization at rate ``lam``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec
from scipy.interpolate import CubicSpline

from .config import TOL

KINDS = ("constant", "linear-interpolation", "clamped-adiabatic", "tabulated")


class RateNegativityError(ValueError):
    """Some transition rate is negative: ``lam`` too small for this schedule."""


@dataclass(frozen=True, eq=False)
class WeightSchedule:
    """Probability vector ``w(t)`` with derivatives.

    Use the ``constant``/``linear``/``clamped_adiabatic``/``tabulated``
    constructors; ``params`` holds the serializable description.
    """

    kind: str
    Q: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "tabulated":
            times = np.asarray(self.params["times"], dtype=float)
            values = np.asarray(self.params["values"], dtype=float)
            # CubicSpline is linear in the data, so sum(w) == 1 and sum(w') == 0 carry over.
            object.__setattr__(self, "_spline", CubicSpline(times, values, axis=0))
        self._check()

    # constructors

    @classmethod
    def constant(cls, weights: Sequence[float]) -> "WeightSchedule":
        w = [float(x) for x in weights]
        return cls("constant", len(w), {"weights": w})

    @classmethod
    def linear(cls, start: Sequence[float], end: Sequence[float], T: float) -> "WeightSchedule":
        start = [float(x) for x in start]
        end = [float(x) for x in end]
        if len(start) != len(end):
            raise ValueError("start and end weights differ in length")
        return cls("linear-interpolation", len(start), {"start": start, "end": end, "T": float(T)})

    @classmethod
    def clamped_adiabatic(cls, T: float, delta: float) -> "WeightSchedule":
        if not 0 < delta < 0.5:
            raise ValueError("delta must lie in (0, 1/2)")
        return cls("clamped-adiabatic", 2, {"T": float(T), "delta": float(delta)})

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[Sequence[float]]) -> "WeightSchedule":
        values = [[float(x) for x in row] for row in values]
        return cls("tabulated", len(values[0]), {"times": [float(t) for t in times], "values": values})

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSchedule":
        kind = d["kind"]
        if kind == "constant":
            return cls.constant(d["weights"])
        if kind == "linear-interpolation":
            return cls.linear(d["start"], d["end"], d["T"])
        if kind == "clamped-adiabatic":
            return cls.clamped_adiabatic(d["T"], d["delta"])
        if kind == "tabulated":
            return cls.tabulated(d["times"], d["values"])
        raise ValueError(f"unknown schedule kind {kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    # evaluation; ``t`` may be a scalar or an array, output has a trailing Q axis

    def value(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(p["weights"]), t.shape + (self.Q,)).copy()
        if self.kind == "linear-interpolation":
            s = (t / p["T"])[..., None]
            return (1 - s) * np.asarray(p["start"]) + s * np.asarray(p["end"])
        if self.kind == "clamped-adiabatic":
            d = p["delta"]
            w1 = d + (1 - 2 * d) * (1 - t / p["T"])
            return np.stack([w1, 1 - w1], axis=-1)
        return self._spline(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.zeros(t.shape + (self.Q,))
        if self.kind == "linear-interpolation":
            slope = (np.asarray(p["end"]) - np.asarray(p["start"])) / p["T"]
            return np.broadcast_to(slope, t.shape + (self.Q,)).copy()
        if self.kind == "clamped-adiabatic":
            r = (1 - 2 * p["delta"]) / p["T"]
            return np.broadcast_to(np.array([-r, r]), t.shape + (self.Q,)).copy()
        return self._spline(t, 1)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "tabulated":
            return self._spline(t, 2)
        return np.zeros(t.shape + (self.Q,))

    def _check(self, grid=None):
        if grid is None:
            grid = self.default_grid(self.params.get("T", 1.0))
        w = self.value(grid)
        if w.shape[-1] != self.Q:
            raise ValueError("weight vector length does not match Q")
        if np.any(np.abs(w.sum(axis=-1) - 1) > TOL.weight_sum * 10):
            raise ValueError("weights do not sum to 1")
        if np.any(w < -TOL.weight_sum):
            raise ValueError("negative weight")
        if np.any(np.abs(self.derivative(grid).sum(axis=-1)) > TOL.weight_derivative_sum):
            raise ValueError("weight derivatives do not sum to 0")

    def default_grid(self, T: float, n: int = 1001) -> np.ndarray:
        if self.kind == "tabulated":
            times = self.params["times"]
            grid = np.linspace(times[0], times[-1], n)
            return np.union1d(grid, times)
        return np.linspace(0.0, T, n)


@dataclass(frozen=True, eq=False)
class BalancedScheme:
    """Schedule plus total transition rate ``lam`` on the horizon ``[0, T]``.

    Construction validates ``a_j(t) >= 0`` on a grid and raises
    :class:`RateNegativityError` otherwise.
    """

    schedule: WeightSchedule
    lam: float
    T: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        grid = np.linspace(0.0, self.T, 2001)
        if self.schedule.kind == "tabulated":
            grid = np.union1d(grid, [t for t in self.schedule.params["times"] if 0 <= t <= self.T])
        a = self._rates(grid)
        if np.min(a) < -TOL.rate_negativity:
            k, j = np.unravel_index(np.argmin(a), a.shape)
            raise RateNegativityError(
                f"lam={self.lam} too small for this schedule: a_{j}({grid[k]:.6g}) = {a[k, j]:.3g}"
            )

    @property
    def Q(self) -> int:
        return self.schedule.Q

    def _rates(self, t):
        return self.schedule.derivative(t) + self.lam * self.schedule.value(t)

    def stationary(self, t):
        """``q(t) = a(t) / lam``."""
        return self._rates(t) / self.lam

    def rate_matrix(self) -> "RateMatrix":
        def A(t):
            a = balanced_rates(self, t)
            M = np.tile(a, (self.Q, 1))
            np.fill_diagonal(M, 0.0)
            M[np.diag_indices(self.Q)] = -M.sum(axis=1)
            return M

        return RateMatrix(self.Q, A)


def min_lambda(schedule: WeightSchedule, T: float, n: int = 10001) -> float:
    """Smallest ``lam`` keeping every ``a_j`` nonnegative on a grid of ``[0, T]``."""
    t = np.linspace(0.0, T, n)
    w = schedule.value(t)
    dw = schedule.derivative(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dw < 0, -dw / w, 0.0)
    return float(np.max(ratio))


def balanced_rates(scheme: BalancedScheme, t: float) -> np.ndarray:
    """Rates ``a(t) = w'(t) + lam w(t)``; they sum to ``lam``."""
    a = scheme._rates(t)
    if np.min(a) < -TOL.rate_negativity:
        raise RateNegativityError(f"negative rate {np.min(a):.3g} at t={t}: lam too small for this schedule")
    return np.clip(a, 0.0, None)


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """General time-dependent generator ``A(t)`` (rows: from, columns: to)."""

    Q: int
    A: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.A(t), dtype=float)

    @classmethod
    def constant(cls, A) -> "RateMatrix":
        A = np.asarray(A, dtype=float)
        return cls(A.shape[0], lambda t: A)


@dataclass
class RateReport:
    ok: bool
    kind: str | None = None  # "negative-rate" | "row-sum"
    entry: tuple | None = None
    time: float | None = None
    value: float | None = None
    null_gap: float | None = None
    degenerate_null: bool = False

    def __str__(self):
        if self.ok:
            if self.null_gap is None:
                return "ok (single node)"
            return f"ok (null-eigenvalue gap {self.null_gap:.6g})"
        return f"violation {self.kind} at entry {self.entry}, t={self.time:.6g}: {self.value:.6g}"


def validate_rate_matrix(A: RateMatrix, grid: Sequence[float]) -> RateReport:
    """Check rate-matrix structure on ``grid``; report the first violation.

    Also reports the smallest gap between the null eigenvalue of ``A^T`` and
    the rest of its spectrum over the grid.
    """
    gap = np.inf
    for t in grid:
        M = A(t)
        off = M - np.diag(np.diag(M))
        bad = np.argwhere(off < -TOL.rate_negativity)
        if bad.size:
            i, j = map(int, bad[0])
            return RateReport(False, "negative-rate", (i, j), float(t), float(M[i, j]))
        sums = M.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums) > TOL.row_sum)
        if bad.size:
            i = int(bad[0])
            return RateReport(False, "row-sum", (i,), float(t), float(sums[i]))
        if A.Q > 1:
            ev = np.linalg.eigvals(M.T)
            k = np.argmin(np.abs(ev))
            gap = min(gap, float(np.min(np.abs(np.delete(ev, k) - ev[k]))))
    if A.Q == 1:
        return RateReport(True)
    return RateReport(True, null_gap=gap, degenerate_null=bool(gap <= TOL.null_gap))


def occupancy_solution(scheme: BalancedScheme, p0: Sequence[float], t: float) -> np.ndarray:
    """Closed-form occupation probabilities at time ``t``.

    ``p(t) = q(t) + (p0 - q(0)) e^{-lam t} - int_0^t q'(s) e^{-lam (t - s)} ds``
    with the integral done by adaptive quadrature.
    """
    p0 = np.asarray(p0, dtype=float)
    lam = scheme.lam
    sch = scheme.schedule
    q = scheme.stationary
    out = q(t) + (p0 - q(0.0)) * np.exp(-lam * t)
    if sch.kind == "constant" or t == 0:
        return out

    def dq(s):
        return (sch.second_derivative(s) / lam + sch.derivative(s)) * np.exp(-lam * (t - s))

    points = None
    if sch.kind == "tabulated":
        points = [x for x in sch.params["times"] if 0 < x < t] or None
    integral, _ = quad_vec(dq, 0.0, t, epsabs=TOL.quadrature, epsrel=TOL.quadrature, points=points)
    return out - integral


@dataclass(frozen=True)
class Realization:
    """One trajectory of the chain as ``(node, dwell)`` segments.

    ``n_candidates`` counts Poisson clock ticks, ``n_jumps`` ticks that
    changed the node.
    """

    segments: tuple
    total: float
    n_candidates: int = 0
    n_jumps: int = 0

    @property
    def nodes(self) -> np.ndarray:
        return np.array([s[0] for s in self.segments], dtype=int)

    @property
    def dwells(self) -> np.ndarray:
        return np.array([s[1] for s in self.segments], dtype=float)

    def node_at(self, t: float) -> int:
        ends = np.cumsum(self.dwells)
        k = int(np.searchsorted(ends, t, side="right"))
        return int(self.segments[min(k, len(self.segments) - 1)][0])

    def to_json(self) -> list:
        return [[int(k), float(tau)] for k, tau in self.segments]


def sample_realization(scheme: BalancedScheme, T: float, rng: np.random.Generator) -> Realization:
    """Exact CTMC path on ``[0, T]`` by uniformization at rate ``lam``.

    The initial node is drawn from ``w(0)``. At each tick of a rate-``lam``
    Poisson clock the next node is drawn from ``a(t) / lam``; repeats of the
    current node are merged into its dwell.
    """
    sch = scheme.schedule
    Q = sch.Q
    if Q == 1:
        return Realization(((0, float(T)),), float(T))
    w0 = np.clip(sch.value(0.0), 0.0, None)
    node = int(min(np.searchsorted(np.cumsum(w0 / w0.sum()), rng.random(), side="right"), Q - 1))
    n = int(rng.poisson(scheme.lam * T))
    times = np.sort(rng.uniform(0.0, T, n))
    u = rng.random(n)
    if n:
        a = scheme._rates(times)
        if np.min(a) < -TOL.rate_negativity:
            raise RateNegativityError("negative rate encountered at a candidate event time")
        cdf = np.cumsum(np.clip(a, 0.0, None), axis=1)
        cdf /= cdf[:, -1:]
        picks = np.minimum((u[:, None] >= cdf).sum(axis=1), Q - 1)
    else:
        picks = np.empty(0, dtype=int)

    segments = []
    start = 0.0
    jumps = 0
    for t, j in zip(times, picks):
        j = int(j)
        if j == node:
            continue
        if t > start:
            if segments and segments[-1][0] == node:
                segments[-1] = (node, segments[-1][1] + float(t - start))
            else:
                segments.append((node, float(t - start)))
        start = float(t)
        node = j
        jumps += 1
    if T > start:
        segments.append((node, float(T - start)))
    return Realization(tuple(segments), float(T), n, jumps)
