"""Scenario files, end-to-end runs, sweeps and CSV reports."""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import rng as streams
from .baselines import BaselineConfig, qdrift_sequence, trotter1_sequence
from .bounds import (BoundInputs, PoleError, bound_balanced_qnode, bound_general_p,
                     bound_imperfect, bound_two_node)
from .channels import (_map_indexed, averaged_channel_map, averaged_channel_ode,
                       channel_distance_lb, estimate_from_samples, exact_unitary, mc_channel,
                       target_hamiltonian, unitary_channel)
from .compiler import (ConfigurationError, CostModel, Propagator, expected_gate_cost, gate_cost,
                       gate_cost_bound, lambda_for_target_error, renormalize_decomposition)
from .config import TOL
from .markov import BalancedScheme, RateNegativityError, WeightSchedule, sample_realization
from .quantum import (PauliTerm, ket, operator_norm, pauli_to_dense, projector, schatten_norm,
                      state_metrics)

COLUMNS = (
    "scenario", "method", "Q", "qubits", "T", "lambda", "epsilon1", "C", "M", "N", "seed",
    "bias_p1", "bias_p2", "bias_inf", "channel_lb",
    "bound_two_node", "bound_qnode", "bound_general", "bound_general_p2", "bound_general_inf",
    "bound_imperfect",
    "mc_error_p1", "mc_vs_ode_td", "mc_stderr",
    "trace_distance", "fidelity", "fvdg_ok",
    "gates_realized_mean", "gates_expected", "gates_bound",
    "violations",
)
SWEEP_AXES = ("lambda", "T", "M", "N_baseline")
BUNDLED = ("two_node_xz", "identical_terms", "single_term", "target_error_perfect",
           "target_error_imperfect", "qnode_random", "adiabatic")


class ConfigError(ValueError):
    """Invalid scenario; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


def load_schema() -> dict:
    text = resources.files("ctmc_compiler").joinpath("scenarios/scenario.schema.json").read_text()
    return json.loads(text)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("ctmc_compiler").joinpath(f"scenarios/{name}.json")))


@dataclass
class Scenario:
    name: str
    qubits: int
    hamiltonians: list
    weights: dict | None
    T: float
    lam: dict
    seed: int
    initial_state: str
    M: int = 1000
    ode_tol: float = TOL.ode
    exact_steps: int = 256
    checkpoints: int = 100
    lb_samples: int = 200
    alpha: float = 1.0
    beta: float = 1.0
    baselines: list = field(default_factory=list)
    out_dir: str = "results"
    normalize_terms: float | None = None
    renormalize: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    # derived objects

    def _base_hamiltonians(self) -> list:
        Hs = [pauli_to_dense(terms, self.qubits) for terms in self.hamiltonians]
        if self.normalize_terms:
            Hs = [H * (self.normalize_terms / operator_norm(H)) for H in Hs]
        return Hs

    def dense_hamiltonians(self) -> list:
        Hs = self._base_hamiltonians()
        if self.renormalize:
            _, Hs, _ = renormalize_decomposition(Hs)
        return Hs

    def schedule(self) -> WeightSchedule:
        if self.renormalize:
            w, _, _ = renormalize_decomposition(self._base_hamiltonians())
            return WeightSchedule.constant(w)
        d = dict(self.weights)
        if d["kind"] in ("linear-interpolation", "clamped-adiabatic"):
            d.setdefault("T", self.T)
        return WeightSchedule.from_dict(d)

    def C(self) -> float:
        return max(operator_norm(H) for H in self.dense_hamiltonians())

    def resolve_lambda(self) -> tuple[float, float | None]:
        if "value" in self.lam:
            return float(self.lam["value"]), None
        return lambda_for_target_error(self.C(), self.T, self.lam["epsilon0"], self.lam["model"])

    def scheme(self) -> BalancedScheme:
        lam, _ = self.resolve_lambda()
        return BalancedScheme(self.schedule(), lam, self.T)

    def rho0(self) -> np.ndarray:
        return projector(ket(self.initial_state))

    def cost_model(self, epsilon1=None) -> CostModel:
        return CostModel(self.alpha, self.beta, self.C(), epsilon1)

    def with_changes(self, **changes) -> "Scenario":
        new = copy.deepcopy(self)
        for k, v in changes.items():
            setattr(new, k, v)
        return new

    def config_hash(self) -> str:
        data = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(data.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = {
            "spec_version": 1, "name": self.name, "qubits": self.qubits,
            "hamiltonians": [[[float(c), w] for c, w in terms] for terms in self.hamiltonians],
            "T": self.T, "lambda": self.lam, "seed": self.seed, "initial_state": self.initial_state,
            "M": self.M,
            "steps": {"ode_tol": self.ode_tol, "exact_steps": self.exact_steps,
                      "checkpoints": self.checkpoints},
            "lb_samples": self.lb_samples, "cost": {"alpha": self.alpha, "beta": self.beta},
            "baselines": [{"kind": b.kind, "N": b.N, "M": b.M} for b in self.baselines],
            "outputs": {"dir": self.out_dir}, "renormalize": self.renormalize,
        }
        if self.weights is not None:
            d["weights"] = self.weights
        if self.normalize_terms:
            d["normalize_terms"] = self.normalize_terms
        return d


def load_scenario(source) -> Scenario:
    """Parse and validate a scenario from a path or an already-loaded dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists() and bundled_path(str(source)).exists():
            path = bundled_path(str(source))
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError("", f"no such file {source}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from exc
    else:
        raw = copy.deepcopy(source)

    errors = sorted(jsonschema.Draft202012Validator(load_schema()).iter_errors(raw),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise ConfigError("/".join(map(str, e.absolute_path)), e.message)

    n = raw["qubits"]
    hams = []
    for i, terms in enumerate(raw["hamiltonians"]):
        parsed = []
        for k, (c, word) in enumerate(terms):
            if len(word) != n:
                raise ConfigError(f"hamiltonians/{i}/{k}/1", f"word {word!r} has length {len(word)}, expected {n}")
            parsed.append(PauliTerm(float(c), word.upper()))
        hams.append(parsed)
    Q = len(hams)

    renorm = raw.get("renormalize", False)
    weights = raw.get("weights")
    if renorm and weights is not None:
        raise ConfigError("weights", "must be omitted when renormalize is true")
    if not renorm and weights is None:
        raise ConfigError("weights", "required unless renormalize is true")
    if weights is not None:
        kind = weights["kind"]
        if kind == "constant":
            qw = len(weights["weights"])
        elif kind == "linear-interpolation":
            qw = len(weights["start"])
            if len(weights["end"]) != qw:
                raise ConfigError("weights/end", "length differs from weights/start")
        elif kind == "clamped-adiabatic":
            qw = 2
        else:
            qw = len(weights["values"][0]) if weights["values"] else 0
            if len(weights["values"]) != len(weights["times"]):
                raise ConfigError("weights/values", "one row per entry of weights/times is required")
        if qw != Q:
            raise ConfigError("weights", f"describes {qw} nodes but {Q} Hamiltonians are given")

    steps = raw.get("steps", {})
    cost = raw.get("cost", {})
    initial = raw.get("initial_state", "0" * n)
    if len(initial) != n:
        raise ConfigError("initial_state", f"needs {n} qubit labels")
    sc = Scenario(
        name=raw["name"], qubits=n, hamiltonians=hams, weights=weights, T=float(raw["T"]),
        lam=raw["lambda"], seed=int(raw["seed"]), initial_state=initial, M=raw.get("M", 1000),
        ode_tol=steps.get("ode_tol", TOL.ode), exact_steps=steps.get("exact_steps", 256),
        checkpoints=steps.get("checkpoints", 100), lb_samples=raw.get("lb_samples", 200),
        alpha=cost.get("alpha", 1.0), beta=cost.get("beta", 1.0),
        baselines=[BaselineConfig(b["kind"], b["N"], b.get("M", 1000)) for b in raw.get("baselines", [])],
        out_dir=raw.get("outputs", {}).get("dir", "results"),
        normalize_terms=raw.get("normalize_terms"), renormalize=renorm, raw=raw,
    )
    try:
        sc.schedule()
    except (ValueError, KeyError) as exc:
        raise ConfigError("weights", str(exc)) from exc
    try:
        sc.scheme()
    except RateNegativityError as exc:
        raise ConfigError("lambda", str(exc)) from exc
    except ConfigurationError as exc:
        raise ConfigError("lambda", str(exc)) from exc
    if sc.baselines and sc.schedule().kind != "constant":
        raise ConfigError("baselines", "baselines need a constant weight schedule")
    return sc


def _maybe(fn, *args):
    try:
        return fn(*args)
    except PoleError:
        return None


@dataclass
class Report:
    scenario: Scenario
    rows: list
    violations: list
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check(violations, label, measured, bound):
    if bound is not None and measured is not None and measured > bound + TOL.bound_slack:
        violations.append(f"{label}={measured:.6g} > {bound:.6g}")


def run_scenario(sc: Scenario, threads: int = 1) -> Report:
    """Every channel, bound and cost for one scenario.

    Returns the CTMC row plus one row per baseline. ``Report.violations``
    lists measured errors that exceed an applicable analytic bound.
    """
    Hs = sc.dense_hamiltonians()
    schedule = sc.schedule()
    lam, eps1 = sc.resolve_lambda()
    scheme = BalancedScheme(schedule, lam, sc.T)
    Q = len(Hs)
    d = Hs[0].shape[0]
    C = max(operator_norm(H) for H in Hs)
    rho0 = sc.rho0()
    steps = 1 if schedule.kind == "constant" else sc.exact_steps

    U = exact_unitary(target_hamiltonian(schedule, Hs), sc.T, steps)
    exact_out = U @ rho0 @ U.conj().T
    traj = averaged_channel_ode(scheme, Hs, sc.T, rho0, tol=sc.ode_tol, checkpoints=sc.checkpoints,
                                epsilon1=eps1)
    avg_out = traj.output()
    avg_map = averaged_channel_map(scheme, Hs, sc.T, tol=sc.ode_tol, epsilon1=eps1)
    lb = channel_distance_lb(unitary_channel(U), avg_map, d, sc.lb_samples,
                             streams.stream(sc.seed, 0, domain=streams.STATES))

    est = mc_channel(scheme, Hs, sc.T, rho0, sc.M, sc.seed, epsilon1=eps1, threads=threads)
    td, F = state_metrics(exact_out, avg_out)

    model = sc.cost_model(eps1)
    costs = _map_indexed(
        lambda r: gate_cost(sample_realization(scheme, sc.T, streams.stream(sc.seed, r, domain=streams.CHAIN)), model),
        sc.M, threads)

    b = {p: BoundInputs.from_problem(Hs, schedule, sc.T, lam, p) for p in (1, 2, np.inf)}
    two = bound_two_node(b[1].w_sup_product, b[1].delta_norm, sc.T, lam) if Q == 2 else None
    qnode = _maybe(bound_balanced_qnode, C, sc.T, lam)
    general = {p: _maybe(bound_general_p, b[p]) for p in b}
    imperfect = _maybe(bound_imperfect, C, sc.T, lam, eps1) if eps1 else None
    biases = {p: schatten_norm(exact_out - avg_out, p) for p in (1, 2, np.inf)}

    violations = []
    if eps1:
        _check(violations, "channel_lb", lb, imperfect)
        _check(violations, "bias_p1", biases[1], imperfect)
    else:
        for label, bound in (("two_node", two), ("qnode", qnode), ("general", general[1])):
            _check(violations, f"channel_lb vs {label}", lb, bound)
            _check(violations, f"bias_p1 vs {label}", biases[1], bound)
        _check(violations, "bias_p2 vs general_p2", biases[2], general[2])
        _check(violations, "bias_inf vs general_inf", biases[np.inf], general[np.inf])
    fvdg_ok = (1 - F) <= td + TOL.trace
    if not fvdg_ok:
        violations.append("Fuchs-van de Graaf check failed")

    notes = []
    if schedule.kind != "constant":
        notes.append("time-dependent schedule: bounds use suprema of the weight factors over [0, T]")
    row = {
        "scenario": sc.name, "method": "ctmc", "Q": Q, "qubits": sc.qubits, "T": sc.T, "lambda": lam,
        "epsilon1": eps1, "C": C, "M": sc.M, "N": None, "seed": sc.seed,
        "bias_p1": biases[1], "bias_p2": biases[2], "bias_inf": biases[np.inf], "channel_lb": lb,
        "bound_two_node": two, "bound_qnode": qnode, "bound_general": general[1],
        "bound_general_p2": general[2], "bound_general_inf": general[np.inf],
        "bound_imperfect": imperfect,
        "mc_error_p1": schatten_norm(exact_out - est.output, 1),
        "mc_vs_ode_td": 0.5 * schatten_norm(est.output - avg_out, 1), "mc_stderr": est.stderr,
        "trace_distance": td, "fidelity": F, "fvdg_ok": fvdg_ok,
        "gates_realized_mean": float(np.mean(costs)),
        "gates_expected": expected_gate_cost(schedule.value(0.0), lam, sc.T, model)
        if schedule.kind == "constant" else None,
        "gates_bound": gate_cost_bound(sc.T, lam, model),
        "violations": ";".join(violations),
    }
    rows = [row]
    for cfg in sc.baselines:
        rows.append(_run_baseline(sc, cfg, Hs, schedule.value(0.0), exact_out, rho0, C, threads))
    return Report(sc, rows, violations, notes)


def _run_baseline(sc, cfg: BaselineConfig, Hs, w, exact_out, rho0, C, threads) -> dict:
    prop = Propagator(Hs)
    model = CostModel(sc.alpha, sc.beta, C)
    if cfg.kind == "qdrift":
        domain = streams.QDRIFT
        make = lambda rng: qdrift_sequence(Hs, sc.T, cfg.N, rng, weights=w, propagator=prop)
    elif cfg.kind == "trotter1-random":
        domain = streams.TROTTER
        make = lambda rng: trotter1_sequence(Hs, w, sc.T, cfg.N, "random-permutation", rng, prop)
    else:
        domain = streams.TROTTER
        make = lambda rng: trotter1_sequence(Hs, w, sc.T, cfg.N, "fixed", None, prop)
    M = cfg.M if cfg.randomized else 1

    def seq(r):
        return make(streams.stream(sc.seed, r, domain=domain))

    outputs = _map_indexed(lambda r: seq(r).apply(rho0), M, threads)
    costs = _map_indexed(lambda r: np.array(gate_cost(seq(r), model)), M, threads)
    est = estimate_from_samples(outputs)
    td, F = state_metrics(exact_out, est.output)
    row = {c: None for c in COLUMNS}
    row.update({
        "scenario": sc.name, "method": cfg.kind, "Q": len(Hs), "qubits": sc.qubits, "T": sc.T,
        "C": C, "M": M, "N": cfg.N, "seed": sc.seed,
        "mc_error_p1": schatten_norm(exact_out - est.output, 1), "mc_stderr": est.stderr,
        "trace_distance": td, "fidelity": F, "fvdg_ok": (1 - F) <= td + TOL.trace,
        "gates_realized_mean": float(costs.mean()), "violations": "",
    })
    return row


def sweep(sc: Scenario, axis: str, values, threads: int = 1) -> tuple[list, dict]:
    """Run ``sc`` once per value of ``axis``; returns ``(rows, fit)``.

    A lambda sweep also fits ``log(bias_p1)`` against ``log(lambda)``; the
    slope is returned in ``fit["slope"]``.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"unknown sweep axis {axis!r}")
    if not values:
        raise ConfigError("values", "empty sweep")
    rows, violations = [], []
    for v in values:
        if axis == "lambda":
            variant = sc.with_changes(lam={"value": float(v)})
        elif axis == "T":
            variant = sc.with_changes(T=float(v))
        elif axis == "M":
            variant = sc.with_changes(M=int(v))
        else:
            if not sc.baselines:
                raise ConfigError("baselines", "N_baseline sweep needs at least one baseline")
            variant = sc.with_changes(baselines=[BaselineConfig(b.kind, int(v), b.M) for b in sc.baselines])
        try:
            variant.scheme()
        except (RateNegativityError, ConfigurationError) as exc:
            raise ConfigError(axis, f"value {v}: {exc}") from exc
        report = run_scenario(variant, threads)
        rows.extend(report.rows)
        violations.extend(report.violations)
    fit = {"violations": violations}
    if axis == "lambda":
        ctmc = [r for r in rows if r["method"] == "ctmc" and r["bias_p1"] > 0]
        if len(ctmc) >= 2:
            x = np.log([r["lambda"] for r in ctmc])
            y = np.log([r["bias_p1"] for r in ctmc])
            fit["slope"] = float(np.polyfit(x, y, 1)[0])
    return rows, fit


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--tags"], capture_output=True, text=True,
                             cwd=Path(__file__).parent, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return repr(v)
    return str(v)


def render_csv(rows, meta: dict) -> str:
    if not rows:
        raise ValueError("no rows to report")
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def render_summary(rows, meta: dict, extra: list | None = None) -> str:
    lines = [f"{k}: {v}" for k, v in meta.items()]
    lines.append("")
    for r in rows:
        if r["method"] == "ctmc":
            lines.append(f"[{r['scenario']}] ctmc  lambda={r['lambda']:.6g}  T={r['T']:.6g}  Q={r['Q']}")
            lines.append(f"  bias (p=1,2,inf): {r['bias_p1']:.4e} {r['bias_p2']:.4e} {r['bias_inf']:.4e}")
            lines.append(f"  channel distance lower bound: {r['channel_lb']:.4e}")
            for k in ("bound_two_node", "bound_qnode", "bound_general", "bound_imperfect"):
                if r.get(k) is not None:
                    lines.append(f"  {k}: {r[k]:.4e}")
            lines.append(f"  trace distance {r['trace_distance']:.4e}, fidelity {r['fidelity']:.6f}")
            lines.append(f"  MC: error_p1={r['mc_error_p1']:.4e} vs ODE td={r['mc_vs_ode_td']:.3e} "
                         f"(stderr {r['mc_stderr']:.3e}, M={r['M']})")
            lines.append(f"  gates: realized mean {r['gates_realized_mean']:.4f}, bound {r['gates_bound']:.4f}")
            lines.append(f"  status: {'VIOLATION ' + r['violations'] if r['violations'] else 'within bounds'}")
        else:
            lines.append(f"[{r['scenario']}] {r['method']}  N={r['N']}  M={r['M']}: "
                         f"error_p1={r['mc_error_p1']:.4e} gates={r['gates_realized_mean']:.4f}")
    for e in extra or []:
        lines.append(e)
    return "\n".join(lines) + "\n"


def report_meta(sc: Scenario, kind: str = "run") -> dict:
    return {"ctmc-compiler report": kind, "scenario": sc.name, "seed": sc.seed,
            "git": git_describe(), "config_hash": sc.config_hash()}


def emit_report(rows, out_dir, stem: str, meta: dict, extra: list | None = None) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>_summary.txt``; returns both paths."""
    if not rows:
        raise ValueError("no rows to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    txt_path = out / f"{stem}_summary.txt"
    csv_path.write_text(render_csv(rows, meta))
    txt_path.write_text(render_summary(rows, meta, extra))
    return csv_path, txt_path
