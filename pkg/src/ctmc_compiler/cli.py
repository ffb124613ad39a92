"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 bound violation,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import rng as streams
from .bounds import BoundInputs, PoleError, bound_balanced_qnode, bound_general_p, bound_imperfect, bound_two_node
from .channels import ConvergenceError
from .compiler import compile_sequence, gate_cost
from .harness import (SWEEP_AXES, ConfigError, emit_report, load_scenario, report_meta,
                      run_scenario, sweep)
from .markov import sample_realization, validate_rate_matrix
from .quantum import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 2, 3, 4


def _scenario(args):
    sc = load_scenario(args.config)
    if args.seed is not None:
        sc = sc.with_changes(seed=args.seed)
    return sc


def cmd_validate(args) -> int:
    sc = _scenario(args)
    scheme = sc.scheme()
    report = validate_rate_matrix(scheme.rate_matrix(), np.linspace(0.0, sc.T, 101))
    lam, eps1 = sc.resolve_lambda()
    print(f"{sc.name}: ok (Q={len(sc.hamiltonians)}, qubits={sc.qubits}, lambda={lam:.6g}"
          + (f", epsilon1={eps1:.6g}" if eps1 else "") + ")")
    print(f"rate matrix: {report}")
    return EXIT_OK if report.ok else EXIT_CONFIG


def cmd_sample(args) -> int:
    sc = _scenario(args)
    real = sample_realization(sc.scheme(), sc.T, streams.stream(sc.seed, args.index, domain=streams.CHAIN))
    print(json.dumps({"seed": sc.seed, "index": args.index, "total": real.total,
                      "candidates": real.n_candidates, "jumps": real.n_jumps,
                      "segments": real.to_json()}))
    return EXIT_OK


def cmd_compile(args) -> int:
    sc = _scenario(args)
    lam, eps1 = sc.resolve_lambda()
    real = sample_realization(sc.scheme(), sc.T, streams.stream(sc.seed, args.index, domain=streams.CHAIN))
    seq = compile_sequence(real, sc.dense_hamiltonians())
    model = sc.cost_model(eps1)
    doc = json.loads(seq.to_json())
    doc.update({"seed": sc.seed, "index": args.index, "lambda": lam, "gate_cost": gate_cost(seq, model)})
    text = seq.summary() + f"\ngate cost: {doc['gate_cost']:.6g}\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{sc.name}_circuit.json").write_text(json.dumps(doc) + "\n")
        (out / f"{sc.name}_circuit.txt").write_text(text)
    else:
        print(json.dumps(doc))
        print(text, end="", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    sc = _scenario(args)
    report = run_scenario(sc, threads=args.threads)
    out = args.out or sc.out_dir
    csv_path, txt_path = emit_report(report.rows, out, sc.name, report_meta(sc), report.notes)
    print(txt_path.read_text(), end="")
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    values = [float(v) for v in args.values.split(",")] if args.values else []
    rows, fit = sweep(sc, args.axis, values, threads=args.threads)
    extra = [f"fitted slope of log(bias_p1) vs log(lambda): {fit['slope']:.4f}"] if "slope" in fit else []
    out = args.out or sc.out_dir
    meta = report_meta(sc, f"sweep over {args.axis}")
    _, txt_path = emit_report(rows, out, f"{sc.name}_sweep_{args.axis}", meta, extra)
    print(txt_path.read_text(), end="")
    return EXIT_VIOLATION if fit["violations"] else EXIT_OK


def cmd_bounds(args) -> int:
    sc = _scenario(args)
    Hs = sc.dense_hamiltonians()
    lam, eps1 = sc.resolve_lambda()
    C = sc.C()
    schedule = sc.schedule()
    print(f"lambda = {lam:.10g}, C = {C:.10g}, T = {sc.T:.10g}")
    if eps1:
        print(f"epsilon1 = {eps1:.10g}")

    def show(label, fn, *a):
        try:
            print(f"{label} = {fn(*a):.10g}")
        except PoleError as exc:
            print(f"{label}: vacuous ({exc})")

    if len(Hs) == 2:
        b = BoundInputs.from_problem(Hs, schedule, sc.T, lam, 1)
        show("two_node", bound_two_node, b.w_sup_product, b.delta_norm, sc.T, lam)
    show("qnode", bound_balanced_qnode, C, sc.T, lam)
    for p, name in ((1, "general_p1"), (2, "general_p2"), (np.inf, "general_inf")):
        show(name, bound_general_p, BoundInputs.from_problem(Hs, schedule, sc.T, lam, p))
    if eps1:
        show("imperfect", bound_imperfect, C, sc.T, lam, eps1)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctmc-compiler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario JSON path or bundled scenario name")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        return p

    common(sub.add_parser("validate", help="check a scenario file")).set_defaults(func=cmd_validate)
    for name, func in (("sample", cmd_sample), ("compile", cmd_compile)):
        p = common(sub.add_parser(name, help=f"{name} one realization"))
        p.add_argument("--index", type=int, default=0, help="realization index within the seed")
        if name == "compile":
            p.add_argument("--out", default=None)
        p.set_defaults(func=func)
    p = common(sub.add_parser("run", help="run a scenario end to end"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)
    p = common(sub.add_parser("sweep", help="run a scenario over a parameter axis"))
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    common(sub.add_parser("bounds", help="print analytic bounds only")).set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, NumericalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
