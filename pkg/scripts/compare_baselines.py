"""Error versus gate budget for the Markov-chain compiler, qDRIFT and Trotter.

For each budget the chain rate is chosen so its expected segment count
matches the baseline segment count ``N``.

    python3 scripts/compare_baselines.py --scenario two_node_xz --budgets 10,20,40,80
"""
import argparse
from dataclasses import dataclass, field

import numpy as np

from ctmc_compiler import rng as streams
from ctmc_compiler.baselines import qdrift_sequence, trotter1_sequence
from ctmc_compiler.channels import average_sequences, averaged_channel_ode
from ctmc_compiler.compiler import Propagator
from ctmc_compiler.harness import load_scenario
from ctmc_compiler.markov import BalancedScheme
from ctmc_compiler.quantum import matexp_hermitian, schatten_norm


@dataclass
class CompareConfig:
    scenario: str = "two_node_xz"
    budgets: list = field(default_factory=lambda: [10, 20, 40, 80])
    M: int = 2000
    threads: int = 1


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    cfg = CompareConfig()
    parser.add_argument("--scenario", default=cfg.scenario)
    parser.add_argument("--budgets", default=",".join(map(str, cfg.budgets)))
    parser.add_argument("--M", type=int, default=cfg.M)
    parser.add_argument("--threads", type=int, default=cfg.threads)
    a = parser.parse_args()
    cfg = CompareConfig(a.scenario, [int(v) for v in a.budgets.split(",")], a.M, a.threads)

    sc = load_scenario(cfg.scenario)
    schedule = sc.schedule()
    if schedule.kind != "constant":
        raise SystemExit("baseline comparison needs a constant weight schedule")
    Hs = sc.dense_hamiltonians()
    w = schedule.value(0.0)
    rho0 = sc.rho0()
    H = np.tensordot(w, np.stack(Hs), axes=1)
    U = matexp_hermitian(H, sc.T)
    exact = U @ rho0 @ U.conj().T
    prop = Propagator(Hs)

    print(f"{'budget':>6} {'ctmc':>10} {'qdrift':>10} {'trotter':>10} {'trot-rand':>10}")
    for N in cfg.budgets:
        # expected segments 1 + lam T (1 - sum w^2) = N
        lam = (N - 1) / (sc.T * (1 - np.sum(w**2))) if len(w) > 1 else float(N)
        traj = averaged_channel_ode(BalancedScheme(schedule, lam, sc.T), Hs, sc.T, rho0)
        ctmc = schatten_norm(exact - traj.output(), 1)
        qd = average_sequences(lambda g: qdrift_sequence(Hs, sc.T, N, g, weights=w, propagator=prop),
                               rho0, cfg.M, sc.seed, streams.QDRIFT, cfg.threads)
        per_rep = max(1, N // len(Hs))
        tr = trotter1_sequence(Hs, w, sc.T, per_rep, propagator=prop).apply(rho0)
        trr = average_sequences(
            lambda g: trotter1_sequence(Hs, w, sc.T, per_rep, "random-permutation", g, prop),
            rho0, cfg.M, sc.seed, streams.TROTTER, cfg.threads)
        print(f"{N:6d} {ctmc:10.4g} {schatten_norm(exact - qd.output, 1):10.4g} "
              f"{schatten_norm(exact - tr, 1):10.4g} {schatten_norm(exact - trr.output, 1):10.4g}")
    print("errors are trace norms of the output-state difference; randomized methods carry MC noise")


if __name__ == "__main__":
    main()
