"""Regenerate the bundled scenario files (random Pauli sums are seeded)."""
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "ctmc_compiler" / "scenarios"


def random_pauli_sum(rng, n, k):
    words = set()
    while len(words) < k:
        w = "".join(rng.choice(list("IXYZ"), size=n))
        if w != "I" * n:
            words.add(w)
    return [[round(float(rng.normal()), 6), w] for w in sorted(words)]


def base(name, description, **kw):
    d = {"spec_version": 1, "name": name, "description": description}
    d.update(kw)
    d.setdefault("steps", {"ode_tol": 1e-9, "exact_steps": 256, "checkpoints": 100})
    d.setdefault("lb_samples", 200)
    d.setdefault("cost", {"alpha": 1.0, "beta": 1.0})
    d.setdefault("outputs", {"dir": "results"})
    return d


def main():
    rng = np.random.default_rng(20240601)
    q4 = [random_pauli_sum(rng, 2, 3) for _ in range(4)]
    q3 = [random_pauli_sum(rng, 2, 3) for _ in range(3)]
    scenarios = [
        base("two_node_xz", "H1=X, H2=Z on one qubit, equal weights",
             qubits=1, hamiltonians=[[[1.0, "X"]], [[1.0, "Z"]]],
             weights={"kind": "constant", "weights": [0.5, 0.5]}, T=1.0, **{"lambda": {"value": 20.0}},
             initial_state="+", M=2000, seed=11,
             baselines=[{"kind": "qdrift", "N": 40, "M": 2000},
                        {"kind": "trotter1-det", "N": 20},
                        {"kind": "trotter1-random", "N": 20, "M": 2000}]),
        base("identical_terms", "two identical terms: the compiler is exact",
             qubits=1, hamiltonians=[[[0.7, "X"], [0.4, "Z"]], [[0.7, "X"], [0.4, "Z"]]],
             weights={"kind": "constant", "weights": [0.3, 0.7]}, T=1.0, **{"lambda": {"value": 5.0}},
             initial_state="0", M=200, seed=12),
        base("single_term", "one term: no jumps at all",
             qubits=2, hamiltonians=[[[1.0, "XZ"], [0.5, "YI"]]],
             weights={"kind": "constant", "weights": [1.0]}, T=1.0, **{"lambda": {"value": 3.0}},
             initial_state="0+", M=50, seed=13),
        base("target_error_perfect", "three random 2-qubit terms, norm 1, rate from the perfect-gate target",
             qubits=2, hamiltonians=q3, normalize_terms=1.0,
             weights={"kind": "constant", "weights": [0.2, 0.3, 0.5]}, T=1.0,
             **{"lambda": {"epsilon0": 0.05, "model": "perfect"}},
             initial_state="0+", M=10000, seed=14),
        base("target_error_imperfect", "target_error_perfect terms with imperfect gates (depolarizing kick per segment)",
             qubits=2, hamiltonians=q3, normalize_terms=1.0,
             weights={"kind": "constant", "weights": [0.2, 0.3, 0.5]}, T=1.0,
             **{"lambda": {"epsilon0": 0.05, "model": "imperfect"}},
             initial_state="0+", M=4000, seed=15),
        base("qnode_random", "four random 2-qubit terms, norm 1, uniform weights",
             qubits=2, hamiltonians=q4, normalize_terms=1.0,
             weights={"kind": "constant", "weights": [0.25, 0.25, 0.25, 0.25]}, T=1.0,
             **{"lambda": {"value": 16.0}}, initial_state="00", M=2000, seed=16,
             baselines=[{"kind": "qdrift", "N": 64, "M": 2000}]),
        base("adiabatic", "clamped linear interpolation from X to Z",
             qubits=1, hamiltonians=[[[1.0, "X"]], [[1.0, "Z"]]],
             weights={"kind": "clamped-adiabatic", "delta": 0.1}, T=1.0, **{"lambda": {"value": 20.0}},
             initial_state="+", M=2000, seed=17,
             steps={"ode_tol": 1e-9, "exact_steps": 4096, "checkpoints": 100}),
    ]
    for sc in scenarios:
        (OUT / f"{sc['name']}.json").write_text(json.dumps(sc, indent=2) + "\n")
        print("wrote", sc["name"])


if __name__ == "__main__":
    main()
