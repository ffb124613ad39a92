import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctmc_compiler.bounds import bound_balanced_qnode
from ctmc_compiler.compiler import (ConfigurationError, CostModel, Propagator, compile_sequence,
                                    expected_gate_cost, gate_cost, gate_cost_bound,
                                    lambda_for_target_error, make_sequence, renormalize_decomposition)
from ctmc_compiler.markov import BalancedScheme, Realization, WeightSchedule, sample_realization
from ctmc_compiler.quantum import PAULI, matexp_hermitian, operator_norm, pauli_to_dense
from ctmc_compiler.rng import stream

from oracles import random_hermitian, sequential_propagation

X, Z = PAULI["X"], PAULI["Z"]


def test_single_segment_sequence():
    H = random_hermitian(np.random.default_rng(0), 4)
    seq = compile_sequence(Realization(((0, 1.3),), 1.3), [H])
    assert len(seq) == 1
    assert np.allclose(seq.product(), matexp_hermitian(H, 1.3), atol=1e-13)


def test_identical_generators_compose_exactly():
    H = random_hermitian(np.random.default_rng(1), 4)
    scheme = BalancedScheme(WeightSchedule.constant([0.3, 0.7]), 25.0, 1.0)
    real = sample_realization(scheme, 1.0, stream(9))
    seq = compile_sequence(real, [H, H.copy()])
    assert np.max(np.abs(seq.product() - matexp_hermitian(H, 1.0))) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sequence_matches_sequential_oracle(seed):
    scheme = BalancedScheme(WeightSchedule.constant([0.5, 0.5]), 20.0, 1.0)
    real = sample_realization(scheme, 1.0, stream(seed))
    seq = compile_sequence(real, [X, Z])
    psi = np.array([1.0, 0.0], dtype=complex)
    expected = sequential_propagation([X, Z], real.segments, psi)
    assert np.max(np.abs(seq.product() @ psi - expected)) < 1e-12
    assert seq.nodes.tolist() == real.nodes.tolist()


def test_propagator_rejects_mismatched_dimensions():
    with pytest.raises(ValueError, match="mismatched"):
        Propagator([X, np.eye(4)])


def test_make_sequence_rejects_bad_node():
    with pytest.raises(ValueError):
        make_sequence([0, 2], [0.1, 0.1], Propagator([X, Z]), 0.2)


def test_sequence_json_roundtrip():
    seq = make_sequence([0, 1, 0], [0.25, 0.5, 0.25], Propagator([X, Z]), 1.0)
    import json
    doc = json.loads(seq.to_json())
    assert doc["circuit"] == [[0, 0.25], [1, 0.5], [0, 0.25]]
    assert "node 1: 1 segments" in seq.summary()


# lambda selection

@pytest.mark.parametrize("eps0,lam", [(0.1, 42.0), (0.01, 402.0), (0.05, 82.0)])
def test_lambda_perfect(eps0, lam):
    got, eps1 = lambda_for_target_error(1.0, 1.0, eps0, "perfect")
    assert got == pytest.approx(lam, abs=1e-9)
    assert eps1 is None


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(1e-3, 0.5))
def test_lambda_perfect_saturates_qnode_bound(C, T, eps0):
    lam, _ = lambda_for_target_error(C, T, eps0)
    assert bound_balanced_qnode(C, T, lam) == pytest.approx(2 * eps0, rel=1e-12)


def test_lambda_imperfect_budget_identity():
    C, T, eps0 = 1.0, 1.0, 0.1
    lam, eps1 = lambda_for_target_error(C, T, eps0, "imperfect")
    expected_lam = 4 * C**2 * T / eps0 * (1 + 1 / math.log(8 * C**2 * T**2 / eps0)) + 2 * C
    assert lam == pytest.approx(expected_lam, rel=1e-14)
    assert 0 < eps1 < 1
    assert abs(8 * C**2 * T / (lam - 2 * C) + lam * T * eps1 - 2 * eps0) < 1e-10


def test_lambda_imperfect_guard():
    with pytest.raises(ConfigurationError, match="exceed e"):
        lambda_for_target_error(0.1, 0.1, 0.5, "imperfect")


@pytest.mark.parametrize("args", [(0.0, 1.0, 0.1), (1.0, 1.0, -0.1)])
def test_lambda_rejects_nonpositive(args):
    with pytest.raises(ConfigurationError):
        lambda_for_target_error(*args)


def test_lambda_rejects_unknown_model():
    with pytest.raises(ConfigurationError):
        lambda_for_target_error(1.0, 1.0, 0.1, "lossy")


# costs

def test_cost_single_segment():
    r = Realization(((0, 1.7),), 1.7)
    assert gate_cost(r, CostModel(1, 1, 1)) == pytest.approx(1 + 1.7)


def test_cost_imperfect_unit_log():
    r = Realization(((0, 0.4), (1, 0.6)), 1.0)
    perfect = gate_cost(r, CostModel(1, 1, 2.0))
    assert gate_cost(r, CostModel(1, 1, 2.0, math.exp(-1))) == pytest.approx(perfect, rel=1e-15)


def test_cost_model_validation():
    with pytest.raises(ValueError):
        CostModel(-1, 1, 1)
    with pytest.raises(ValueError):
        CostModel(1, 1, 0)
    with pytest.raises(ValueError):
        CostModel(1, 1, 1, 1.5)


def test_empirical_cost_brackets():
    w = np.array([0.2, 0.3, 0.5])
    lam, T, M = 30.0, 1.0, 10_000
    model = CostModel(1.0, 1.0, 1.0)
    scheme = BalancedScheme(WeightSchedule.constant(w), lam, T)
    costs = np.array([gate_cost(sample_realization(scheme, T, stream(4, r)), model) for r in range(M)])
    upper = gate_cost_bound(T, lam, model)
    lower = upper - model.alpha * lam * T * np.sum(w**2)
    assert lower <= costs.mean() <= upper
    # exact expectation: 1 + lam T (1 - sum w^2) segments plus beta C T
    se = costs.std(ddof=1) / math.sqrt(M)
    assert abs(costs.mean() - (1 + expected_gate_cost(w, lam, T, model))) <= 3 * se


# renormalization

def test_renormalize_two_terms():
    w, Ht, c = renormalize_decomposition([Z, 3 * X])
    assert np.allclose(w, [0.25, 0.75]) and c == pytest.approx(4.0)
    assert [operator_norm(H) for H in Ht] == pytest.approx([4.0, 4.0])


def test_renormalize_single_term():
    H = 2.5 * Z
    w, Ht, c = renormalize_decomposition([H])
    assert np.allclose(w, [1.0]) and c == pytest.approx(2.5)
    assert np.allclose(Ht[0], H)


def test_renormalize_reconstructs_sum():
    rng = np.random.default_rng(17)
    Hs = []
    for _ in range(5):
        terms = [(float(rng.normal()), "".join(rng.choice(list("IXYZ"), 2))) for _ in range(3)]
        Hs.append(pauli_to_dense(terms, 2))
    Hs = [H for H in Hs if operator_norm(H) > 0]
    w, Ht, _ = renormalize_decomposition(Hs)
    recon = sum(wi * H for wi, H in zip(w, Ht))
    assert np.max(np.abs(recon - sum(Hs))) < 1e-12


def test_renormalize_zero_term():
    with pytest.raises(ValueError, match="zero-norm"):
        renormalize_decomposition([X, np.zeros((2, 2))])
    w, Ht, c = renormalize_decomposition([X, np.zeros((2, 2))], drop_zero=True)
    assert len(Ht) == 1 and c == pytest.approx(1.0)
