import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctmc_compiler.quantum import (PAULI, NumericalError, PauliTerm, fidelity, is_unitary, ket,
                                   matexp_hermitian, pauli_to_dense, projector, schatten_norm,
                                   state_metrics, time_ordered_unitary, trace_distance)

from oracles import (eig2x2_hermitian, jacobi_singular_values, pauli_elementwise, random_density,
                     random_hermitian, taylor_expm)

X, Y, Z, I2 = PAULI["X"], PAULI["Y"], PAULI["Z"], PAULI["I"]


def test_pauli_z():
    assert np.array_equal(pauli_to_dense([PauliTerm(1.0, "Z")], 1), np.diag([1, -1]).astype(complex))


def test_pauli_tensor_construction():
    H = pauli_to_dense([(0.5, "XI"), (0.5, "IX")], 2)
    assert np.allclose(H, (np.kron(X, I2) + np.kron(I2, X)) / 2, atol=0)


def test_pauli_matches_elementwise_oracle():
    rng = np.random.default_rng(3)
    terms = [(float(rng.normal()), "".join(rng.choice(list("IXYZ"), 3))) for _ in range(6)]
    assert np.allclose(pauli_to_dense(terms, 3), pauli_elementwise(terms, 3), atol=1e-14)


@pytest.mark.parametrize("terms,n", [([(1.0, "XX")], 1), ([(1.0, "X")], 2)])
def test_pauli_word_length_mismatch(terms, n):
    with pytest.raises(ValueError, match="length"):
        pauli_to_dense(terms, n)


def test_pauli_dimension_cap():
    with pytest.raises(ValueError):
        pauli_to_dense([(1.0, "Z" * 11)], 11)


@given(st.lists(st.tuples(st.floats(-5, 5), st.text("IXYZ", min_size=2, max_size=2)), min_size=1, max_size=5))
def test_pauli_sum_is_hermitian(terms):
    H = pauli_to_dense(terms, 2)
    assert np.array_equal(H, H.conj().T)


def test_matexp_zero_generator():
    assert np.allclose(matexp_hermitian(np.zeros((2, 2)), 5.0), np.eye(2), atol=1e-15)


def test_matexp_diagonal():
    U = matexp_hermitian(Z, math.pi / 2)
    assert np.allclose(U, np.diag([np.exp(-1j * math.pi / 2), np.exp(1j * math.pi / 2)]), atol=1e-15)


def test_matexp_matches_taylor_oracle():
    rng = np.random.default_rng(8)
    H = random_hermitian(rng, 8)
    expected = taylor_expm(-1j * H * 0.3, 40)
    assert np.max(np.abs(matexp_hermitian(H, 0.3) - expected)) < 1e-9


def test_matexp_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        matexp_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(-20, 20))
def test_matexp_is_unitary(seed, n, t):
    H = random_hermitian(np.random.default_rng(seed), 2**n)
    U = matexp_hermitian(H, t)
    assert schatten_norm(U.conj().T @ U - np.eye(2**n), np.inf) < 1e-10


def test_schatten_identity_trace_norm():
    assert schatten_norm(np.eye(4), 1) == pytest.approx(4.0, abs=1e-14)


def test_schatten_x_minus_z():
    lo, hi = eig2x2_hermitian(X - Z)
    assert (lo, hi) == pytest.approx((-math.sqrt(2), math.sqrt(2)), abs=1e-15)
    assert schatten_norm(X - Z, np.inf) == pytest.approx(max(abs(lo), abs(hi)), abs=1e-14)


@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_schatten_matches_jacobi_svd(p):
    rng = np.random.default_rng(21)
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    s = jacobi_singular_values(M)
    expected = {1: s.sum(), 2: math.sqrt((s**2).sum()), np.inf: s.max()}[p]
    assert schatten_norm(M, p) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_schatten_holder(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    B = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lhs = schatten_norm(A @ B, 1)
    assert lhs <= schatten_norm(A, 1) * schatten_norm(B, np.inf) * (1 + 1e-12)
    assert lhs <= schatten_norm(A, 2) * schatten_norm(B, 2) * (1 + 1e-12)


def test_schatten_rejects_non_finite():
    with pytest.raises(ValueError):
        schatten_norm(np.array([[np.nan]]), 1)


def test_metrics_identical_states():
    rho = random_density(np.random.default_rng(1), 4)
    td, F = state_metrics(rho, rho)
    assert td == pytest.approx(0.0, abs=1e-12)
    assert F == pytest.approx(1.0, abs=1e-8)


def test_metrics_orthogonal_states():
    td, F = state_metrics(projector(ket("0")), projector(ket("1")))
    assert (td, F) == pytest.approx((1.0, 0.0), abs=1e-14)


def test_fidelity_pure_pair_is_overlap():
    rng = np.random.default_rng(5)
    for _ in range(20):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        phi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        phi /= np.linalg.norm(phi)
        _, F = state_metrics(projector(psi), projector(phi))
        assert F == pytest.approx(abs(np.vdot(psi, phi)) ** 2, abs=1e-10)


def test_fidelity_mixed_uses_general_formula():
    rng = np.random.default_rng(9)
    rho, sigma = random_density(rng, 3), random_density(rng, 3)
    # for commuting (diagonal) states F = (sum sqrt(p_i q_i))^2
    p, q = np.array([0.5, 0.3, 0.2]), np.array([0.1, 0.6, 0.3])
    assert fidelity(np.diag(p), np.diag(q)) == pytest.approx(np.sum(np.sqrt(p * q)) ** 2, abs=1e-12)
    assert fidelity(rho, sigma) == pytest.approx(fidelity(sigma, rho), abs=1e-9)


def test_fvdg_holds_for_pure_argument():
    rng = np.random.default_rng(10)
    psi = projector(ket("+0"))
    for _ in range(20):
        td, F = state_metrics(psi, random_density(rng, 4))
        assert 1 - F <= td + 1e-12


def test_metrics_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        state_metrics(np.eye(2) / 2, np.eye(4) / 4)


def test_trace_distance_triangle_inequality():
    rng = np.random.default_rng(12)
    for _ in range(100):
        a, b, c = (random_density(rng, 3) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10


def test_time_ordered_constant_generator():
    H = random_hermitian(np.random.default_rng(2), 4)
    U = time_ordered_unitary(lambda t: H, 0.2, 1.7, 37)
    assert np.max(np.abs(U - matexp_hermitian(H, 1.5))) < 1e-12


def test_time_ordered_zero_duration():
    assert np.allclose(time_ordered_unitary(lambda t: X, 1.0, 1.0, 5), np.eye(2), atol=1e-15)


def test_time_ordered_richardson_limit_is_stable():
    H = lambda t: (1 - t) * X + t * Z
    U = {k: time_ordered_unitary(H, 0.0, 1.0, 2**k) for k in range(10, 16)}
    R = {k: (4 * U[k + 1] - U[k]) / 3 for k in range(10, 15)}
    for k in range(10, 14):
        assert schatten_norm(R[k + 1] - R[k], np.inf) < 1e-9
    # plain step doubling at acceptance settings
    assert schatten_norm(U[15] - U[14], np.inf) < 1e-8


def test_time_ordered_order_is_latest_leftmost():
    # piecewise generator: X on [0, 1/2), Z on [1/2, 1]
    H = lambda t: X if t < 0.5 else Z
    U = time_ordered_unitary(H, 0.0, 1.0, 2)
    assert np.allclose(U, matexp_hermitian(Z, 0.5) @ matexp_hermitian(X, 0.5), atol=1e-14)


def test_time_ordered_rejects_bad_input():
    with pytest.raises(ValueError):
        time_ordered_unitary(lambda t: X, 1.0, 0.0, 4)
    with pytest.raises(ValueError):
        time_ordered_unitary(lambda t: np.array([[0, 1], [0, 0]]), 0.0, 1.0, 4)


def test_state_metrics_raises_on_broken_fvdg(monkeypatch):
    import ctmc_compiler.quantum as q
    monkeypatch.setattr(q, "fidelity", lambda a, b: -1.0)
    with pytest.raises(NumericalError):
        q.state_metrics(projector(ket("0")), projector(ket("+")))


def test_is_unitary():
    assert is_unitary(matexp_hermitian(X + Z, 0.3))
    assert not is_unitary(np.diag([1.0, 0.5]))
