"""Reference computations that share no code path with the package."""
import math

import numpy as np

_SINGLE = {
    "I": [[1, 0], [0, 1]],
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
}


def pauli_elementwise(terms, n):
    """<b|P|b'> = prod_q sigma_q[b_q, b'_q], one matrix element at a time."""
    d = 2**n
    H = np.zeros((d, d), dtype=complex)
    for coeff, word in terms:
        for r in range(d):
            for c in range(d):
                val = 1.0 + 0j
                for q, letter in enumerate(word):
                    shift = n - 1 - q
                    val *= _SINGLE[letter][(r >> shift) & 1][(c >> shift) & 1]
                    if val == 0:
                        break
                H[r, c] += coeff * val
    return H


def taylor_expm(A, terms=40):
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def _jacobi_singular_values(A, sweeps=60):
    """One-sided (Hestenes) Jacobi SVD of a real matrix; returns singular values."""
    U = np.array(A, dtype=float)
    n = U.shape[1]
    for _ in range(sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = U[:, i] @ U[:, i]
                b = U[:, j] @ U[:, j]
                g = U[:, i] @ U[:, j]
                if abs(g) <= 1e-15 * math.sqrt(a * b) or g == 0:
                    continue
                rotated = True
                zeta = (b - a) / (2 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                cs = 1 / math.sqrt(1 + t * t)
                sn = cs * t
                ui = U[:, i].copy()
                U[:, i] = cs * ui - sn * U[:, j]
                U[:, j] = sn * ui + cs * U[:, j]
        if not rotated:
            break
    return np.sort(np.sqrt(np.sum(U * U, axis=0)))[::-1]


def jacobi_singular_values(M):
    """Complex M via its real embedding [[Re, -Im], [Im, Re]] (values appear twice)."""
    M = np.asarray(M, dtype=complex)
    R = np.block([[M.real, -M.imag], [M.imag, M.real]])
    s = _jacobi_singular_values(R)
    return s[::2]


def eig2x2_hermitian(M):
    a, b, d = M[0, 0].real, M[0, 1], M[1, 1].real
    mean = (a + d) / 2
    rad = math.sqrt(((a - d) / 2) ** 2 + abs(b) ** 2)
    return mean - rad, mean + rad


def rk4_occupancy(schedule, lam, p0, T, n):
    """Integrate dp/dt = a(t) - lam p with a = w' + lam w."""
    def f(t, p):
        return schedule.derivative(t) + lam * schedule.value(t) - lam * p

    p = np.array(p0, dtype=float)
    h = T / n
    t = 0.0
    for _ in range(n):
        k1 = f(t, p)
        k2 = f(t + h / 2, p + h / 2 * k1)
        k3 = f(t + h / 2, p + h / 2 * k2)
        k4 = f(t + h, p + h * k3)
        p = p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return p


def sequential_propagation(hamiltonians, segments, psi):
    """Apply exp(-i H_k tau) one segment at a time via Taylor series."""
    for k, tau in segments:
        psi = taylor_expm(-1j * np.asarray(hamiltonians[k]) * tau, 60) @ psi
    return psi


def random_hermitian(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (A + A.conj().T) / 2


def random_density(rng, d, rank=None):
    rank = rank or d
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real
