"""Truncated Fock-space model of the atom plus bath, used as an independent oracle.

Basis: atom (e, b) tensored with each mode's number states 0..nmax.
"""

import numpy as np
from scipy.integrate import solve_ivp

SIGMA = np.array([[0, 0], [1, 0]], dtype=complex)


def _kron_all(ops):
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def annihilation(nmax):
    return np.diag(np.sqrt(np.arange(1, nmax + 1)), 1).astype(complex)


def mode_op(op, k, K, nmax):
    eye = np.eye(nmax + 1, dtype=complex)
    return _kron_all([np.eye(2)] + [op if j == k else eye for j in range(K)])


def atom_op(op, K, nmax):
    return _kron_all([op] + [np.eye(nmax + 1)] * K)


def interaction(g, omega, t, nmax=2, t0=0.0):
    """``V(t) = i sum_k (g_k^* e^{i W tau} sigma a_k^dag - g_k e^{-i W tau} sigma^dag a_k)``."""
    K = len(g)
    a = annihilation(nmax)
    s = atom_op(SIGMA, K, nmax)
    V = 0
    for k in range(K):
        ph = np.exp(-1j * omega[k] * (t - t0))
        ak = mode_op(a, k, K, nmax)
        V = V + 1j * (np.conj(g[k] * ph) * s @ ak.conj().T - g[k] * ph * s.conj().T @ ak)
    return V


def position(k, K, nmax):
    a = annihilation(nmax)
    return mode_op((a + a.conj().T) / np.sqrt(2), k, K, nmax)


def embed(amp_e, amp_b, K, nmax):
    """System state times bath vacuum."""
    vac = np.zeros((nmax + 1) ** K, dtype=complex)
    vac[0] = 1
    return np.kron(np.array([amp_e, amp_b], dtype=complex), vac)


def sector_amplitudes(psi, K, nmax):
    """(c_e0, c_b0, c_b1[K]) read off a full state vector."""
    d = (nmax + 1) ** K
    e, b = psi[:d], psi[d:]
    idx = [(nmax + 1) ** (K - 1 - k) for k in range(K)]
    return e[0], b[0], np.array([b[i] for i in idx])


def evolve(g, omega, amp_e, amp_b, times, nmax=2, t0=0.0):
    K = len(g)
    y0 = embed(amp_e, amp_b, K, nmax)
    sol = solve_ivp(
        lambda t, y: -1j * interaction(g, omega, t, nmax, t0) @ y,
        (t0, times[-1]), y0, t_eval=times, rtol=1e-12, atol=1e-13, method="DOP853",
    )
    return sol.y.T
