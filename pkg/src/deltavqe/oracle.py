"""Exact ground-state energies and gaps used as the trusted baseline.

Dense diagonalization builds the matrix from Kronecker products, sharing no
code with the statevector kernel. Above ``DENSE_MAX_SITES`` a matrix-free
Lanczos iteration drives the kernel's Pauli action instead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse.linalg as spla

from .pauli import GroupedHamiltonian, PauliString, hamiltonian_at
from .statevec import apply_terms

MAX_SITES = 16
DENSE_MAX_SITES = 10

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class Method(enum.Enum):
    DENSE = "dense"
    LANCZOS = "lanczos"


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    residual_norm: float
    method: Method


class LanczosError(RuntimeError):
    pass


def pauli_matrix(P: PauliString, n_sites: int, coefficient: bool = True) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix; site 0 is the rightmost Kronecker factor."""
    axes = dict(P.factors)
    mats = [_PAULI[axes.get(s, "I")] for s in reversed(range(n_sites))]
    m = reduce(np.kron, mats)
    return P.coefficient * m if coefficient else m


def dense_matrix(terms, n_sites: int) -> np.ndarray:
    dim = 1 << n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        out += pauli_matrix(t, n_sites)
    return out


def _guard(H: GroupedHamiltonian):
    if H.n_sites > MAX_SITES:
        raise ValueError(f"exact diagonalization limited to {MAX_SITES} sites, got {H.n_sites}")


def lanczos_ground(matvec, dim: int, *, krylov_dim: int = 200, tol: float = 1e-10,
                   max_restarts: int = 20, seed: int = 1234) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of a Hermitian operator by Lanczos with full reorthogonalization.

    Restarts explicitly from the current Ritz vector when the Krylov space
    is exhausted without meeting ``tol`` on the residual norm.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    m = min(krylov_dim, dim)
    for _ in range(max_restarts + 1):
        V = np.zeros((m, dim), dtype=complex)
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[0] = v
        ritz_val, ritz_vec = None, v
        for j in range(m):
            w = matvec(V[j])
            alpha[j] = np.vdot(V[j], w).real
            # full reorthogonalization, twice for stability
            for _ in range(2):
                w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
            b = np.linalg.norm(w)
            T_vals, T_vecs = np.linalg.eigh(np.diag(alpha[: j + 1]) + np.diag(beta[:j], 1)
                                            + np.diag(beta[:j], -1))
            ritz_val = T_vals[0]
            residual = abs(b * T_vecs[j, 0])
            if residual < tol * max(1.0, abs(ritz_val)) or b < 1e-14 or j == m - 1:
                ritz_vec = T_vecs[:, 0] @ V[: j + 1]
                ritz_vec /= np.linalg.norm(ritz_vec)
                break
            beta[j] = b
            V[j + 1] = w / b
        true_res = np.linalg.norm(matvec(ritz_vec) - ritz_val * ritz_vec)
        if true_res < tol * max(1.0, abs(ritz_val)) or m == dim:
            return float(ritz_val), ritz_vec
        v = ritz_vec
    raise LanczosError(f"Lanczos did not reach residual {tol:g} after {max_restarts} restarts")


def matrix_free_operator(H: GroupedHamiltonian, h: float):
    terms = hamiltonian_at(H, h)
    n = H.n_sites
    return lambda v: apply_terms(terms, np.asarray(v, dtype=complex), n)


def ground_energy(H: GroupedHamiltonian, h: float, method: Method | str | None = None) -> GroundStateResult:
    """Lowest eigenvalue of ``H(h)``; dense up to 10 sites, Lanczos above."""
    _guard(H)
    n = H.n_sites
    if method is None:
        method = Method.DENSE if n <= DENSE_MAX_SITES else Method.LANCZOS
    method = Method(method)
    terms = hamiltonian_at(H, h)
    if method is Method.DENSE:
        M = dense_matrix(terms, n)
        vals, vecs = np.linalg.eigh(M)
        e, v = vals[0], vecs[:, 0]
        res = np.linalg.norm(M @ v - e * v)
    else:
        matvec = matrix_free_operator(H, h)
        e, v = lanczos_ground(matvec, 1 << n)
        res = np.linalg.norm(matvec(v) - e * v)
    return GroundStateResult(float(e), float(res), method)


def lowest_levels(H: GroupedHamiltonian, h: float, k: int = 2) -> np.ndarray:
    """The ``k`` lowest eigenvalues, degeneracies counted."""
    _guard(H)
    n = H.n_sites
    terms = hamiltonian_at(H, h)
    if n <= DENSE_MAX_SITES:
        return np.linalg.eigvalsh(dense_matrix(terms, n))[:k]
    dim = 1 << n
    op = spla.LinearOperator((dim, dim), matvec=matrix_free_operator(H, h), dtype=complex)
    v0 = np.random.default_rng(1234).standard_normal(dim).astype(complex)
    vals = spla.eigsh(op, k=k, which="SA", v0=v0, tol=1e-12, return_eigenvectors=False)
    return np.sort(vals.real)


def gap(H: GroupedHamiltonian, h: float) -> float:
    e0, e1 = lowest_levels(H, h, 2)
    return max(0.0, float(e1 - e0))
