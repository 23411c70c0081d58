"""Matrix-free statevector kernel.

Basis index ``b`` encodes site ``i`` as bit ``i`` of ``b`` (little-endian).
Operations mutate ``state.amplitudes`` in place and return the same state.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels
from .pauli import CommutingGroup, PauliString, term_arrays

_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


class StateVector:
    """2**n_sites complex amplitudes of a pure state."""

    __slots__ = ("n_sites", "amplitudes")

    def __init__(self, n_sites: int, amplitudes: np.ndarray | None = None):
        self.n_sites = int(n_sites)
        dim = 1 << self.n_sites
        if amplitudes is None:
            amplitudes = np.zeros(dim, dtype=complex)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=complex)
            if amplitudes.shape != (dim,):
                raise ValueError(f"expected {dim} amplitudes, got shape {amplitudes.shape}")
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, n_sites: int, index: int = 0) -> StateVector:
        amps = np.zeros(1 << n_sites, dtype=complex)
        amps[index] = 1.0
        return cls(n_sites, amps)

    def copy(self) -> StateVector:
        return StateVector(self.n_sites, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def overlap(self, other: StateVector) -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        """``|<self|other>|``, i.e. equality up to a global phase when it is 1."""
        return abs(self.overlap(other))

    def __repr__(self):
        return f"StateVector(n_sites={self.n_sites}, norm_sq={self.norm_sq():.12g})"


@lru_cache(maxsize=512)
def _pauli_tables(n_sites: int, x_mask: int, z_mask: int, n_y: int):
    """Index map and phase so that ``(P psi)[c] = phase[c] * psi[perm[c]]``.

    ``P|b> = i**n_y * (-1)**popcount(b & z_mask) |b ^ x_mask>``.
    """
    idx = np.arange(1 << n_sites, dtype=np.int64)
    src = idx ^ x_mask
    parity = np.zeros(idx.shape, dtype=np.int64)
    bits = src & z_mask
    while z_mask:
        low = z_mask & -z_mask
        parity ^= (bits & low) != 0
        z_mask ^= low
    phase = (1.0 - 2.0 * parity) * _I_POW[n_y % 4]
    perm = None if x_mask == 0 else src
    if n_y % 2 == 0:
        phase = phase.real.copy()
    phase.setflags(write=False)
    if perm is not None:
        perm.setflags(write=False)
    return perm, phase


def pauli_tables(P: PauliString, n_sites: int):
    if P.max_site >= n_sites:
        raise ValueError(f"Pauli string {P} addresses a site beyond n_sites={n_sites}")
    return _pauli_tables(n_sites, *P.masks)


def pauli_action(P: PauliString, amps: np.ndarray, n_sites: int) -> np.ndarray:
    """Return ``P_hat @ amps`` (unit coefficient) as a new array."""
    perm, phase = pauli_tables(P, n_sites)
    if perm is None:
        return phase * amps
    return phase * amps[perm]


def apply_pauli_string(state: StateVector, P: PauliString) -> StateVector:
    """Apply the unit-coefficient operator of ``P``; its coefficient is ignored."""
    state.amplitudes[:] = pauli_action(P, state.amplitudes, state.n_sites)
    return state


def _rotate(amps: np.ndarray, n_sites: int, P: PauliString, angle: float) -> None:
    # exp(i*angle*P_hat) = cos(angle) + i sin(angle) P_hat, since P_hat**2 = I
    perm, phase = pauli_tables(P, n_sites)
    c, s = math.cos(angle), math.sin(angle)
    if perm is None:
        amps *= c + 1j * s * phase
    else:
        rotated = phase * amps[perm]
        amps *= c
        amps += (1j * s) * rotated


def apply_pauli_rotation(state: StateVector, P: PauliString, theta: float) -> StateVector:
    """Apply ``exp(+i * theta * coeff(P) * P_hat)``."""
    if not math.isfinite(theta):
        raise ValueError(f"rotation angle must be finite, got {theta}")
    _rotate(state.amplitudes, state.n_sites, P, theta * P.coefficient)
    return state


def group_diagonal(g: CommutingGroup, n_sites: int) -> np.ndarray:
    """Diagonal of ``H_g`` for a group made of Z-type strings only."""
    if not g.is_diagonal:
        raise ValueError(f"group {g.label!r} is not diagonal")
    cache = g.__dict__.setdefault("_diagonal_cache", {})
    diag = cache.get(n_sites)
    if diag is None:
        diag = np.zeros(1 << n_sites)
        for t in g.terms:
            _, phase = _pauli_tables(n_sites, *t.masks)
            diag += t.coefficient * phase.real
        diag.setflags(write=False)
        cache[n_sites] = diag
    return diag


def _check_group(g: CommutingGroup, n_sites: int) -> None:
    if any(t.max_site >= n_sites for t in g.terms):
        raise ValueError(f"group {g.label!r} addresses a site beyond n_sites={n_sites}")


def apply_group_evolution(state: StateVector, g: CommutingGroup, weight: float,
                          theta: float) -> StateVector:
    """Apply ``exp(i * theta * weight * H_g)`` exactly.

    The terms commute, so the evolution factorizes into one Pauli rotation
    per term, applied in ascending-site order. Diagonal groups collapse to
    a single phase multiply.
    """
    if not math.isfinite(theta) or not math.isfinite(weight):
        raise ValueError("evolution time and weight must be finite")
    _check_group(g, state.n_sites)
    evolve_group(state.amplitudes, g, theta * weight, state.n_sites)
    return state


def evolve_group(amps: np.ndarray, g: CommutingGroup, scale: float, n_sites: int) -> None:
    """Unchecked in-place ``exp(i * scale * H_g)`` on a raw amplitude array."""
    if scale == 0.0:
        return
    if g.is_diagonal:
        _kernels.diagonal_phase(amps, group_diagonal(g, n_sites), scale)
    else:
        _kernels.rotate_terms(amps, *g.arrays, scale)


def apply_terms(terms: Sequence[PauliString] | tuple, amps: np.ndarray, n_sites: int,
                out: np.ndarray | None = None) -> np.ndarray:
    """``sum_t coeff(t) * t_hat @ amps``.

    ``terms`` is either a sequence of Pauli strings or the array tuple from
    :func:`~deltavqe.pauli.term_arrays`.
    """
    if not (isinstance(terms, tuple) and len(terms) == 4 and isinstance(terms[0], np.ndarray)):
        terms = list(terms)
        if any(t.max_site >= n_sites for t in terms):
            raise ValueError(f"term addresses a site beyond n_sites={n_sites}")
        terms = term_arrays(terms)
    amps = np.ascontiguousarray(amps, dtype=complex)
    if out is None:
        out = np.empty_like(amps)
    _kernels.apply_terms(amps, *terms, out)
    return out


def expectation(state: StateVector, terms: Sequence[PauliString]) -> float:
    """``sum_t coeff(t) <psi|t_hat|psi>``, discarding the (vanishing) imaginary part."""
    amps = state.amplitudes
    total = 0.0
    for t in terms:
        if t.coefficient == 0.0:
            continue
        val = np.vdot(amps, pauli_action(t, amps, state.n_sites))
        if abs(val.imag) > 1e-12:
            raise ArithmeticError(f"<{t}> has imaginary part {val.imag:.3e}; operator not Hermitian?")
        total += t.coefficient * val.real
    return float(total)


def _check_site(state: StateVector, site: int) -> None:
    if not 0 <= site < state.n_sites:
        raise ValueError(f"site {site} out of range for {state.n_sites} sites")


def apply_hadamard(state: StateVector, site: int) -> StateVector:
    _check_site(state, site)
    a = state.amplitudes.reshape(-1, 2, 1 << site)
    lo, hi = a[:, 0, :].copy(), a[:, 1, :].copy()
    r = 1.0 / math.sqrt(2.0)
    a[:, 0, :] = r * (lo + hi)
    a[:, 1, :] = r * (lo - hi)
    return state


def apply_cz(state: StateVector, site_a: int, site_b: int) -> StateVector:
    _check_site(state, site_a)
    _check_site(state, site_b)
    if site_a == site_b:
        raise ValueError(f"CZ needs two distinct sites, got {site_a} twice")
    idx = np.arange(state.amplitudes.size)
    both = ((idx >> site_a) & 1) & ((idx >> site_b) & 1)
    state.amplitudes[both.astype(bool)] *= -1.0
    return state
