"""Compiled inner loops for Pauli-string actions on amplitude arrays.

A term list is encoded as parallel arrays ``(x_masks, z_masks, n_ys, coeffs)``
with ``P|b> = i**n_y * (-1)**popcount(b & z_mask) |b ^ x_mask>``.
"""

import numpy as np
from numba import njit

_CACHE = True


@njit(cache=_CACHE, inline="always")
def _parity(x):
    p = 0
    while x:
        x &= x - 1
        p ^= 1
    return p


@njit(cache=_CACHE, inline="always")
def _phase(b, z_mask, n_y):
    # i**n_y * (-1)**popcount(b & z_mask)
    k = (n_y + 2 * _parity(b & z_mask)) & 3
    if k == 0:
        return 1.0 + 0.0j
    if k == 1:
        return 1.0j
    if k == 2:
        return -1.0 + 0.0j
    return -1.0j


@njit(cache=_CACHE)
def rotate_terms(amps, x_masks, z_masks, n_ys, coeffs, scale):
    """In place: for each term t, ``amps <- exp(i * scale * coeff_t * P_t) amps``."""
    dim = amps.shape[0]
    for t in range(x_masks.shape[0]):
        angle = scale * coeffs[t]
        if angle == 0.0:
            continue
        c = np.cos(angle)
        s = np.sin(angle)
        xm = x_masks[t]
        zm = z_masks[t]
        ny = n_ys[t]
        if xm == 0:
            for b in range(dim):
                if _parity(b & zm):
                    amps[b] *= complex(c, -s)
                else:
                    amps[b] *= complex(c, s)
        else:
            for b in range(dim):
                bp = b ^ xm
                if bp < b:
                    continue
                a_b = amps[b]
                a_bp = amps[bp]
                amps[b] = c * a_b + 1j * s * _phase(bp, zm, ny) * a_bp
                amps[bp] = c * a_bp + 1j * s * _phase(b, zm, ny) * a_b


@njit(cache=_CACHE)
def apply_terms(amps, x_masks, z_masks, n_ys, coeffs, out):
    """``out <- sum_t coeff_t P_t amps``."""
    dim = amps.shape[0]
    for b in range(dim):
        out[b] = 0.0
    for t in range(x_masks.shape[0]):
        w = coeffs[t]
        if w == 0.0:
            continue
        xm = x_masks[t]
        zm = z_masks[t]
        ny = n_ys[t]
        for c in range(dim):
            src = c ^ xm
            out[c] += w * _phase(src, zm, ny) * amps[src]


@njit(cache=_CACHE)
def diagonal_phase(amps, diag, scale):
    """``amps <- exp(i * scale * diag) * amps``."""
    for b in range(amps.shape[0]):
        a = scale * diag[b]
        amps[b] *= complex(np.cos(a), np.sin(a))
