"""Convolution algebras on sampled phase-space fields.

The quantum algebra is L2(R^2) with the twisted convolution

    (f # g)(z) = (2 pi)^-1 int f(z') g(z - z') exp(i omega(z, z') / 2) dz'

and involution f*(z) = conj f(-z); dequantization maps operator products to
twisted convolutions. The classical algebra is L1(R^2) with the ordinary
convolution against plain Lebesgue measure.

On a centered grid the difference of two nodes is again a node (or falls
off the grid, where the operand is taken to vanish), so no interpolation is
needed for either convolution.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from .phase import OPERAND_DECAY_TOL, ComplexField, grid_integral

AlgebraElement = ComplexField


def _shifted_rows(g: np.ndarray, c: int) -> np.ndarray:
    """``out[j, j', :] = g[j - j' + c, :]``, zero where the row index leaves the grid."""
    M = g.shape[0]
    j = np.arange(M)
    src = j[:, None] - j[None, :] + c
    valid = (src >= 0) & (src < M)
    out = g[np.clip(src, 0, M - 1)]
    out[~valid] = 0
    return out


def _prepare(f: ComplexField, g: ComplexField):
    f.grid.check_same(g.grid)
    f.check_decay(OPERAND_DECAY_TOL, what="left operand")
    g.check_decay(OPERAND_DECAY_TOL, what="right operand")
    grid = f.grid
    return grid, grid.axis, grid.origin_index


def twisted_convolve(
    f: ComplexField, g: ComplexField, method: str = "fast", multiplier_sign: int = 1
) -> ComplexField:
    """Twisted convolution f # g sampled on the common grid.

    ``method="direct"`` is the O(M^4) reference sum; ``method="fast"`` splits
    the multiplier as exp(i q p'/2) exp(-i p q'/2) and evaluates the
    remaining ordinary convolution along p with FFTs (O(M^3 log M)).
    ``multiplier_sign=-1`` conjugates the multiplier; it exists only to
    demonstrate that the consistency checks catch a sign error.
    """
    grid, u, c = _prepare(f, g)
    M = grid.points
    s = 0.5j * multiplier_sign
    # left[j, j', k'] = f[j', k'] exp(i q_j p_k' / 2)
    left = f.values[None, :, :] * np.exp(s * u[:, None, None] * u[None, None, :])
    right = _shifted_rows(g.values, c)  # [j, j', s] = g[j - j' + c, s]
    # right modulation exp(-i p_k q_j' / 2), indexed [k, j']
    mod = np.exp(-s * np.outer(u, u))

    if method == "fast":
        full = fftconvolve(left, right, axes=2, mode="full")
        conv = full[:, :, c : c + M]  # [j, j', k]
        out = np.einsum("jak,ka->jk", conv, mod)
    elif method == "direct":
        k = np.arange(M)
        src = k[:, None] - k[None, :] + c  # [k, k']
        valid = (src >= 0) & (src < M)
        src = np.clip(src, 0, M - 1)
        out = np.empty((M, M), dtype=complex)
        for j in range(M):
            shifted = right[j][:, src] * valid  # [j', k, k']
            out[j] = np.einsum("ac,ka,akc->k", left[j], mod, shifted)
    else:
        raise ValueError(f"unknown method {method!r}")
    h = grid.spacing
    return ComplexField(grid, out * (h * h / (2 * math.pi)))


def involution_quantum(f: ComplexField) -> ComplexField:
    """f*(q, p) = conj f(-q, -p); the unmatched row/column at -L maps to itself."""
    M = f.grid.points
    idx = (-np.arange(M)) % M
    return ComplexField(f.grid, np.conj(f.values[np.ix_(idx, idx)]))


def involution_classical(f: ComplexField) -> ComplexField:
    """Group-algebra involution with trivial modular function: same formula as the quantum one."""
    return involution_quantum(f)


def classical_convolve(f: ComplexField, g: ComplexField, method: str = "fast") -> ComplexField:
    """(f * g)(z) = int f(z') g(z - z') dq' dp' (Lebesgue weight)."""
    grid, _, c = _prepare(f, g)
    M = grid.points
    if method == "fast":
        full = fftconvolve(f.values, g.values, mode="full")
        out = full[c : c + M, c : c + M]
    elif method == "direct":
        right = _shifted_rows(g.values, c)  # [j, j', s]
        k = np.arange(M)
        src = k[:, None] - k[None, :] + c
        valid = (src >= 0) & (src < M)
        src = np.clip(src, 0, M - 1)
        out = np.empty((M, M), dtype=complex)
        for j in range(M):
            out[j] = np.einsum("ac,akc->k", f.values, right[j][:, src] * valid)
    else:
        raise ValueError(f"unknown method {method!r}")
    h = grid.spacing
    return ComplexField(grid, out * (h * h))


def pairing(phi: ComplexField, chi: ComplexField) -> complex:
    """<phi, chi> = int phi(z) chi(z) dq dp."""
    phi.grid.check_same(chi.grid)
    return grid_integral(ComplexField(phi.grid, phi.values * chi.values), "lebesgue")
