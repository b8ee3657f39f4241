"""Dequantization, quantization and the symplectic Fourier transform.

Conventions (hbar = 1, phase space R^2):

* dequantization   chi(z) = tr(U(z)^* rho)
* quantization     Q f   = int f(z) U(z) dq dp / (2 pi)
* symplectic FT    (F_s f)(z) = (2 pi)^-1 int f(z') exp(i omega(z, z')) dz'
* Wigner function  W = (2 pi)^-1 F_s chi, which integrates to tr(rho)

With the Haar weight dq dp / (2 pi), Q is the adjoint of dequantization and
the squared L2 norm of chi equals the purity tr(rho^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.signal import czt

from .errors import DimensionMismatch, GridTooCoarse, NotHermitian
from .fock import FockOperator, amplitude, band_phases, displacement_radial, from_bands, to_bands
from .phase import OPERAND_DECAY_TOL, ComplexField, PhaseGrid, grid_integral


_BATCH = 512


@dataclass(frozen=True)
class CharFunction(ComplexField):
    """Quantum characteristic function sampled on a grid."""

    source_dim: int = 0

    side: ClassVar[str] = "char"


@dataclass(frozen=True)
class WignerField(ComplexField):
    side: ClassVar[str] = "wigner"


def _chunks(size: int):
    for start in range(0, size, _BATCH):
        yield slice(start, min(start + _BATCH, size))


def _real_contract(T: np.ndarray, R: np.ndarray) -> np.ndarray:
    """``out[b, k] = sum_n T[b, n, k] R[n, k]`` for real T and complex R."""
    return np.einsum("bnk,nk->bk", T, R.real) + 1j * np.einsum("bnk,nk->bk", T, R.imag)


def _unique_radii(alpha: np.ndarray):
    """Distinct |alpha| values and the inverse map; the radial factor depends on |alpha| only."""
    return np.unique(np.abs(alpha), return_inverse=True)


def char_at(rho: FockOperator, q, p) -> np.ndarray:
    """Evaluate tr(U(z)^* rho) at arbitrary points (array-broadcast)."""
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    shape = q.shape
    # U(z)^* = D(-alpha)
    alpha = -amplitude(q.ravel(), p.ravel())
    N = rho.dim
    # tr(D rho) = sum D[n+k, n] rho[n, n+k] + sum_{k>0} D[n, n+k] rho[n+k, n]
    rho_lower, rho_upper = to_bands(rho.matrix)
    radii, inverse = _unique_radii(alpha)
    a = np.empty((radii.size, N), dtype=complex)
    b = np.empty((radii.size, N), dtype=complex)
    for sl in _chunks(radii.size):
        T = displacement_radial(radii[sl], N)
        a[sl] = _real_contract(T, rho_upper)
        b[sl] = _real_contract(T, rho_lower)
    out = np.empty(alpha.size, dtype=complex)
    for sl in _chunks(alpha.size):
        lower, upper = band_phases(alpha[sl], N)
        out[sl] = np.sum(lower * a[inverse[sl]] + upper * b[inverse[sl]], axis=1)
    return out.reshape(shape)


def char_function(rho: FockOperator):
    """Return a callable ``chi(q, p)`` evaluating the characteristic function of ``rho``."""

    def chi(q, p):
        return char_at(rho, q, p)

    return chi


def dequantize(rho: FockOperator, grid: PhaseGrid) -> CharFunction:
    """Sample chi(z) = tr(U(z)^* rho) on every grid node."""
    Q, P = grid.mesh()
    f = CharFunction(grid, char_at(rho, Q, P), source_dim=rho.dim)
    f.check_decay(OPERAND_DECAY_TOL, what="characteristic function")
    return f


def quantize(f: ComplexField, N: int) -> FockOperator:
    """Q f = h^2/(2 pi) sum_z f(z) U(z), truncated to dimension N."""
    if N < 2:
        raise DimensionMismatch(f"Fock dimension must be >= 2, got {N}")
    f.check_decay(OPERAND_DECAY_TOL, what="quantized field")
    Q, P = f.grid.mesh()
    vals = f.values.ravel()
    keep = vals != 0
    alpha = amplitude(Q.ravel()[keep], P.ravel()[keep])
    vals = vals[keep]
    radii, inverse = _unique_radii(alpha)
    # phase-weighted values summed per radius, then one radial contraction per radius
    lower_w = np.zeros((radii.size, N), dtype=complex)
    upper_w = np.zeros((radii.size, N), dtype=complex)
    for sl in _chunks(alpha.size):
        lower, upper = band_phases(alpha[sl], N)
        np.add.at(lower_w, inverse[sl], vals[sl, None] * lower)
        np.add.at(upper_w, inverse[sl], vals[sl, None] * upper)
    lower_acc = np.zeros((N, N), dtype=complex)
    upper_acc = np.zeros((N, N), dtype=complex)
    for sl in _chunks(radii.size):
        T = displacement_radial(radii[sl], N)
        for acc, w in ((lower_acc, lower_w[sl]), (upper_acc, upper_w[sl])):
            acc += np.einsum("bk,bnk->nk", w.real, T) + 1j * np.einsum("bk,bnk->nk", w.imag, T)
    acc = from_bands(lower_acc, upper_acc)
    h = f.grid.spacing
    return FockOperator(acc * (h * h / (2 * math.pi)))


# ---------------------------------------------------------------------------
# Symplectic Fourier transform


def _check_aliasing(grid: PhaseGrid):
    if not grid.satisfies_aliasing_bound:
        raise GridTooCoarse(
            f"spacing {grid.spacing:g} exceeds pi/L = {math.pi / grid.half_extent:g}; "
            f"use at least {math.ceil(2 * grid.half_extent**2 / math.pi)} points"
        )


def _axis_transform(values: np.ndarray, grid: PhaseGrid, sign: int, axis: int) -> np.ndarray:
    """sum_n x[n] exp(sign * i * u_j * u_n) along ``axis``, u the grid axis, via chirp-z.

    With u_j = (j - c) h the kernel factors as
    exp(s i h^2 j n) * exp(-s i h^2 c j) * exp(-s i h^2 c n) * exp(s i h^2 c^2).
    """
    M = grid.points
    c = grid.origin_index
    h2 = grid.spacing**2
    idx = np.arange(M)
    shape = [1, 1]
    shape[axis] = M
    pre = np.exp(-sign * 1j * h2 * c * idx).reshape(shape)
    post = (np.exp(-sign * 1j * h2 * c * idx) * np.exp(sign * 1j * h2 * c * c)).reshape(shape)
    out = czt(values * pre, m=M, w=np.exp(sign * 1j * h2), a=1.0, axis=axis)
    return out * post


def symplectic_fourier(f: ComplexField, method: str = "fast") -> ComplexField:
    """(F_s f)(q, p) = (2 pi)^-1 int f(q', p') exp(i(q p' - p q')) dq' dp'.

    ``method="fast"`` runs chirp-z transforms along both axes;
    ``method="direct"`` evaluates the same quadrature with dense kernel
    matrices and serves as the reference path.
    """
    grid = f.grid
    _check_aliasing(grid)
    h = grid.spacing
    scale = h * h / (2 * math.pi)
    v = f.values
    if method == "fast":
        # sum over p' with exp(+i q p'), then over q' with exp(-i p q')
        inner = _axis_transform(v, grid, +1, axis=1)  # [j', j]: indexed by q', output q
        out = _axis_transform(inner, grid, -1, axis=0)  # [k, j]: output p, output q
        out = out.T
    elif method == "direct":
        u = grid.axis
        k_plus = np.exp(1j * np.outer(u, u))
        k_minus = np.exp(-1j * np.outer(u, u))
        out = (k_minus @ (v @ k_plus.T)).T
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComplexField(grid, scale * out)


def wigner_from_state(rho: FockOperator, grid: PhaseGrid, method: str = "fast") -> WignerField:
    """Wigner function W = (2 pi)^-1 F_s chi of an operator."""
    chi = dequantize(rho, grid)
    w = symplectic_fourier(chi, method=method)
    return WignerField(grid, w.values / (2 * math.pi))


def weyl_symbol(A: FockOperator, grid: PhaseGrid) -> ComplexField:
    """Weyl symbol a(z) = 2 pi W_A(z), so that tr(A rho) = int a W_rho dq dp."""
    with warnings.catch_warnings():
        # truncated observables are not phase-space localized
        warnings.simplefilter("ignore")
        w = wigner_from_state(A, grid)
    return ComplexField(grid, 2 * math.pi * w.values)


def expectation(A: FockOperator, rho: FockOperator, grid: PhaseGrid) -> complex:
    """<A>_rho as the phase-space integral of the Weyl symbol against the Wigner function."""
    m = A.matrix
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(np.max(np.abs(m)), 1.0):
        raise NotHermitian("observable must be Hermitian")
    symbol = weyl_symbol(A, grid)
    w = wigner_from_state(rho, grid)
    return grid_integral(ComplexField(grid, symbol.values * w.values), "lebesgue")
