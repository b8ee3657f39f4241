"""Truncated Fock-space operator algebra.

Operators are dense ``N x N`` complex matrices on span{|0>, ..., |N-1>}.
The Weyl system is U(q, p) = exp(i(p q^ - q p^)) = D(alpha) with
alpha = (q + i p) / sqrt(2); its matrix elements are evaluated from the
associated-Laguerre closed form, which is exact for the truncated block
irrespective of |alpha| (only products of truncated matrices suffer from the
cut-off).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import (
    CertificationError,
    DimensionMismatch,
    InvalidDimension,
    NotHermitian,
    TruncationError,
    TruncationWarning,
)
from .phase import PhasePoint

DEFAULT_PSD_TOL = 1e-9
DEFAULT_TRACE_TOL = 1e-8


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimension(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] < 2:
            raise InvalidDimension("Fock dimension must be at least 2")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: FockOperator) -> FockOperator:
        return op_product(self, other)

    def __add__(self, other: FockOperator) -> FockOperator:
        _check_dims(self, other)
        return FockOperator(self.matrix + other.matrix)

    def __sub__(self, other: FockOperator) -> FockOperator:
        _check_dims(self, other)
        return FockOperator(self.matrix - other.matrix)

    def __mul__(self, scalar) -> FockOperator:
        return FockOperator(self.matrix * scalar)

    __rmul__ = __mul__

    def block(self, size: int | None = None) -> np.ndarray:
        """Leading ``size x size`` block (default N/2), where truncation error is small."""
        size = self.dim // 2 if size is None else size
        return self.matrix[:size, :size]


@dataclass(frozen=True)
class DensityState(FockOperator):
    """A certified density matrix: Hermitian, PSD and unit trace within tolerance."""

    trace_tol: float = DEFAULT_TRACE_TOL
    psd_tol: float = DEFAULT_PSD_TOL

    def __post_init__(self):
        super().__post_init__()
        m = self.matrix
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > self.psd_tol:
            raise CertificationError(f"not Hermitian: defect {defect:.3g} > {self.psd_tol:g}")
        eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if eig[0] < -self.psd_tol * max(eig[-1], 0.0):
            raise CertificationError(f"not PSD: min eigenvalue {eig[0]:.3g}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > self.trace_tol:
            raise CertificationError(f"trace {tr!r} deviates from 1 by more than {self.trace_tol:g}")


def certify(op, trace_tol: float = DEFAULT_TRACE_TOL, psd_tol: float = DEFAULT_PSD_TOL) -> DensityState:
    m = op.matrix if isinstance(op, FockOperator) else op
    return DensityState(m, trace_tol=trace_tol, psd_tol=psd_tol)


def _check_dims(*ops: FockOperator):
    dims = {o.dim for o in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"operator dimensions differ: {sorted(dims)}")


def _check_dim(N: int):
    if N < 2:
        raise InvalidDimension(f"Fock dimension must be >= 2, got {N}")


# ---------------------------------------------------------------------------
# Ladder and quadrature operators


def ladder_matrices(N: int) -> tuple[FockOperator, FockOperator]:
    """Annihilation ``a`` (``a[m, n] = sqrt(n) delta_{m, n-1}``) and creation ``a^dagger``."""
    _check_dim(N)
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1).astype(complex)
    return FockOperator(a), FockOperator(a.conj().T)


def quadratures(N: int) -> tuple[FockOperator, FockOperator]:
    """Position and momentum ``q^ = (a + a^dag)/sqrt 2``, ``p^ = (a - a^dag)/(i sqrt 2)``."""
    a, ad = ladder_matrices(N)
    q = (a.matrix + ad.matrix) / math.sqrt(2)
    p = (a.matrix - ad.matrix) / (1j * math.sqrt(2))
    return FockOperator(q), FockOperator(p)


def number_operator(N: int) -> FockOperator:
    _check_dim(N)
    return FockOperator(np.diag(np.arange(N, dtype=complex)))


def identity(N: int) -> FockOperator:
    _check_dim(N)
    return FockOperator(np.eye(N, dtype=complex))


# ---------------------------------------------------------------------------
# Displacement operators


def amplitude(q, p):
    """Coherent amplitude alpha = (q + i p) / sqrt 2 of the phase-space point (q, p)."""
    return (np.asarray(q) + 1j * np.asarray(p)) / math.sqrt(2)


def _laguerre_table(x: np.ndarray, N: int, rows: int | None = None) -> np.ndarray:
    """``out[b, n, k] = L_n^{(k)}(x[b])`` for ``0 <= n < rows``, ``0 <= k < N``, by upward recurrence in n."""
    rows = N if rows is None else rows
    k = np.arange(N, dtype=float)[None, :]
    x = x[:, None]
    out = np.empty((x.shape[0], rows, N))
    out[:, 0, :] = 1.0
    if rows > 1:
        out[:, 1, :] = 1.0 + k - x
    for n in range(1, rows - 1):
        out[:, n + 1, :] = ((2 * n + 1 + k - x) * out[:, n, :] - (n + k) * out[:, n - 1, :]) / (n + 1)
    return out


def displacement_radial(alpha, N: int, rows: int | None = None) -> np.ndarray:
    """Phase-free part of the displacement matrix elements.

    Returns ``T[b, n, k] = sqrt(n!/(n+k)!) |alpha|^k exp(-|alpha|^2/2) L_n^(k)(|alpha|^2)``
    for ``n + k < N`` (zero elsewhere) and ``n < rows``, so that for ``k >= 0``::

        <n+k|D(alpha)|n> = T[n, k] exp(i k arg alpha)
        <n|D(alpha)|n+k> = T[n, k] (-1)^k exp(-i k arg alpha)
    """
    _check_dim(N)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    r = np.abs(alpha)
    x = r * r
    rows = N if rows is None else rows
    lag = _laguerre_table(x, N, rows)
    n = np.arange(rows)[:, None]
    k = np.arange(N)[None, :]
    inside = n + k < N
    log_fact = gammaln(np.arange(2 * N) + 1.0)
    norm = np.where(inside, np.exp(0.5 * (log_fact[n] - log_fact[n + k])), 0.0)
    r_pow = r[:, None] ** np.arange(N)[None, :]
    return lag * norm[None] * (r_pow * np.exp(-0.5 * x)[:, None])[:, None, :]


def band_phases(alpha, N: int) -> tuple[np.ndarray, np.ndarray]:
    """``(e^{i k arg alpha}, (-1)^k e^{-i k arg alpha})`` for ``0 <= k < N``, shape ``(B, N)``."""
    phi = np.angle(np.atleast_1d(np.asarray(alpha, dtype=complex)))
    k = np.arange(N)
    lower = np.exp(1j * k[None, :] * phi[:, None])
    upper = ((-1.0) ** k)[None, :] * lower.conj()
    return lower, upper


def _band_coords(N: int):
    n = np.arange(N)[:, None]
    k = np.arange(N)[None, :]
    valid = n + k < N
    rows = np.where(valid, n + k, 0)
    cols = np.where(valid, n, 0)
    return rows, cols, valid


def to_bands(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a matrix into ``(lower[n, k] = A[n+k, n], upper[n, k] = A[n, n+k])``.

    Entries with ``n + k >= N`` are zero; the main diagonal lives in
    ``lower[:, 0]`` only (``upper[:, 0]`` is zero).
    """
    N = matrix.shape[0]
    rows, cols, valid = _band_coords(N)
    lower = np.where(valid, matrix[rows, cols], 0)
    upper = np.where(valid, matrix[cols, rows], 0)
    upper[:, 0] = 0
    return lower, upper


def from_bands(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Inverse of `to_bands`."""
    N = lower.shape[0]
    rows, cols, valid = _band_coords(N)
    out = np.zeros((N, N), dtype=complex)
    out[rows[valid], cols[valid]] = lower[valid]
    off = valid.copy()
    off[:, 0] = False
    out[cols[off], rows[off]] = upper[off]
    return out


def displacement_matrices(alpha, N: int, cols: int | None = None) -> np.ndarray:
    """Matrices of D(alpha) for a batch of amplitudes, shape ``(B, N, N)``.

    With ``cols`` set only the leading ``cols`` columns are built (shape ``(B, N, cols)``).

    For ``m >= n``::

        <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)

    and ``<m|D|n> = sqrt(m!/n!) (-conj alpha)^(n-m) exp(-|alpha|^2/2) L_m^(n-m)(|alpha|^2)``
    otherwise. No truncation warning is raised here.
    """
    cols = N if cols is None else cols
    T = displacement_radial(alpha, N, rows=cols)
    lower, upper = band_phases(alpha, N)
    m, n = np.meshgrid(np.arange(N), np.arange(cols), indexing="ij")
    lo = np.minimum(m, n)
    kk = np.abs(m - n)
    below = (m >= n)[None]
    return T[:, lo, kk] * np.where(below, lower[:, kk], upper[:, kk])


def displacement(z, N: int) -> FockOperator:
    """U(z) = exp(i(p q^ - q p^)) = D((q + i p)/sqrt 2) on the truncated space.

    Emits `TruncationWarning` when |alpha|^2 > N/4: the individual matrix
    elements stay exact, but the truncated matrix drifts from unitarity.
    """
    q, p = (z.q, z.p) if isinstance(z, PhasePoint) else z
    alpha = amplitude(q, p)
    if abs(alpha) ** 2 > N / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds N/4 = {N / 4:g}",
            TruncationWarning,
            stacklevel=2,
        )
    return FockOperator(displacement_matrices(alpha, N)[0])


def displacement_expm(z, N: int) -> FockOperator:
    """Reference U(z) as the matrix exponential of the truncated generator.

    Only trustworthy on the interior block; used as an independent oracle.
    """
    q, p = (z.q, z.p) if isinstance(z, PhasePoint) else z
    qh, ph = quadratures(N)
    return FockOperator(expm(1j * (p * qh.matrix - q * ph.matrix)))


# ---------------------------------------------------------------------------
# State corpus


def _projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def coherent_vector(alpha: complex, N: int) -> np.ndarray:
    _check_dim(N)
    n = np.arange(N)
    if alpha == 0:
        return (n == 0).astype(complex)
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(logmag + 1j * n * np.angle(alpha))


def _check_coherent(alpha: complex, N: int):
    if abs(alpha) ** 2 > N / 4:
        warnings.warn(f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds N/4", TruncationWarning, stacklevel=3)
    leak = 1.0 - float(np.sum(np.abs(coherent_vector(alpha, N)) ** 2))
    if leak > 1e-8:
        raise TruncationError(f"coherent amplitude {alpha} loses {leak:.3g} of its norm at N={N}")


def state_fock(k: int, N: int) -> DensityState:
    _check_dim(N)
    if not 0 <= k < N:
        raise TruncationError(f"Fock index {k} outside the truncated space of dimension {N}")
    psi = np.zeros(N, dtype=complex)
    psi[k] = 1.0
    return certify(_projector(psi))


def state_vacuum(N: int) -> DensityState:
    return state_fock(0, N)


def state_coherent(alpha: complex, N: int) -> DensityState:
    _check_coherent(alpha, N)
    return certify(_projector(coherent_vector(alpha, N)))


def state_cat(alpha: complex, N: int) -> DensityState:
    """Even cat state proportional to |alpha> + |-alpha>."""
    _check_coherent(alpha, N)
    psi = coherent_vector(alpha, N) + coherent_vector(-alpha, N)
    norm = 2.0 * (1.0 + math.exp(-2.0 * abs(alpha) ** 2))
    return certify(_projector(psi) / norm)


def state_thermal(nbar: float, N: int) -> DensityState:
    """Thermal state, geometric weights renormalized over the truncated basis."""
    _check_dim(N)
    if nbar < 0:
        raise ValueError("mean photon number must be nonnegative")
    if nbar > N / 8:
        warnings.warn(f"nbar = {nbar:g} exceeds N/8", TruncationWarning, stacklevel=2)
    if nbar == 0:
        return state_vacuum(N)
    ratio = nbar / (1.0 + nbar)
    w = ratio ** np.arange(N)
    if 1.0 - w.sum() * (1 - ratio) > 1e-3:
        raise TruncationError(f"thermal nbar={nbar} loses more than 1e-3 of its weight at N={N}")
    return certify(np.diag(w / w.sum()).astype(complex))


def state_maximally_mixed(d: int, N: int) -> DensityState:
    """Uniform mixture of the first ``d`` Fock states."""
    if not 1 <= d <= N:
        raise TruncationError(f"block size {d} not in [1, {N}]")
    w = np.zeros(N)
    w[:d] = 1.0 / d
    return certify(np.diag(w).astype(complex))


# ---------------------------------------------------------------------------
# Algebra


def op_product(A: FockOperator, B: FockOperator) -> FockOperator:
    _check_dims(A, B)
    return FockOperator(A.matrix @ B.matrix)


def op_adjoint(A: FockOperator) -> FockOperator:
    return FockOperator(A.matrix.conj().T)


def op_trace(A: FockOperator) -> complex:
    return complex(np.trace(A.matrix))


def hs_inner(A: FockOperator, B: FockOperator) -> complex:
    """Hilbert-Schmidt inner product tr(A^dagger B)."""
    _check_dims(A, B)
    return complex(np.vdot(A.matrix, B.matrix))


def min_eigenvalue_hermitian(A, rtol: float = 1e-10) -> float:
    """Smallest eigenvalue of a Hermitian matrix (`FockOperator` or array)."""
    m = A.matrix if isinstance(A, FockOperator) else np.asarray(A, dtype=complex)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if float(np.max(np.abs(m - m.conj().T))) > rtol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def purity(rho: FockOperator) -> float:
    """tr(rho^2)."""
    return float(np.real(np.vdot(rho.matrix.conj().T, rho.matrix)))
