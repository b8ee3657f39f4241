"""Gaussian convolution semigroups and the two operator semigroups they drive.

For mu_t = Normal(t v, t Sigma) on phase space the symplectic Fourier
transform is

    chi_t(z) = int exp(i omega(z, w)) d mu_t(w)
             = exp(i t omega(z, v) - (t/2) <Jz, Sigma Jz>),   Jz = (-p, q),

a multiplication semigroup (chi_t chi_s = chi_{t+s}, chi_0 = 1). It acts on
characteristic functions by pointwise multiplication (`cq_apply`) and on
density matrices by the twirl  rho -> int U(w) rho U(w)^* d mu_t(w)
(`twirl_apply`); dequantization intertwines the two.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadCovariance, CertificationError, NegativeTime, TruncationError, TruncationWarning
from .fock import DensityState, FockOperator, amplitude, certify, displacement_matrices
from .phase import OPERAND_DECAY_TOL, ComplexField, PhaseGrid, l2_norm, symplectic_form
from .transforms import dequantize

log = logging.getLogger(__name__)

#: Node weights below this fraction of the largest weight are dropped.
NODE_PRUNE = 1e-16
#: Total weight of out-of-trust-region nodes that may be dropped instead of raising.
TRUST_WEIGHT_TOL = 1e-12
#: Pre-normalization trace drift tolerated silently / at all.
TRACE_DRIFT_QUIET = 1e-6
TRACE_DRIFT_MAX = 1e-4


@dataclass(frozen=True)
class GaussianSemigroupParams:
    """Drift velocity ``v`` and diffusion covariance ``Sigma`` (per unit time)."""

    drift: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        v = np.array(self.drift, dtype=float).reshape(2)
        S = np.array(self.covariance, dtype=float)
        if S.ndim == 0:
            S = S * np.eye(2)
        if S.shape != (2, 2):
            raise BadCovariance(f"covariance must be 2x2, got shape {S.shape}")
        if np.max(np.abs(S - S.T)) > 1e-12:
            raise BadCovariance("covariance is not symmetric")
        if np.linalg.eigvalsh(S)[0] < -1e-12:
            raise BadCovariance("covariance is not positive semidefinite")
        v.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "drift", v)
        object.__setattr__(self, "covariance", S)

    @classmethod
    def isotropic(cls, variance: float, drift=(0.0, 0.0)) -> GaussianSemigroupParams:
        return cls(np.asarray(drift, dtype=float), variance * np.eye(2))

    @property
    def is_point_mass(self) -> bool:
        return bool(np.all(self.covariance == 0))

    def sqrt_covariance(self) -> np.ndarray:
        """Symmetric PSD square root of Sigma."""
        w, V = np.linalg.eigh(self.covariance)
        return (V * np.sqrt(np.clip(w, 0, None))) @ V.T


def _check_time(t: float):
    if t < 0:
        raise NegativeTime(f"semigroup time must be nonnegative, got {t}")


def gaussian_char(params: GaussianSemigroupParams, t: float, grid: PhaseGrid | None = None):
    """chi_t as a vectorized callable ``chi(q, p)``, or sampled on ``grid`` when given."""
    _check_time(t)
    v = params.drift
    S = params.covariance

    def chi(q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        jq, jp = -p, q
        quad = S[0, 0] * jq * jq + 2 * S[0, 1] * jq * jp + S[1, 1] * jp * jp
        return np.exp(1j * t * symplectic_form((q, p), v) - 0.5 * t * quad)

    if grid is None:
        return chi
    return ComplexField.from_function(grid, chi)


def cq_apply(params: GaussianSemigroupParams, t: float, chi: ComplexField) -> ComplexField:
    """Classical-quantum semigroup: (C_t chi)(z) = chi_t(z) chi(z)."""
    factor = gaussian_char(params, t, chi.grid)
    kwargs = {"source_dim": chi.source_dim} if hasattr(chi, "source_dim") else {}
    return type(chi)(chi.grid, factor.values * chi.values, **kwargs)


@dataclass(frozen=True)
class TwirlingQuadrature:
    """Discretization of the Gaussian measure in the twirl integral."""

    scheme: str = "gauss_hermite"
    order: int = 20
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.scheme == "gauss_hermite":
            if self.order < 4:
                raise ValueError("Gauss-Hermite order must be >= 4")
        elif self.scheme == "monte_carlo":
            if self.samples < 1000:
                raise ValueError("Monte Carlo twirls need at least 1000 samples")
        else:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")

    def standard_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes ``x`` (shape ``(K, 2)``) and weights for the standard normal on R^2."""
        if self.scheme == "gauss_hermite":
            x, w = np.polynomial.hermite_e.hermegauss(self.order)
            w = w / math.sqrt(2 * math.pi)
            X, Y = np.meshgrid(x, x, indexing="ij")
            W = np.outer(w, w)
            return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()
        rng = np.random.default_rng(self.seed)
        return rng.standard_normal((self.samples, 2)), np.full(self.samples, 1.0 / self.samples)


def twirl_nodes(params: GaussianSemigroupParams, t: float, quad: TwirlingQuadrature):
    """Nodes and weights discretizing Normal(t v, t Sigma)."""
    _check_time(t)
    center = t * params.drift
    if t == 0 or params.is_point_mass:
        return center[None, :], np.ones(1)
    x, w = quad.standard_nodes()
    keep = w > NODE_PRUNE * w.max()
    x, w = x[keep], w[keep]
    nodes = center[None, :] + math.sqrt(t) * x @ params.sqrt_covariance().T
    return nodes, w


def twirl_unnormalized(
    params: GaussianSemigroupParams, t: float, rho: FockOperator, quad: TwirlingQuadrature | None = None
) -> FockOperator:
    """sum_k w_k U(z_k) rho U(z_k)^* without trace renormalization."""
    quad = quad or TwirlingQuadrature()
    N = rho.dim
    nodes, weights = twirl_nodes(params, t, quad)
    alpha = amplitude(nodes[:, 0], nodes[:, 1])
    outside = np.abs(alpha) ** 2 > N / 4
    if outside.any():
        lost = float(weights[outside].sum())
        if lost > TRUST_WEIGHT_TOL:
            worst = float(np.max(np.abs(alpha) ** 2))
            raise TruncationError(
                f"quadrature nodes up to |alpha|^2 = {worst:.3g} carrying weight {lost:.3g} "
                f"leave the trust region N/4 = {N / 4:g}"
            )
        # far Gaussian tail: negligible mass, dropped rather than displaced out of the block
        log.debug("dropping %d tail nodes of total weight %.3g", int(outside.sum()), lost)
        alpha, weights = alpha[~outside], weights[~outside]

    # rho = Psi Psi^*, so U rho U^* = (U Psi)(U Psi)^*
    m = 0.5 * (rho.matrix + rho.matrix.conj().T)
    lam, V = np.linalg.eigh(m)
    keep = lam > 1e-15 * max(lam.max(), 0.0)
    if np.any(lam < -1e-12 * max(lam.max(), 1.0)):
        raise CertificationError("twirled operator must be positive semidefinite")
    psi = V[:, keep] * np.sqrt(lam[keep])
    rows = np.flatnonzero(np.abs(psi).max(axis=1) > 1e-300)
    cols = rows.max() + 1 if rows.size else 1

    acc = np.zeros((N, N), dtype=complex)
    batch = max(1, 2_000_000 // (N * N))
    for s in range(0, len(weights), batch):
        sl = slice(s, s + batch)
        D = displacement_matrices(alpha[sl], N, cols=cols)
        phi = D @ psi[:cols]
        acc += np.einsum("bnr,bmr->nm", phi * weights[sl, None, None], phi.conj())
    return FockOperator(0.5 * (acc + acc.conj().T))


def twirl_apply(
    params: GaussianSemigroupParams, t: float, rho: DensityState, quad: TwirlingQuadrature | None = None
) -> DensityState:
    """Twirling semigroup T_t rho = int U(w) rho U(w)^* d mu_t(w), discretized in Kraus form."""
    out = twirl_unnormalized(params, t, rho, quad)
    tr = np.trace(out.matrix).real
    drift = abs(tr - 1.0)
    log.debug("twirl trace drift %.3g", drift)
    if drift > TRACE_DRIFT_MAX:
        raise CertificationError(f"twirl trace drift {drift:.3g} exceeds {TRACE_DRIFT_MAX:g}")
    if drift > TRACE_DRIFT_QUIET:
        warnings.warn(f"twirl trace drift {drift:.3g} renormalized", TruncationWarning, stacklevel=2)
    return certify(out.matrix / tr)


def purity_from_char(chi: ComplexField) -> float:
    """Haar-weighted squared L2 norm of a characteristic function, i.e. tr(rho^2)."""
    chi.check_decay(OPERAND_DECAY_TOL, what="characteristic function")
    return l2_norm(chi, "haar") ** 2


def intertwine_verify(
    params: GaussianSemigroupParams,
    t: float,
    rho: DensityState,
    quad: TwirlingQuadrature | None,
    grid: PhaseGrid,
) -> float:
    """max_z |dequantize(T_t rho)(z) - chi_t(z) dequantize(rho)(z)|."""
    lhs = dequantize(twirl_apply(params, t, rho, quad), grid)
    rhs = cq_apply(params, t, dequantize(rho, grid))
    return float(np.max(np.abs(lhs.values - rhs.values)))
