"""Finite-sample positive-definiteness testers, classical and quantum.

A function chi on phase space is (classically) positive definite when every
Gram matrix ``G[j, k] = chi(z_k - z_j)`` is PSD, and quantum positive
definite when the multiplier-weighted matrix
``G[j, k] = chi(z_k - z_j) exp(i omega(z_j, z_k) / 2)`` is PSD. Quantum
characteristic functions of density operators pass the second test; the
pointwise product of a classical and a quantum positive-definite function
passes it too (the Gram matrices multiply entrywise).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable, Union

import numpy as np

from .fock import min_eigenvalue_hermitian
from .phase import OPERAND_DECAY_TOL, ComplexField, symplectic_form
from .semigroups import GaussianSemigroupParams, gaussian_char

Evaluable = Union[ComplexField, Callable[[np.ndarray, np.ndarray], np.ndarray]]

#: Seed of the published standard sample sets.
STANDARD_SEED = 20141016

ANALYTIC_TOL = 1e-9
INTERPOLATED_TOL = 1e-6


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray
    provenance: str = "user"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if not 2 <= len(pts) <= 512:
            raise ValueError(f"sample sets hold between 2 and 512 points, got {len(pts)}")
        diff = pts[:, None, :] - pts[None, :, :]
        sep = np.sqrt((diff**2).sum(-1))
        np.fill_diagonal(sep, np.inf)
        if sep.min() < 1e-6:
            raise ValueError("sample points must be pairwise distinct (separation >= 1e-6)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def q(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.points[:, 1]

    def to_csv(self) -> str:
        rows = ["q,p"] + [f"{q:.17g},{p:.17g}" for q, p in self.points]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> SampleSet:
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines and not lines[0][0].isdigit() and lines[0][0] not in "+-.":
            lines = lines[1:]
        pts = [[float(v) for v in ln.split(",")] for ln in lines]
        return cls(np.array(pts), provenance="user")


def lattice_sample_set(side: int = 7, spacing: float = 0.7, extra: int = 1, seed: int = STANDARD_SEED) -> SampleSet:
    """Origin-centred ``side x side`` lattice plus ``extra`` uniform points inside its hull."""
    half = (side - 1) / 2
    ax = (np.arange(side) - half) * spacing
    Q, P = np.meshgrid(ax, ax, indexing="ij")
    pts = np.column_stack([Q.ravel(), P.ravel()])
    if extra:
        rng = np.random.default_rng(seed)
        pts = np.vstack([pts, rng.uniform(-half * spacing, half * spacing, size=(extra, 2))])
    return SampleSet(pts, provenance="lattice")


def random_sample_set(m: int = 50, box: float = 3.0, seed: int = STANDARD_SEED) -> SampleSet:
    """``m`` seeded uniform points in ``[-box, box]^2``."""
    rng = np.random.default_rng(seed)
    return SampleSet(rng.uniform(-box, box, size=(m, 2)), provenance=f"random({seed})")


def standard_sample_sets() -> dict[str, SampleSet]:
    """The lattice-50 and random-50 sets used throughout the test suites."""
    return {"lattice-50": lattice_sample_set(), "random-50": random_sample_set()}


@dataclass(frozen=True)
class PSDReport:
    gram_dim: int
    min_eig: float
    max_eig: float
    hermiticity_defect: float
    verdict: str
    tolerance_used: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def relative_min(self) -> float:
        return self.min_eig / max(self.max_eig, 1e-300)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# Gram matrices


INTERPOLATIONS = ("sinc", "bilinear")


def _evaluate(chi: Evaluable, dq: np.ndarray, dp: np.ndarray, interpolation: str = "sinc") -> np.ndarray:
    if np.isscalar(chi):
        return np.full(dq.shape, complex(chi))
    if isinstance(chi, ComplexField):
        if interpolation not in INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {interpolation!r}")
        values = chi.sinc_at(dq, dp) if interpolation == "sinc" else chi.at(dq, dp)
        return np.asarray(values, dtype=complex)
    return np.asarray(chi(dq, dp), dtype=complex) * np.ones(dq.shape)


def _differences(S: SampleSet) -> tuple[np.ndarray, np.ndarray]:
    """``(dq[j, k], dp[j, k]) = z_k - z_j``."""
    return S.q[None, :] - S.q[:, None], S.p[None, :] - S.p[:, None]


def classical_gram(chi: Evaluable, S: SampleSet, interpolation: str = "sinc") -> np.ndarray:
    """``G[j, k] = chi(z_k - z_j)``.

    Sampled fields are interpolated (band-limited ``"sinc"`` by default, or
    ``"bilinear"``) and raise `OutOfGrid` when a difference leaves the grid.
    """
    dq, dp = _differences(S)
    return _evaluate(chi, dq, dp, interpolation)


def multiplier_matrix(S: SampleSet) -> np.ndarray:
    """``exp(i omega(z_j, z_k) / 2)``."""
    om = symplectic_form((S.q[:, None], S.p[:, None]), (S.q[None, :], S.p[None, :]))
    return np.exp(0.5j * om)


def quantum_gram(chi: Evaluable, S: SampleSet, interpolation: str = "sinc") -> np.ndarray:
    """``G[j, k] = chi(z_k - z_j) exp(i omega(z_j, z_k) / 2)``."""
    return classical_gram(chi, S, interpolation) * multiplier_matrix(S)


def psd_report(G: np.ndarray, tol: float) -> PSDReport:
    """Hermitize, record the defect and compare the spectrum against ``-tol * max(max_eig, 1)``."""
    defect = float(np.max(np.abs(G - G.conj().T)))
    H = 0.5 * (G + G.conj().T)
    eig = np.linalg.eigvalsh(H)
    lo = min_eigenvalue_hermitian(H)
    hi = float(eig[-1])
    verdict = "pass" if lo >= -tol * max(hi, 1.0) else "fail"
    return PSDReport(len(G), lo, hi, defect, verdict, tol)


def _default_tol(chi: Evaluable) -> float:
    return INTERPOLATED_TOL if isinstance(chi, ComplexField) else ANALYTIC_TOL


def pd_test_classical(
    chi: Evaluable, S: SampleSet, tol: float | None = None, interpolation: str = "sinc"
) -> PSDReport:
    """Classical positive-definiteness verdict on ``S``; ``tol`` defaults by input kind."""
    return psd_report(classical_gram(chi, S, interpolation), _default_tol(chi) if tol is None else tol)


def pd_test_quantum(
    chi: Evaluable, S: SampleSet, tol: float | None = None, interpolation: str = "sinc"
) -> PSDReport:
    """Quantum (multiplier-weighted) positive-definiteness verdict on ``S``."""
    return psd_report(quantum_gram(chi, S, interpolation), _default_tol(chi) if tol is None else tol)


# ---------------------------------------------------------------------------
# Integral forms


def _support(phi: ComplexField, max_nodes: int):
    phi.check_decay(OPERAND_DECAY_TOL, what="test function")
    Q, P = phi.grid.mesh()
    mask = phi.values != 0
    if mask.sum() > max_nodes:
        raise ValueError(
            f"test function has {mask.sum()} nonzero nodes; integral forms need compact support "
            f"(at most {max_nodes})"
        )
    pts = np.column_stack([Q[mask], P[mask]])
    return pts, phi.values[mask], np.argwhere(mask)


def _node_differences(chi: ComplexField, idx: np.ndarray) -> np.ndarray:
    """chi at z_k - z_j for grid nodes; node differences are nodes, off-grid ones count as zero."""
    c = chi.grid.origin_index
    M = chi.grid.points
    a = idx[None, :, 0] - idx[:, None, 0] + c
    b = idx[None, :, 1] - idx[:, None, 1] + c
    inside = (a >= 0) & (a < M) & (b >= 0) & (b < M)
    return np.where(inside, chi.values[np.clip(a, 0, M - 1), np.clip(b, 0, M - 1)], 0)


def _integral_form(chi: Evaluable, phi: ComplexField, quantum: bool, max_nodes: int) -> float:
    pts, c, idx = _support(phi, max_nodes)
    if len(c) == 0:
        return 0.0
    q, p = pts[:, 0], pts[:, 1]
    if isinstance(chi, ComplexField):
        phi.grid.check_same(chi.grid)
        G = _node_differences(chi, idx)
    else:
        G = _evaluate(chi, q[None, :] - q[:, None], p[None, :] - p[:, None])
    if quantum:
        G = G * np.exp(0.5j * (q[:, None] * p[None, :] - p[:, None] * q[None, :]))
    h2 = phi.grid.spacing ** 2
    value = h2 * h2 * np.vdot(c, G @ c)
    return float(value.real)


def integral_form_test_classical(chi: Evaluable, phi: ComplexField, max_nodes: int = 6000) -> float:
    """Double quadrature of  int int chi(z - z') conj(phi(z')) phi(z) dz dz'.

    Nonnegative (up to quadrature error) when chi is of positive type.
    """
    return _integral_form(chi, phi, quantum=False, max_nodes=max_nodes)


def integral_form_test_quantum(chi: Evaluable, phi: ComplexField, max_nodes: int = 6000) -> float:
    """Double quadrature of the twisted form, with the extra factor exp(i omega(z', z)/2)."""
    return _integral_form(chi, phi, quantum=True, max_nodes=max_nodes)


# ---------------------------------------------------------------------------
# Schur closure and Bochner round-trips


def hadamard_product(f: Evaluable, g: Evaluable) -> Evaluable:
    """Pointwise product; a field when both factors are fields, a callable otherwise."""
    if isinstance(f, ComplexField) and isinstance(g, ComplexField):
        f.grid.check_same(g.grid)
        return ComplexField(f.grid, f.values * g.values)

    def product(q, p):
        return _evaluate(f, np.asarray(q), np.asarray(p)) * _evaluate(g, np.asarray(q), np.asarray(p))

    return product


def bochner_roundtrip_classical(
    mean, covariance, S: SampleSet, tol: float = ANALYTIC_TOL
) -> PSDReport:
    """Characteristic function of Normal(mean, covariance) run through the classical tester."""
    params = GaussianSemigroupParams(mean, covariance)
    return pd_test_classical(gaussian_char(params, 1.0), S, tol)


def empirical_char(draws: np.ndarray) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Sample average of exp(i omega(z, w)) over the draws w."""
    wq, wp = draws[:, 0], draws[:, 1]

    def chi(q, p):
        q = np.asarray(q, dtype=float)
        flat_q, flat_p = q.ravel(), np.asarray(p, dtype=float).ravel()
        out = np.empty(flat_q.size, dtype=complex)
        step = max(1, 2_000_000 // max(len(wq), 1))
        for s in range(0, flat_q.size, step):
            sl = slice(s, s + step)
            out[sl] = np.exp(1j * (np.outer(flat_q[sl], wp) - np.outer(flat_p[sl], wq))).mean(axis=1)
        return out.reshape(q.shape)

    return chi


def bochner_roundtrip_empirical(
    mean, covariance, S: SampleSet, samples: int = 100_000, seed: int = STANDARD_SEED, tol: float = 1e-2
) -> PSDReport:
    """As `bochner_roundtrip_classical`, with the characteristic function estimated from draws."""
    params = GaussianSemigroupParams(mean, covariance)
    rng = np.random.default_rng(seed)
    draws = rng.multivariate_normal(params.drift, params.covariance, size=samples)
    return pd_test_classical(empirical_char(draws), S, tol)
