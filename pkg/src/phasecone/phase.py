"""Phase-space primitives: points, the symplectic form, the Weyl multiplier,
uniform centered grids and complex fields sampled on them.

Units have hbar = 1 and phase space is R^2 (one degree of freedom).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .errors import DecayWarning, GridMismatch, OutOfGrid

#: Boundary magnitude below which a sampled integrand counts as decayed.
DECAY_TOL = 1e-12
#: Looser bound for operands (characteristic functions, convolution inputs).
OPERAND_DECAY_TOL = 1e-8


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and math.isfinite(self.p)):
            raise ValueError(f"phase point must be finite, got ({self.q}, {self.p})")

    def __add__(self, other: PhasePoint) -> PhasePoint:
        return PhasePoint(self.q + other.q, self.p + other.p)

    def __sub__(self, other: PhasePoint) -> PhasePoint:
        return PhasePoint(self.q - other.q, self.p - other.p)

    def __neg__(self) -> PhasePoint:
        return PhasePoint(-self.q, -self.p)

    def as_tuple(self) -> tuple[float, float]:
        return (self.q, self.p)


def _coords(z):
    if isinstance(z, PhasePoint):
        return z.q, z.p
    q, p = z
    return q, p


def symplectic_form(z, w):
    """omega(z, w) = q p' - p q'.

    Accepts `PhasePoint` instances or ``(q, p)`` pairs whose entries may be
    numpy arrays (broadcast elementwise).
    """
    q, p = _coords(z)
    q2, p2 = _coords(w)
    return q * p2 - p * q2


def weyl_multiplier(z, w):
    """The Weyl cocycle m(z, w) = exp(i omega(z, w) / 2), with
    U(z + w) = m(z, w) U(z) U(w)."""
    return np.exp(0.5j * symplectic_form(z, w))


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform M x M grid on [-L, L)^2 with the origin as a node.

    Nodes are ``(j - M/2) * h`` for ``0 <= j < M`` along each axis, so node
    ``j = 0`` sits at ``-L`` and node ``M/2`` at the origin.
    """

    half_extent: float
    points: int

    def __post_init__(self):
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        if self.points < 8 or self.points % 2:
            raise ValueError(f"points must be an even integer >= 8, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points

    @property
    def origin_index(self) -> int:
        return self.points // 2

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.points) - self.origin_index) * self.spacing

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(Q, P)`` arrays of shape ``(M, M)``; rows index q."""
        ax = self.axis
        return np.meshgrid(ax, ax, indexing="ij")

    @property
    def satisfies_aliasing_bound(self) -> bool:
        return self.spacing <= math.pi / self.half_extent

    def check_same(self, other: PhaseGrid):
        if self != other:
            raise GridMismatch(f"grids differ: {self} vs {other}")


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a `PhaseGrid`, ``values[j, k] = f(q_j, p_k)``."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    side: ClassVar[str] = "generic"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        shape = (self.grid.points, self.grid.points)
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} does not match grid {shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: PhaseGrid, func, **kwargs):
        """Sample a vectorized ``func(Q, P)`` on the grid."""
        Q, P = grid.mesh()
        return cls(grid, func(Q, P), **kwargs)

    @classmethod
    def zeros(cls, grid: PhaseGrid, **kwargs):
        return cls(grid, np.zeros((grid.points, grid.points), dtype=complex), **kwargs)

    def with_values(self, values) -> ComplexField:
        return ComplexField(self.grid, values)

    @property
    def origin_value(self) -> complex:
        i = self.grid.origin_index
        return complex(self.values[i, i])

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def check_decay(self, tol: float = DECAY_TOL, what: str = "field") -> bool:
        b = self.boundary_max()
        if b > tol:
            warnings.warn(
                f"{what} has magnitude {b:.3g} on the grid boundary (> {tol:g})",
                DecayWarning,
                stacklevel=3,
            )
            return False
        return True

    def _fractional_index(self, q, p):
        g = self.grid
        u = np.asarray(q, dtype=float) / g.spacing + g.origin_index
        v = np.asarray(p, dtype=float) / g.spacing + g.origin_index
        last = g.points - 1
        slack = 1e-9
        if np.any((u < -slack) | (u > last + slack) | (v < -slack) | (v > last + slack)):
            raise OutOfGrid("evaluation point lies outside the sampled grid")
        return u, v

    def at(self, q, p) -> np.ndarray:
        """Bilinear interpolation at arbitrary points inside the grid."""
        u, v = self._fractional_index(q, p)
        last = self.grid.points - 1
        u = np.clip(u, 0, last)
        v = np.clip(v, 0, last)
        j = np.minimum(np.floor(u).astype(int), last - 1)
        k = np.minimum(np.floor(v).astype(int), last - 1)
        a = u - j
        b = v - k
        f = self.values
        return (
            (1 - a) * (1 - b) * f[j, k]
            + a * (1 - b) * f[j + 1, k]
            + (1 - a) * b * f[j, k + 1]
            + a * b * f[j + 1, k + 1]
        )

    def sinc_at(self, q, p) -> np.ndarray:
        """Whittaker-Shannon (band-limited) interpolation at points inside the grid.

        Exact at the nodes; for fields that have decayed at the boundary and
        whose spectrum sits below pi/h it is accurate to roughly the boundary
        magnitude, far better than `at` on smooth data.
        """
        u, v = self._fractional_index(q, p)
        u, v = np.broadcast_arrays(u, v)
        shape = u.shape
        u, v = u.ravel(), v.ravel()
        nodes = np.arange(self.grid.points)
        out = np.empty(u.size, dtype=complex)
        step = 4096
        for s in range(0, u.size, step):
            sl = slice(s, s + step)
            Su = np.sinc(u[sl, None] - nodes[None, :])
            Sv = np.sinc(v[sl, None] - nodes[None, :])
            out[sl] = np.sum((Su @ self.values) * Sv, axis=1)
        return out.reshape(shape)

    def __call__(self, q, p):
        return self.at(q, p)

    def __add__(self, other: ComplexField) -> ComplexField:
        self.grid.check_same(other.grid)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: ComplexField) -> ComplexField:
        self.grid.check_same(other.grid)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> ComplexField:
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def max_abs_diff(self, other: ComplexField) -> float:
        self.grid.check_same(other.grid)
        return float(np.max(np.abs(self.values - other.values)))


def grid_integral(f: ComplexField, weight: str = "lebesgue") -> complex:
    """Riemann sum of a sampled field over the grid.

    ``weight="lebesgue"`` integrates against dq dp, ``weight="haar"`` against
    dq dp / (2 pi). A `DecayWarning` is emitted (and the sum still returned)
    when the field has not decayed on the outermost ring of nodes.
    """
    if weight not in ("lebesgue", "haar"):
        raise ValueError(f"unknown weight {weight!r}")
    f.check_decay(what="integrand")
    h = f.grid.spacing
    scale = h * h if weight == "lebesgue" else h * h / (2 * math.pi)
    return complex(scale * f.values.sum())


def l2_norm(f: ComplexField, weight: str = "lebesgue") -> float:
    """Sampled L2 norm; quiet about decay, which callers check separately."""
    h = f.grid.spacing
    scale = h * h if weight == "lebesgue" else h * h / (2 * math.pi)
    return math.sqrt(scale * float(np.sum(np.abs(f.values) ** 2)))
