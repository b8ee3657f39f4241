"""Cross-module identity suites shared by the ``verify`` command and the tests.

Each suite returns a list of `Check` records holding the measured quantity,
the bound it is held to and the verdict.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .algebra import twisted_convolve
from .errors import DecayWarning
from .fock import (
    DensityState,
    displacement,
    op_product,
    state_cat,
    state_coherent,
    state_fock,
    state_thermal,
    state_vacuum,
)
from .phase import PhaseGrid, PhasePoint, weyl_multiplier
from .positivity import (
    bochner_roundtrip_classical,
    bochner_roundtrip_empirical,
    classical_gram,
    pd_test_quantum,
    psd_report,
    quantum_gram,
    random_sample_set,
    standard_sample_sets,
)
from .semigroups import (
    GaussianSemigroupParams,
    TwirlingQuadrature,
    gaussian_char,
    intertwine_verify,
)
from .transforms import char_function, dequantize

SUITES = ("multiplier", "star", "bochner", "schur", "intertwine")

#: Width of the Gaussian that must fail / pass the quantum tester on lattice-50.
DISCRIMINATOR_FAIL_C = 0.15
DISCRIMINATOR_PASS_C = 0.3
DISCRIMINATOR_MARGIN = 1e-2

STAR_PAIRS = ((1.0, 0.5j), (-0.8 + 0.6j, 1.2), (1.5, -1.5j))


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    bound: float
    relation: str = "<="
    passed: bool = False

    @classmethod
    def make(cls, suite: str, name: str, value: float, bound: float, relation: str = "<=") -> Check:
        value = float(value)
        ok = value <= bound if relation == "<=" else value >= bound
        return cls(suite, name, value, float(bound), relation, bool(ok))

    @classmethod
    def flag(cls, suite: str, name: str, ok: bool) -> Check:
        return cls(suite, name, float(ok), 1.0, "==", bool(ok))

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.suite}/{self.name}: {self.value:.17g} {self.relation} {self.bound:.17g}"


def corpus(N: int = 64) -> dict[str, DensityState]:
    """The reference states used throughout the suites."""
    return {
        "vacuum": state_vacuum(N),
        "coherent(1)": state_coherent(1.0, N),
        "fock(1)": state_fock(1, N),
        "thermal(1)": state_thermal(1.0, N),
        "cat(1.5)": state_cat(1.5, N),
    }


# ---------------------------------------------------------------------------


def multiplier_points() -> list[tuple[PhasePoint, PhasePoint]]:
    """5 x 5 pairs (z, w) with |z|, |w| <= 2."""
    r = np.linspace(0.4, 2.0, 5)
    zs = [PhasePoint(a * math.cos(0.3 + 1.2 * i), a * math.sin(0.3 + 1.2 * i)) for i, a in enumerate(r)]
    ws = [PhasePoint(a * math.cos(2.0 - 0.9 * i), a * math.sin(2.0 - 0.9 * i)) for i, a in enumerate(r[::-1])]
    return [(z, w) for z in zs for w in ws]


def multiplier_deviation(N: int = 64, flip: bool = False) -> float:
    """max over the pairs of the interior-block deviation of U(z+w) m(z,w)^-1 from U(z)U(w)."""
    b = N // 2
    sign = -1 if flip else 1
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for z, w in multiplier_points():
            lhs = displacement(z + w, N).matrix / weyl_multiplier(z, w) ** sign
            rhs = (displacement(z, N) @ displacement(w, N)).matrix
            worst = max(worst, float(np.max(np.abs(lhs[:b, :b] - rhs[:b, :b]))))
    return worst


def suite_multiplier(N: int = 64, flip: bool = False) -> list[Check]:
    return [Check.make("multiplier", "U(z+w)/m(z,w) vs U(z)U(w)", multiplier_deviation(N, flip), 1e-8)]


def star_deviations(grid: PhaseGrid, N: int = 64, flip: bool = False) -> list[float]:
    """||dequantize(rho sigma) - dequantize(rho) # dequantize(sigma)||_inf for coherent pairs."""
    out = []
    for a, b in STAR_PAIRS:
        rho, sigma = state_coherent(a, N), state_coherent(b, N)
        with warnings.catch_warnings():
            # |a><a|b><b| is off-centre and reaches ~1e-7 at the boundary
            warnings.simplefilter("ignore", DecayWarning)
            lhs = dequantize(op_product(rho, sigma), grid)
        rhs = twisted_convolve(dequantize(rho, grid), dequantize(sigma, grid), multiplier_sign=-1 if flip else 1)
        out.append(lhs.max_abs_diff(rhs))
    return out


def suite_star(grid: PhaseGrid, N: int = 64, flip: bool = False) -> list[Check]:
    devs = star_deviations(grid, N, flip)
    return [Check.make("star", f"coherent pair {a}, {b}", d, 1e-3) for (a, b), d in zip(STAR_PAIRS, devs)]


def gaussian(c: float):
    def f(q, p):
        return np.exp(-c * (np.asarray(q) ** 2 + np.asarray(p) ** 2))

    return f


def suite_bochner(N: int = 64, seed: int | None = None) -> list[Check]:
    sets = standard_sample_sets()
    checks = []
    for set_name, S in sets.items():
        for name, rho in corpus(N).items():
            rep = pd_test_quantum(char_function(rho), S, tol=1e-9)
            checks.append(Check.make("bochner", f"quantum {name} on {set_name}", rep.relative_min, -1e-9, ">="))
    lattice = sets["lattice-50"]
    fail = pd_test_quantum(gaussian(DISCRIMINATOR_FAIL_C), lattice)
    checks.append(
        Check.make("bochner", f"gauss c={DISCRIMINATOR_FAIL_C} fails", fail.relative_min, -DISCRIMINATOR_MARGIN, "<=")
    )
    ok = pd_test_quantum(gaussian(DISCRIMINATOR_PASS_C), lattice)
    checks.append(Check.make("bochner", f"gauss c={DISCRIMINATOR_PASS_C} passes", ok.relative_min, -1e-9, ">="))
    cov = np.array([[0.8, 0.3], [0.3, 0.5]])
    rep = bochner_roundtrip_classical((0.2, -0.4), cov, lattice)
    checks.append(Check.make("bochner", "classical gaussian round trip", rep.relative_min, -1e-9, ">="))
    kwargs = {} if seed is None else {"seed": seed}
    rep = bochner_roundtrip_empirical((0.2, -0.4), cov, lattice, **kwargs)
    checks.append(Check.make("bochner", "empirical gaussian round trip", rep.relative_min, -1e-2, ">="))
    return checks


def random_classical_params(rng: np.random.Generator) -> tuple[GaussianSemigroupParams, float]:
    """A seeded Gaussian (or, one time in four, point-mass) semigroup member."""
    drift = rng.uniform(-1.5, 1.5, size=2)
    if rng.random() < 0.25:
        cov = np.zeros((2, 2))
    else:
        A = rng.normal(size=(2, 2))
        cov = A @ A.T * rng.uniform(0.05, 1.0)
    return GaussianSemigroupParams(drift, cov), float(rng.uniform(0.1, 1.5))


def schur_trials(N: int = 64, trials: int = 100, seed: int = 7) -> list[tuple[float, float]]:
    """(relative min eigenvalue, |origin value - 1|) of random Hadamard products.

    Each trial multiplies a random classical characteristic function by the
    quantum characteristic function of a random corpus state and runs the
    quantum tester on a lattice-50, random-50 or fresh random sample set.
    """
    rng = np.random.default_rng(seed)
    states = list(corpus(N).values())
    sets = list(standard_sample_sets().values())
    cache: dict[tuple[int, int], np.ndarray] = {}
    out = []
    for _ in range(trials):
        params, t = random_classical_params(rng)
        si = int(rng.integers(len(states)))
        choice = int(rng.integers(3))
        if choice < 2:
            S = sets[choice]
            key = (si, choice)
            if key not in cache:
                cache[key] = quantum_gram(char_function(states[si]), S)
            Gq = cache[key]
        else:
            S = random_sample_set(40, 2.5, seed=int(rng.integers(2**31)))
            Gq = quantum_gram(char_function(states[si]), S)
        chi_c = gaussian_char(params, t)
        rep = psd_report(classical_gram(chi_c, S) * Gq, 1e-9)
        origin = complex(chi_c(0.0, 0.0)) * complex(char_function(states[si])(0.0, 0.0))
        out.append((rep.relative_min, abs(origin - 1.0)))
    return out


def suite_schur(N: int = 64, trials: int = 100, seed: int = 7) -> list[Check]:
    res = np.array(schur_trials(N, trials, seed))
    return [
        Check.make("schur", f"min relative eigenvalue over {trials} products", res[:, 0].min(), -1e-9, ">="),
        Check.make("schur", "max |origin value - 1|", res[:, 1].max(), 1e-10),
    ]


def intertwine_cases():
    diffusion = GaussianSemigroupParams.isotropic(0.5)
    drift = GaussianSemigroupParams((1.0, 0.0), np.zeros((2, 2)))
    cases = []
    for name in ("vacuum", "cat(1.5)"):
        for t in (0.25, 0.5):
            cases.append((name, diffusion, t, 1e-3))
    for name in ("vacuum", "cat(1.5)"):
        cases.append((name, drift, 1.0, 1e-6))
    return cases


def suite_intertwine(grid: PhaseGrid, N: int = 64, quad: TwirlingQuadrature | None = None) -> list[Check]:
    states = corpus(N)
    checks = []
    with warnings.catch_warnings():
        # cat(1.5) has not fully decayed at |z| = 10; the deviation is still measured
        warnings.simplefilter("ignore", DecayWarning)
        for name, params, t, bound in intertwine_cases():
            dev = intertwine_verify(params, t, states[name], quad, grid)
            kind = "drift" if params.is_point_mass else "diffusion"
            checks.append(Check.make("intertwine", f"{kind} {name} t={t}", dev, bound))
    return checks


def run_suite(name: str, grid: PhaseGrid, N: int = 64, quad=None, seed=None, flip: bool = False) -> list[Check]:
    if name == "multiplier":
        return suite_multiplier(N, flip)
    if name == "star":
        return suite_star(grid, N, flip)
    if name == "bochner":
        return suite_bochner(N, seed)
    if name == "schur":
        return suite_schur(N)
    if name == "intertwine":
        return suite_intertwine(grid, N, quad)
    raise ValueError(f"unknown suite {name!r}")

