import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import decaying_field
from phasecone.errors import BadCovariance, OutOfGrid
from phasecone.phase import ComplexField, PhaseGrid, symplectic_form
from phasecone.positivity import (
    PSDReport,
    SampleSet,
    bochner_roundtrip_classical,
    bochner_roundtrip_empirical,
    classical_gram,
    hadamard_product,
    integral_form_test_classical,
    integral_form_test_quantum,
    lattice_sample_set,
    multiplier_matrix,
    pd_test_classical,
    pd_test_quantum,
    psd_report,
    quantum_gram,
    random_sample_set,
    standard_sample_sets,
)
from phasecone.semigroups import GaussianSemigroupParams, gaussian_char
from phasecone.transforms import char_function

# min/max eigenvalue of the c = 0.15 quantum Gram on lattice-50, from a
# 30-digit mpmath eigen-solve of the same matrix
C015_RATIO = -0.22007961260624792
C03_MIN_EIG = 8.55333119028732e-08


def gauss(c):
    return lambda q, p: np.exp(-c * (q * q + p * p))


def vacuum_chi(q, p):
    return np.exp(-(q * q + p * p) / 4)


@pytest.fixture(scope="module")
def sets():
    return standard_sample_sets()


class TestSampleSet:
    def test_standard_sets(self, sets):
        assert set(sets) == {"lattice-50", "random-50"}
        assert all(len(S) == 50 for S in sets.values())
        assert np.array_equal(sets["random-50"].points, standard_sample_sets()["random-50"].points)

    def test_lattice_layout(self):
        S = lattice_sample_set()
        grid = S.points[:49]
        assert np.allclose(np.unique(grid[:, 0]), np.arange(-3, 4) * 0.7)
        assert np.all(np.abs(S.points[49]) <= 2.1)

    def test_random_box(self):
        S = random_sample_set(50, 3.0, seed=5)
        assert np.all(np.abs(S.points) <= 3.0)

    @pytest.mark.parametrize("pts", [[[0, 0]], np.zeros((513, 2)) + np.arange(513)[:, None]])
    def test_size_bounds(self, pts):
        with pytest.raises(ValueError):
            SampleSet(np.asarray(pts, dtype=float))

    def test_distinct(self):
        with pytest.raises(ValueError):
            SampleSet([[0, 0], [1, 1], [0, 5e-7]])

    def test_csv_round_trip(self, sets):
        S = sets["random-50"]
        back = SampleSet.from_csv(S.to_csv())
        assert np.array_equal(back.points, S.points)
        assert S.to_csv().startswith("q,p\n")


class TestGrams:
    def test_constant_one(self, sets):
        G = classical_gram(lambda q, p: np.ones_like(q), sets["random-50"])
        assert np.array_equal(G, np.ones((50, 50)))
        assert pd_test_classical(1.0, sets["lattice-50"]).passed

    def test_classical_gaussian(self, sets):
        rep = pd_test_classical(lambda q, p: np.exp(-(q * q + p * p) / 2), sets["random-50"])
        assert rep.min_eig >= -1e-10 and rep.passed

    def test_point_mass_rank_one(self, sets):
        v = np.array([0.7, -1.3])
        chi = gaussian_char(GaussianSemigroupParams(v, 0.0), 1.0)
        G = classical_gram(chi, sets["random-50"])
        eig = np.linalg.eigvalsh(G)
        assert eig[-1] == pytest.approx(50, abs=1e-10)
        assert np.max(np.abs(eig[:-1])) < 1e-10

    def test_two_point_vacuum(self):
        S = SampleSet([[0, 0], [1, 0]])
        G = quantum_gram(vacuum_chi, S)
        assert np.allclose(G, [[1, math.exp(-0.25)], [math.exp(-0.25), 1]])
        e = math.exp(-0.25)
        assert np.allclose(np.linalg.eigvalsh(G), [1 - e, 1 + e])

    def test_multiplier_matrix(self, sets):
        S = sets["random-50"]
        M = multiplier_matrix(S)
        j, k = 3, 17
        om = symplectic_form(tuple(S.points[j]), tuple(S.points[k]))
        assert M[j, k] == pytest.approx(np.exp(0.5j * om))

    def test_quantum_reduces_to_classical(self, sets):
        S = sets["lattice-50"]
        chi = char_function_vacuum = vacuum_chi
        assert np.max(np.abs(quantum_gram(chi, S) / multiplier_matrix(S) - classical_gram(char_function_vacuum, S))) < 1e-14

    def test_analytic_hermiticity_defect(self, sets, states):
        for rho in states.values():
            rep = pd_test_quantum(char_function(rho), sets["random-50"])
            assert rep.hermiticity_defect < 1e-8

    def test_out_of_grid(self, small_grid):
        f = ComplexField.from_function(small_grid, vacuum_chi)
        with pytest.raises(OutOfGrid):
            classical_gram(f, SampleSet([[-6, 0], [6, 0]]))


class TestQuantumBochner:
    @pytest.mark.parametrize("name", ["vacuum", "coherent(1)", "fock(1)", "thermal(1)", "cat(1.5)"])
    @pytest.mark.parametrize("set_name", ["lattice-50", "random-50"])
    def test_states_pass(self, states, sets, name, set_name):
        rep = pd_test_quantum(char_function(states[name]), sets[set_name])
        assert rep.passed and rep.tolerance_used == 1e-9

    @pytest.mark.parametrize("name", ["vacuum", "coherent(1)", "fock(1)", "thermal(1)", "cat(1.5)"])
    def test_sampled_fields_pass(self, chars, sets, name):
        for S in sets.values():
            rep = pd_test_quantum(chars[name], S)
            assert rep.tolerance_used == 1e-6
            assert rep.passed, (name, rep.relative_min)

    def test_bilinear_path(self, chars, sets):
        # bilinear interpolation of a pure-state function leaks to ~1e-3 below zero
        rep = pd_test_quantum(chars["vacuum"], sets["lattice-50"], interpolation="bilinear")
        assert -1e-2 < rep.relative_min < 0

    def test_discriminator_value(self, sets):
        rep = pd_test_quantum(gauss(0.15), sets["lattice-50"])
        assert rep.verdict == "fail"
        assert rep.relative_min == pytest.approx(C015_RATIO, rel=1e-9)
        assert rep.relative_min < -1e-2
        ok = pd_test_quantum(gauss(0.3), sets["lattice-50"])
        assert ok.min_eig == pytest.approx(C03_MIN_EIG, rel=1e-5)

    @pytest.mark.parametrize("c, verdict", [(0.10, "fail"), (0.15, "fail"), (0.20, "fail"), (0.3, "pass"), (0.5, "pass")])
    def test_scale_separation(self, sets, c, verdict):
        assert pd_test_quantum(gauss(c), sets["lattice-50"]).verdict == verdict

    def test_boundary_case(self, sets):
        assert pd_test_quantum(gauss(0.25), sets["lattice-50"], tol=1e-6).passed

    def test_classically_positive(self, sets):
        assert pd_test_classical(gauss(0.15), sets["lattice-50"]).passed


class TestReport:
    def test_verdict_rule(self):
        G = np.diag([1.0, -1e-10])
        assert psd_report(G, 1e-9).passed
        assert not psd_report(G, 1e-11).passed
        # small spectra are judged against 1, not max_eig
        assert psd_report(np.diag([1e-3, -5e-10]), 1e-9).passed

    def test_json(self):
        rep = psd_report(np.eye(3), 1e-9)
        data = json.loads(rep.to_json())
        assert data["gram_dim"] == 3 and data["verdict"] == "pass"
        assert PSDReport(**data) == rep


def compact(grid, values, radius=3.0):
    Q, P = grid.mesh()
    return ComplexField(grid, np.where(Q * Q + P * P <= radius**2, values, 0))


class TestIntegralForms:
    def test_zero(self, small_grid):
        zero = ComplexField.zeros(small_grid)
        assert integral_form_test_classical(vacuum_chi, zero) == 0
        assert integral_form_test_quantum(vacuum_chi, zero) == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_classical_gaussian(self, small_grid, seed):
        phi = compact(small_grid, decaying_field(small_grid, np.random.default_rng(seed)))
        assert integral_form_test_classical(lambda q, p: np.exp(-(q * q + p * p) / 2), phi) >= -1e-8

    @pytest.mark.parametrize("seed", range(4))
    def test_quantum_vacuum(self, small_grid, seed):
        phi = compact(small_grid, decaying_field(small_grid, np.random.default_rng(seed)))
        assert integral_form_test_quantum(vacuum_chi, phi) >= -1e-6

    def test_sampled_char_matches_analytic(self, chars, grid):
        phi = compact(grid, decaying_field(grid, np.random.default_rng(9)), radius=2.0)
        exact = integral_form_test_quantum(vacuum_chi, phi)
        sampled = integral_form_test_quantum(chars["vacuum"], phi)
        assert sampled == pytest.approx(exact, abs=1e-12)

    def test_matches_naive_double_sum(self):
        g = PhaseGrid(4, 16)
        phi = compact(g, decaying_field(g, np.random.default_rng(2)), radius=1.5)
        Q, P = g.mesh()
        idx = np.argwhere(phi.values != 0)
        h4 = g.spacing**4
        total = 0
        for a in idx:
            for b in idx:
                z, zp = (Q[tuple(b)], P[tuple(b)]), (Q[tuple(a)], P[tuple(a)])
                chi = vacuum_chi(z[0] - zp[0], z[1] - zp[1])
                mult = np.exp(0.5j * symplectic_form(zp, z))
                total += chi * mult * np.conj(phi.values[tuple(a)]) * phi.values[tuple(b)] * h4
        assert integral_form_test_quantum(vacuum_chi, phi) == pytest.approx(total.real, abs=1e-13)

    def test_sub_vacuum_gaussian_detected(self, small_grid, sets):
        # the worst eigenvector of the failing Gram, spread as point masses, drives the form negative
        S = sets["lattice-50"]
        G = quantum_gram(gauss(0.15), S)
        _, vecs = np.linalg.eigh(0.5 * (G + G.conj().T))
        Q, P = small_grid.mesh()
        # lattice spacing 0.7 is not a grid multiple, so snap to the nearest nodes on a finer grid
        g = PhaseGrid(10, 200)
        vals = np.zeros((200, 200), dtype=complex)
        for (q, p), c in zip(S.points[:49], vecs[:49, 0]):
            j = int(round(q / g.spacing)) + g.origin_index
            k = int(round(p / g.spacing)) + g.origin_index
            vals[j, k] += c
        assert integral_form_test_quantum(gauss(0.15), ComplexField(g, vals)) < 0

    @pytest.mark.filterwarnings("ignore::phasecone.errors.DecayWarning")
    def test_too_many_nodes(self, small_grid):
        f = ComplexField.from_function(small_grid, lambda q, p: np.exp(-(q * q + p * p) / 8))
        with pytest.raises(ValueError):
            integral_form_test_classical(vacuum_chi, f, max_nodes=100)


class TestSchur:
    def test_identity_factor(self, chars):
        one = ComplexField.from_function(chars["vacuum"].grid, lambda q, p: np.ones_like(q))
        assert np.array_equal(hadamard_product(one, chars["vacuum"]).values, chars["vacuum"].values)

    def test_gaussian_times_vacuum(self, sets):
        prod = hadamard_product(gauss(0.3), vacuum_chi)
        assert pd_test_classical(gauss(0.3), sets["random-50"]).passed
        assert pd_test_quantum(prod, sets["random-50"]).passed

    def test_gram_identity(self, sets, states):
        S = sets["random-50"]
        chi_q = char_function(states["fock(1)"])
        prod = hadamard_product(gauss(0.3), chi_q)
        lhs = quantum_gram(prod, S)
        rhs = classical_gram(gauss(0.3), S) * quantum_gram(chi_q, S)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(
        st.floats(0.05, 2.0),
        st.floats(-0.9, 0.9),
        st.floats(0.05, 2.0),
        st.floats(-2, 2),
        st.floats(-2, 2),
        st.floats(0.0, 2.0),
    )
    def test_gaussian_times_fock1(self, s11, rho, s22, vq, vp, t):
        s12 = rho * math.sqrt(s11 * s22)
        params = GaussianSemigroupParams((vq, vp), [[s11, s12], [s12, s22]])
        chi_c = gaussian_char(params, t)
        S = random_sample_set(30, 2.5, seed=11)
        Gq = quantum_gram(lambda q, p: (1 - (q * q + p * p) / 2) * vacuum_chi(q, p), S)
        rep = psd_report(classical_gram(chi_c, S) * Gq, 1e-9)
        assert rep.passed


class TestBochnerRoundTrip:
    def test_point_mass(self, sets):
        assert bochner_roundtrip_classical((0, 0), np.zeros((2, 2)), sets["lattice-50"]).passed

    def test_standard_gaussian(self, sets):
        rep = bochner_roundtrip_classical((0, 0), np.eye(2), sets["random-50"])
        assert rep.passed and rep.tolerance_used == 1e-9

    def test_empirical(self, sets):
        rep = bochner_roundtrip_empirical((0.3, 0), [[1.0, 0.2], [0.2, 0.5]], sets["lattice-50"], samples=100_000)
        assert rep.passed and rep.tolerance_used == 1e-2

    def test_bad_covariance(self, sets):
        with pytest.raises(BadCovariance):
            bochner_roundtrip_classical((0, 0), [[1, 0], [0, -1]], sets["lattice-50"])
