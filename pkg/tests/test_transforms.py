import math
import warnings

import numpy as np
import pytest

from helpers import decaying_field
from phasecone.algebra import involution_quantum
from phasecone.errors import DecayWarning, DimensionMismatch, GridTooCoarse, NotHermitian
from phasecone.fock import (
    FockOperator,
    coherent_vector,
    hs_inner,
    identity,
    number_operator,
    op_adjoint,
    op_product,
    op_trace,
    purity,
    quadratures,
    state_cat,
    state_coherent,
    state_vacuum,
)
from phasecone.phase import ComplexField, PhaseGrid, grid_integral, l2_norm
from phasecone.transforms import (
    CharFunction,
    WignerField,
    char_at,
    dequantize,
    expectation,
    quantize,
    symplectic_fourier,
    wigner_from_state,
)

N = 64


def r2(grid):
    Q, P = grid.mesh()
    return Q * Q + P * P


def overlap(b, c):
    """<b|c> for coherent states."""
    return np.exp(-abs(b) ** 2 / 2 - np.abs(c) ** 2 / 2 + np.conj(b) * c)


def coherent_dyad_char(a, b, q, p):
    """tr(U(z)^* |a><b|) from D(beta)|a> = exp((beta conj a - conj beta a)/2)|a + beta>, beta = -alpha."""
    beta = -(q + 1j * p) / math.sqrt(2)
    return np.exp((beta * np.conj(a) - np.conj(beta) * a) / 2) * overlap(b, a + beta)


def cat_char(a0, q, p):
    norm = 2 * (1 + math.exp(-2 * abs(a0) ** 2))
    return sum(coherent_dyad_char(a, b, q, p) for a in (a0, -a0) for b in (a0, -a0)) / norm


class TestDequantize:
    def test_vacuum_closed_form(self, chars, grid):
        assert np.max(np.abs(chars["vacuum"].values - np.exp(-r2(grid) / 4))) < 1e-6

    def test_fock1_closed_form(self, chars, grid):
        x = r2(grid)
        assert np.max(np.abs(chars["fock(1)"].values - np.exp(-x / 4) * (1 - x / 2))) < 1e-10

    def test_thermal_closed_form(self, chars, grid):
        assert np.max(np.abs(chars["thermal(1)"].values - np.exp(-3 * r2(grid) / 4))) < 1e-10

    def test_cat_closed_form(self, chars, grid):
        Q, P = grid.mesh()
        assert np.max(np.abs(chars["cat(1.5)"].values - cat_char(1.5, Q, P))) < 1e-10

    def test_off_diagonal_dyad(self):
        a, b = 0.7 - 0.2j, -0.4 + 1.1j
        rho = FockOperator(np.outer(coherent_vector(a, N), coherent_vector(b, N).conj()))
        q = np.array([0.3, -1.2, 2.5])
        p = np.array([1.0, 0.4, -0.8])
        assert np.max(np.abs(char_at(rho, q, p) - coherent_dyad_char(a, b, q, p))) < 1e-12

    def test_coherent_magnitude(self, chars, grid):
        assert np.max(np.abs(np.abs(chars["coherent(1)"].values) - np.exp(-r2(grid) / 4))) < 1e-10

    def test_normalization_and_sup(self, chars):
        for name, chi in chars.items():
            assert abs(chi.origin_value - 1) < 1e-8, name
            assert abs(np.max(np.abs(chi.values)) - chi.origin_value.real) < 1e-8, name

    def test_hermitian_symmetry(self, chars):
        for chi in chars.values():
            v = chi.values
            flipped = v[np.ix_((-np.arange(v.shape[0])) % v.shape[0], (-np.arange(v.shape[1])) % v.shape[1])]
            assert np.max(np.abs(flipped[1:, 1:] - np.conj(v[1:, 1:]))) < 1e-8

    def test_tagged(self, chars):
        chi = chars["vacuum"]
        assert isinstance(chi, CharFunction) and chi.side == "char" and chi.source_dim == N

    def test_decay_warning(self, grid):
        with pytest.warns(DecayWarning):
            dequantize(state_cat(1.5, N), grid)

    def test_adjoint_intertwines_involution(self, grid):
        A = FockOperator(np.outer(coherent_vector(0.5, N), coherent_vector(-0.3 + 0.8j, N).conj()))
        lhs = dequantize(op_adjoint(A), grid)
        rhs = involution_quantum(dequantize(A, grid))
        assert np.max(np.abs(lhs.values[1:, 1:] - rhs.values[1:, 1:])) < 1e-8


class TestPurity:
    def test_purity_identity(self, chars, states):
        for name, chi in chars.items():
            norm2 = l2_norm(chi, "haar") ** 2
            assert abs(norm2 - purity(states[name])) < 1e-4, name
            assert math.sqrt(norm2) <= 1 + 1e-4


class TestQuantize:
    def test_round_trip_vacuum(self, grid):
        rho = quantize(dequantize(state_vacuum(32), grid), 32)
        assert np.max(np.abs(rho.block() - state_vacuum(32).block())) < 1e-4

    def test_zero(self, grid):
        assert np.array_equal(quantize(ComplexField.zeros(grid), 16).matrix, np.zeros((16, 16)))

    @pytest.mark.filterwarnings("ignore::phasecone.errors.DecayWarning")
    def test_adjointness(self, small_grid, rng):
        f = ComplexField(small_grid, decaying_field(small_grid, rng, width=1.0))
        n = 16
        A = np.zeros((n, n), dtype=complex)
        A[:4, :4] = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        A = FockOperator(A)
        lhs = hs_inner(quantize(f, n), A)
        chi_A = dequantize(A, small_grid)
        rhs = grid_integral(ComplexField(small_grid, np.conj(f.values) * chi_A.values), "haar")
        assert abs(lhs - rhs) < 1e-6

    def test_dimension(self, grid):
        with pytest.raises(DimensionMismatch):
            quantize(ComplexField.zeros(grid), 1)


class TestSymplecticFourier:
    def test_gaussian(self):
        g = PhaseGrid(10, 256)
        f = ComplexField.from_function(g, lambda q, p: np.exp(-(q * q + p * p) / 4))
        assert np.max(np.abs(symplectic_fourier(f).values - 2 * np.exp(-r2(g)))) < 1e-6

    def test_shifted_gaussian_phase(self, grid):
        # F_s of a translate picks up exp(i omega(z, z0))
        q0, p0 = 1.2, -0.7
        f = ComplexField.from_function(grid, lambda q, p: np.exp(-((q - q0) ** 2 + (p - p0) ** 2) / 2))
        Q, P = grid.mesh()
        expected = np.exp(1j * (Q * p0 - P * q0)) * np.exp(-(Q * Q + P * P) / 2)
        assert np.max(np.abs(symplectic_fourier(f).values - expected)) < 1e-10

    def test_involution(self, grid, rng):
        f = ComplexField(grid, decaying_field(grid, rng))
        assert np.max(np.abs(symplectic_fourier(symplectic_fourier(f)).values - f.values)) < 1e-6

    def test_parseval(self, grid, rng):
        f = ComplexField(grid, decaying_field(grid, rng))
        assert abs(l2_norm(symplectic_fourier(f)) - l2_norm(f)) < 1e-8

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_fast_matches_direct(self, small_grid, seed):
        f = ComplexField(small_grid, decaying_field(small_grid, np.random.default_rng(seed)))
        fast = symplectic_fourier(f, "fast").values
        direct = symplectic_fourier(f, "direct").values
        assert np.max(np.abs(fast - direct)) < 1e-8

    def test_aliasing_guard(self):
        with pytest.raises(GridTooCoarse):
            symplectic_fourier(ComplexField.zeros(PhaseGrid(10, 32)))

    def test_unknown_method(self, small_grid):
        with pytest.raises(ValueError):
            symplectic_fourier(ComplexField.zeros(small_grid), "slow")


def wigner_fock(n, grid):
    x = r2(grid)
    from scipy.special import eval_laguerre

    return (-1) ** n / math.pi * np.exp(-x) * eval_laguerre(n, 2 * x)


class TestWigner:
    def test_vacuum(self, grid):
        w = wigner_from_state(state_vacuum(N), grid)
        assert isinstance(w, WignerField)
        assert np.max(np.abs(w.values - np.exp(-r2(grid)) / math.pi)) < 1e-6

    def test_fock1(self, states, grid):
        w = wigner_from_state(states["fock(1)"], grid)
        assert np.max(np.abs(w.values - wigner_fock(1, grid))) < 1e-8
        assert w.origin_value.real == pytest.approx(-1 / math.pi, abs=1e-4)

    def test_normalization(self, states, grid):
        for name, rho in states.items():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DecayWarning)
                w = wigner_from_state(rho, grid)
                total = grid_integral(w)
            assert abs(total - 1) < 1e-6, name

    def test_real(self, states, grid):
        for name in ("vacuum", "coherent(1)", "fock(1)", "thermal(1)"):
            w = wigner_from_state(states[name], grid)
            assert np.max(np.abs(w.values.imag)) < 1e-8, name

    def test_real_cat_on_wide_grid(self):
        w = wigner_from_state(state_cat(1.5, N), PhaseGrid(14, 128))
        assert np.max(np.abs(w.values.imag)) < 1e-8


def observables():
    q, p = quadratures(N)
    return {"q": q, "p": p, "q2": q @ q, "p2": p @ p, "n": number_operator(N)}


@pytest.mark.filterwarnings("ignore::phasecone.errors.DecayWarning")
class TestExpectation:
    def test_identity(self, grid):
        assert expectation(identity(N), state_vacuum(N), grid) == pytest.approx(1, abs=1e-8)

    def test_position_coherent(self, grid):
        q, _ = quadratures(N)
        assert expectation(q, state_coherent(1.2, N), grid).real == pytest.approx(math.sqrt(2) * 1.2, abs=1e-5)

    def test_number_thermal(self, states, grid):
        assert expectation(number_operator(N), states["thermal(1)"], grid).real == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("obs", ["q", "p", "q2", "p2", "n"])
    @pytest.mark.parametrize("name", ["vacuum", "coherent(1)", "fock(1)", "thermal(1)", "cat(1.5)"])
    def test_against_trace(self, states, grid, name, obs):
        # the cat characteristic function needs the wider grid to decay
        g = PhaseGrid(14, 128) if name == "cat(1.5)" else grid
        A = observables()[obs]
        rho = states[name]
        assert abs(expectation(A, rho, g) - op_trace(op_product(A, rho))) < 1e-5

    def test_rejects_non_hermitian(self, grid):
        a = np.diag(np.ones(N - 1), 1)
        with pytest.raises(NotHermitian):
            expectation(FockOperator(a), state_vacuum(N), grid)
