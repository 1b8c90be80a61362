import numpy as np
import pytest
from scipy.linalg import expm

from spinglue.chain import SX, SZ, spectral_norm, transverse_field_ising
from spinglue.exact import (DegenerateGroundStateError, eigendecompose, ground_and_gap,
                            heisenberg_evolve, load_decomposition, mp_resolvent,
                            overlap_x, require_unique_ground, save_decomposition,
                            spectral_function)

from conftest import random_hermitian

TFIM2_ENERGIES = np.array([-np.sqrt(10), -1.0, 1.0, np.sqrt(10)])  # closed form, J=1 h=1.5


class TestEigendecompose:
    def test_single_spin_sz(self):
        dec = eigendecompose(SZ)
        assert np.allclose(dec.energies, [-1, 1])

    def test_tfim2_matches_closed_form(self):
        ham = transverse_field_ising(2, shift_ground_to_zero=False)
        dec = eigendecompose(ham)
        assert np.allclose(dec.energies, TFIM2_ENERGIES, atol=1e-12)

    def test_zero_matrix(self):
        dec = eigendecompose(np.zeros((4, 4)))
        assert np.allclose(dec.energies, 0.0)
        assert dec.gap == 0.0

    def test_reconstruction_and_orthonormality(self, rng):
        ham = random_hermitian(rng, 16)
        dec = eigendecompose(ham)
        assert spectral_norm(dec.reconstruct() - ham) < 1e-9 * spectral_norm(ham)
        gram = dec.vectors.conj().T @ dec.vectors
        assert spectral_norm(gram - np.eye(16)) < 1e-10

    def test_rejects_non_hermitian(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        with pytest.raises(ValueError, match="Hermitian"):
            eigendecompose(m)


class TestGroundAndGap:
    def test_tfim2_gap(self):
        ham = transverse_field_ising(2, shift_ground_to_zero=False)
        e0, ground, gap = ground_and_gap(ham)
        assert abs(e0 - TFIM2_ENERGIES[0]) < 1e-12
        assert abs(gap - (TFIM2_ENERGIES[1] - TFIM2_ENERGIES[0])) < 1e-12
        assert np.linalg.norm(ham.dense @ ground - e0 * ground) < 1e-9

    def test_degenerate_warns_and_refuses(self):
        ham = -np.kron(SZ, SZ)
        with pytest.warns(UserWarning, match="gap"):
            _, _, gap = ground_and_gap(ham)
        assert gap < 1e-12
        with pytest.raises(DegenerateGroundStateError):
            require_unique_ground(ham)

    def test_two_level_gap(self):
        _, _, gap = ground_and_gap(np.diag([0.0, 3.0]))
        assert abs(gap - 3.0) < 1e-14


class TestHeisenbergEvolve:
    def test_t_zero_identity(self, rng):
        dec = eigendecompose(random_hermitian(rng, 8))
        a = random_hermitian(rng, 8)
        assert np.array_equal(heisenberg_evolve(dec, a, 0.0), a)

    def test_pauli_rotation_against_expm(self):
        # oracle: direct 2x2 matrix exponentials
        dec = eigendecompose(SZ)
        t = np.pi / 2
        got = heisenberg_evolve(dec, SX, t)
        u = expm(1j * t * SZ)
        assert spectral_norm(got - u @ SX @ u.conj().T) < 1e-12

    def test_norm_preserved(self, rng):
        dec = eigendecompose(random_hermitian(rng, 8))
        a = random_hermitian(rng, 8)
        t = float(rng.normal())
        assert abs(spectral_norm(heisenberg_evolve(dec, a, t)) - spectral_norm(a)) < 1e-10


class TestMpResolvent:
    def test_annihilates_ground(self):
        dec = eigendecompose(transverse_field_ising(3))
        r = mp_resolvent(dec, dec.ground_energy)
        assert np.linalg.norm(r @ dec.ground_state) < 1e-10

    def test_excited_action(self):
        dec = eigendecompose(np.diag([0.0, 2.0, 5.0]))
        r = mp_resolvent(dec, 0.0)
        e1 = np.array([0.0, 1.0, 0.0])
        assert np.allclose(r @ e1, e1 / (0.0 - 2.0))

    def test_resolvent_identity_tfim3(self):
        # oracle: matrix-product identity on the excited subspace
        ham = transverse_field_ising(3, shift_ground_to_zero=False)
        dec = eigendecompose(ham)
        r = mp_resolvent(dec, dec.ground_energy)
        p = np.outer(dec.ground_state, dec.ground_state.conj())
        lhs = r @ (dec.ground_energy * np.eye(8) - ham.dense)
        assert spectral_norm(lhs - (np.eye(8) - p)) < 1e-9

    def test_omega_mismatch(self):
        dec = eigendecompose(np.diag([0.0, 1.0]))
        with pytest.raises(ValueError, match="ground"):
            mp_resolvent(dec, 0.5)


class TestSpectralFunction:
    def test_identity_function(self):
        ham = transverse_field_ising(2, shift_ground_to_zero=False)
        dec = eigendecompose(ham)
        assert spectral_norm(spectral_function(dec, lambda e: e) - ham.dense) < 1e-10

    def test_constant_one(self):
        dec = eigendecompose(transverse_field_ising(2))
        assert spectral_norm(spectral_function(dec, lambda e: 1.0) - np.eye(4)) < 1e-12

    def test_exponential_matches_heisenberg(self, rng):
        # f(E) = e^{itE} must reproduce unitary conjugation
        dec = eigendecompose(random_hermitian(rng, 8))
        a = random_hermitian(rng, 8)
        t = 0.7
        u = spectral_function(dec, lambda e: np.exp(1j * t * e))
        assert spectral_norm(u @ a @ u.conj().T - heisenberg_evolve(dec, a, t)) < 1e-9


class TestOverlapX:
    def test_same_size_is_one(self):
        ham = transverse_field_ising(3)
        g = eigendecompose(ham).ground_state
        rep = overlap_x(g, g)
        assert abs(rep.x_prime - 1.0) < 1e-10

    def test_block_overlap_against_dense_oracle(self):
        # oracle: direct dense reduced-density computation
        from spinglue.chain import partial_trace
        g4 = eigendecompose(transverse_field_ising(4)).ground_state
        g8 = eigendecompose(transverse_field_ising(8)).ground_state
        rep = overlap_x(g4, g8, placement=2)
        rho = partial_trace(np.outer(g8, g8.conj()), (2, 5), 8)
        expected = float(np.real(g4.conj() @ rho @ g4))
        assert abs(rep.x_prime - expected) < 1e-10
        assert 0.0 < rep.x_prime < 1.0

    def test_optimize_dominates_x_prime(self):
        g4 = eigendecompose(transverse_field_ising(4)).ground_state
        g8 = eigendecompose(transverse_field_ising(8)).ground_state
        rep = overlap_x(g4, g8, placement=2, optimize=True, l=1)
        assert rep.optimized_x >= rep.x_prime - 1e-10

    def test_boundary_width_rejected(self):
        g4 = eigendecompose(transverse_field_ising(4)).ground_state
        g8 = eigendecompose(transverse_field_ising(8)).ground_state
        with pytest.raises(ValueError, match="boundary width"):
            overlap_x(g4, g8, placement=2, optimize=True, l=2)

    def test_ascent_improves_generic_states(self, rng):
        # random complex states exercise several monotone rounds; the
        # internal guard raises if the objective ever decreases
        a = rng.normal(size=16) + 1j * rng.normal(size=16)
        a /= np.linalg.norm(a)
        b = rng.normal(size=64) + 1j * rng.normal(size=64)
        b /= np.linalg.norm(b)
        rep = overlap_x(a, b, placement=1, optimize=True, l=1)
        assert rep.rounds >= 2
        assert rep.optimized_x > rep.x_prime + 1e-3


class TestDecompositionCache:
    def test_round_trip(self, rng, tmp_path):
        dec = eigendecompose(random_hermitian(rng, 8))
        path = tmp_path / "dec.bin"
        save_decomposition(dec, path)
        back = load_decomposition(path)
        assert np.allclose(back.energies, dec.energies)
        assert np.allclose(back.vectors, dec.vectors)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a cache file")
        with pytest.raises(ValueError, match="cache"):
            load_decomposition(path)
