import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from channel import ChannelAffine, apply, catalog, random_cp_channel
from decompose import EntropySetKind, lift_rotation, minimal_entropy_set, output_ellipsoid, polar_factor
from errors import DomainError, InvalidChannelError
from qstate import PAULI_VECTOR, SIGMA_X, SIGMA_Y, SIGMA_Z, bloch_to_density, random_bloch_vector


def _assert_proper(R):
    assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


class TestPolarFactor:
    def test_diagonal_map_is_its_own_normal_form(self):
        nf = polar_factor(ChannelAffine.diagonal([0.5, 0.3, 0.1]))
        assert_allclose(nf.lambdas, [0.5, 0.3, 0.1], atol=1e-15)
        assert_allclose(nf.pre_rotation, np.eye(3), atol=1e-15)
        assert_allclose(nf.post_rotation, np.eye(3), atol=1e-15)

    def test_pure_rotation(self):
        R = Rotation.from_rotvec([0.3, -0.2, 0.9]).as_matrix()
        nf = polar_factor(ChannelAffine(np.zeros(3), R))
        assert_allclose(nf.lambdas, [1.0, 1.0, 1.0], atol=1e-12)
        assert_allclose(nf.pre_rotation, np.eye(3))
        assert_allclose(nf.post_rotation, R, atol=1e-12)

    def test_negative_determinant_moves_sign_to_lambda3(self):
        nf = polar_factor(ChannelAffine.diagonal([0.5, 0.3, -0.1]))
        assert_allclose(np.abs(nf.lambdas), [0.5, 0.3, 0.1], atol=1e-15)
        assert nf.lambdas[2] < 0
        assert_allclose(nf.reconstruct(), np.diag([0.5, 0.3, -0.1]), atol=1e-14)

    def test_random_reconstruction(self, rng):
        for _ in range(200):
            channel = random_cp_channel(rng)
            nf = polar_factor(channel)
            assert_allclose(nf.reconstruct(), channel.T, atol=1e-10)
            _assert_proper(nf.pre_rotation)
            _assert_proper(nf.post_rotation)
            mags = np.abs(nf.lambdas)
            assert np.all(mags[:-1] >= mags[1:])
            assert np.all(nf.lambdas[:2] >= 0)
            assert_allclose(nf.translation, nf.post_rotation.T @ channel.t, atol=1e-15)

    def test_known_singular_values(self, rng):
        pre, post = Rotation.random(2, rng).as_matrix()
        T = post @ np.diag([0.5, 0.3, 0.1]) @ pre.T
        nf = polar_factor(ChannelAffine(np.zeros(3), T))
        assert_allclose(nf.lambdas, [0.5, 0.3, 0.1], atol=1e-12)

    def test_normal_form_preserves_output_spectrum(self, rng):
        for _ in range(50):
            channel = random_cp_channel(rng)
            nf = polar_factor(channel)
            diag = nf.diag_affine
            w = random_bloch_vector(rng).w
            out = apply(channel, bloch_to_density(w))
            out_diag = apply(diag, bloch_to_density(nf.pre_rotation.T @ w))
            assert_allclose(out.spectrum, out_diag.spectrum, atol=1e-10)

    def test_lifted_rotations_implement_the_rotations(self, rng):
        nf = polar_factor(random_cp_channel(rng))
        for R, U in ((nf.pre_rotation, nf.lifted_pre), (nf.post_rotation, nf.lifted_post)):
            for i in range(3):
                image = U @ PAULI_VECTOR[i] @ U.conj().T
                assert_allclose(image, np.einsum("j,jab->ab", R[:, i], PAULI_VECTOR), atol=1e-10)


class TestLiftRotation:
    def test_identity(self):
        assert_allclose(lift_rotation(np.eye(3)), np.eye(2), atol=1e-15)

    def test_half_turn_about_z(self):
        U = lift_rotation(np.diag([-1.0, -1.0, 1.0]))
        assert_allclose(U, np.diag([-1j, 1j]), atol=1e-12)

    def test_rotation_in_xz_plane(self):
        theta = 0.7
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        R = np.array([
            [math.cos(theta), 0.0, math.sin(theta)],
            [0.0, 1.0, 0.0],
            [-math.sin(theta), 0.0, math.cos(theta)],
        ])
        O = np.array([[c, s], [-s, c]])
        U = lift_rotation(R)
        # O^dag rho O rotates Bloch vectors by R
        assert_allclose(U, O.conj().T, atol=1e-12)

    def test_conjugation_relation(self, rng):
        for R in Rotation.random(20, rng).as_matrix():
            U = lift_rotation(R)
            assert np.linalg.det(U) == pytest.approx(1.0, abs=1e-12)
            for i, sigma in enumerate((SIGMA_X, SIGMA_Y, SIGMA_Z)):
                expected = np.einsum("j,jab->ab", R[:, i], PAULI_VECTOR)
                assert_allclose(U @ sigma @ U.conj().T, expected, atol=1e-12)

    def test_homomorphism_up_to_sign(self, rng):
        R1, R2 = Rotation.random(2, rng).as_matrix()
        product = lift_rotation(R1) @ lift_rotation(R2)
        lifted = lift_rotation(R1 @ R2)
        assert np.allclose(product, lifted, atol=1e-12) or np.allclose(product, -lifted, atol=1e-12)

    def test_improper_rotation_rejected(self):
        with pytest.raises(DomainError):
            lift_rotation(np.diag([1.0, 1.0, -1.0]))

    def test_non_orthogonal_rejected(self):
        with pytest.raises(DomainError):
            lift_rotation(2.0 * np.eye(3))


class TestMinimalEntropySet:
    def test_axis(self):
        mes = minimal_entropy_set(ChannelAffine.diagonal([0.9, 0.3, 0.2]))
        assert mes.kind is EntropySetKind.AXIS and mes.dimension == 1
        assert mes.mu == pytest.approx(0.9)
        assert_allclose(np.abs(mes.basis[:, 0]), [1.0, 0.0, 0.0], atol=1e-15)

    def test_disk(self):
        mes = minimal_entropy_set(ChannelAffine.diagonal([0.6, 0.2, 0.6]))
        assert mes.kind is EntropySetKind.DISK
        assert_allclose(mes.basis @ mes.basis.T, np.diag([1.0, 0.0, 1.0]), atol=1e-12)

    def test_sphere(self):
        mes = minimal_entropy_set(catalog("depolarizing", [0.25]))
        assert mes.kind is EntropySetKind.SPHERE
        assert mes.mu == pytest.approx(2 / 3)

    def test_rotated_axis_follows_pre_rotation(self, rng):
        pre, post = Rotation.random(2, rng).as_matrix()
        channel = ChannelAffine(np.zeros(3), post @ np.diag([0.9, 0.4, 0.1]) @ pre.T)
        direction = minimal_entropy_set(channel).basis[:, 0]
        assert abs(direction @ pre[:, 0]) == pytest.approx(1.0, abs=1e-10)

    def test_non_unital_rejected(self, fuchs):
        with pytest.raises(InvalidChannelError):
            minimal_entropy_set(fuchs)


def test_output_ellipsoid(fuchs):
    ellipsoid = output_ellipsoid(fuchs)
    assert_allclose(ellipsoid.center, [0.0, 0.0, 1 / 3])
    assert_allclose(ellipsoid.semi_axes, [1 / math.sqrt(3), 1 / 3, 0.0], atol=1e-15)
