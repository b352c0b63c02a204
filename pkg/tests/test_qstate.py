import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import DomainError, InvalidStateError
from qstate import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Z,
    BlochVector,
    DensityMatrix,
    Side,
    TwoQubitPure,
    TwoQubitState,
    bell_state,
    binary_entropy_h,
    bloch_to_density,
    density_to_bloch,
    entropy_of_bloch_length,
    eta,
    haar_pure_amplitudes,
    hermitian_eigvalsh,
    partial_trace,
    random_density,
    relative_entropy,
    schmidt_decompose,
    tensor,
    von_neumann_entropy,
)

from conftest import h


class TestBlochConversion:
    @pytest.mark.parametrize(
        "w, expected",
        [
            ([0, 0, 1], [[1, 0], [0, 0]]),
            ([0, 0, -1], [[0, 0], [0, 1]]),
            ([1, 0, 0], [[0.5, 0.5], [0.5, 0.5]]),
            ([0, 1, 0], [[0.5, -0.5j], [0.5j, 0.5]]),
            ([0, 0, 0], [[0.5, 0], [0, 0.5]]),
        ],
    )
    def test_known_states(self, w, expected):
        assert_allclose(bloch_to_density(w).entries, expected, atol=1e-15)

    def test_round_trip_random_states(self, rng):
        for _ in range(2000):
            rho = random_density(rng)
            back = bloch_to_density(density_to_bloch(rho))
            assert_allclose(back.entries, rho.entries, atol=1e-14)

    def test_pure_states_sit_on_the_sphere(self, rng):
        for _ in range(200):
            rho = random_density(rng, pure=True)
            assert rho.bloch.is_pure
            assert_allclose(rho.spectrum, [0.0, 1.0], atol=1e-12)

    def test_long_vector_rejected(self):
        with pytest.raises(InvalidStateError):
            BlochVector([1.0, 1.0, 0.0])

    def test_wrong_length_rejected(self):
        with pytest.raises(InvalidStateError):
            BlochVector([0.1, 0.2])


class TestDensityValidation:
    def test_non_hermitian(self):
        with pytest.raises(InvalidStateError, match="Hermitian"):
            DensityMatrix([[0.5, 0.1], [0.2, 0.5]])

    def test_trace(self):
        with pytest.raises(InvalidStateError, match="trace"):
            DensityMatrix(np.eye(2))

    def test_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError, match="negative"):
            DensityMatrix([[1.2, 0], [0, -0.2]])

    def test_entries_are_read_only(self):
        rho = DensityMatrix(np.eye(2) / 2)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 1.0

    def test_pure_normalizes(self):
        rho = DensityMatrix.pure([3.0, 4.0])
        assert_allclose(rho.entries, [[0.36, 0.48], [0.48, 0.64]], atol=1e-15)

    def test_unnormalized_two_qubit_pure(self):
        with pytest.raises(InvalidStateError):
            TwoQubitPure(np.eye(2))
        psi = TwoQubitPure.from_vector([1, 0, 0, 1], normalize=True)
        assert_allclose(psi.amplitudes, bell_state().amplitudes)


class TestEntropy:
    def test_pure_state_has_zero_entropy(self):
        assert von_neumann_entropy(bloch_to_density([0, 0, 1])) == pytest.approx(0.0, abs=1e-15)

    def test_maximally_mixed(self):
        assert von_neumann_entropy(DensityMatrix(IDENTITY / 2)) == pytest.approx(math.log(2), abs=1e-15)
        assert von_neumann_entropy(TwoQubitState(np.eye(4) / 4)) == pytest.approx(math.log(4), abs=1e-12)

    def test_rejects_raw_arrays(self):
        with pytest.raises(TypeError):
            von_neumann_entropy(np.eye(2) / 2)

    def test_entropy_depends_only_on_bloch_length(self, rng):
        for _ in range(100):
            rho = random_density(rng)
            r = rho.bloch.norm
            assert von_neumann_entropy(rho) == pytest.approx(h(r), abs=1e-12)
            assert entropy_of_bloch_length(r) == pytest.approx(h(r), abs=1e-12)

    def test_additive_on_products(self, rng):
        for _ in range(50):
            rho, gamma = random_density(rng), random_density(rng)
            total = von_neumann_entropy(tensor(rho, gamma))
            assert total == pytest.approx(von_neumann_entropy(rho) + von_neumann_entropy(gamma), abs=1e-10)

    def test_bell_state_marginals(self):
        rho12 = bell_state().density()
        assert von_neumann_entropy(rho12) == pytest.approx(0.0, abs=1e-12)
        for side in (Side.FIRST, Side.SECOND):
            assert von_neumann_entropy(partial_trace(rho12, side)) == pytest.approx(math.log(2), abs=1e-12)


class TestBinaryEntropy:
    @pytest.mark.parametrize(
        "mu, expected",
        [
            (0.0, math.log(2)),
            (1.0, 0.0),
            (1 / math.sqrt(2), 0.4164955307),
            (2 / 3, 0.450561208866),
            (1 / 3, 0.636514168295),
            (0.6, 0.500402423538),
            (0.5, 0.562335144619),
        ],
    )
    def test_values(self, mu, expected):
        assert binary_entropy_h(mu) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("mu", [-0.1, 1.1])
    def test_domain(self, mu):
        with pytest.raises(DomainError):
            binary_entropy_h(mu)

    def test_decreasing(self):
        values = [binary_entropy_h(mu) for mu in np.linspace(0, 1, 51)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestEta:
    def test_reduces_to_binary_entropy(self):
        for mu in (0.0, 0.2, 0.9):
            assert eta(0.5, 0.5 * mu) == pytest.approx(binary_entropy_h(mu), abs=1e-14)

    def test_symmetric_in_x(self):
        assert eta(1.25, 0.3) == pytest.approx(eta(1.25, -0.3), abs=1e-15)

    def test_difference_example(self):
        assert eta(1.25, 0.5) - eta(1.25, 1.0) == pytest.approx(0.7144533217, abs=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            eta(0.5, 0.7)
        with pytest.raises(DomainError):
            eta(-0.1, 0.0)


class TestRelativeEntropy:
    def test_zero_on_equal_states(self, rng):
        for _ in range(20):
            rho = random_density(rng)
            assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_against_maximally_mixed(self, rng):
        half = DensityMatrix(IDENTITY / 2)
        for _ in range(20):
            rho = random_density(rng)
            expected = math.log(2) - von_neumann_entropy(rho)
            assert relative_entropy(rho, half) == pytest.approx(expected, abs=1e-10)

    def test_support_violation_is_infinite(self):
        half = DensityMatrix(IDENTITY / 2)
        up = bloch_to_density([0, 0, 1])
        assert relative_entropy(half, up) == math.inf
        assert relative_entropy(up, half) == pytest.approx(math.log(2), abs=1e-12)


class TestPartialTrace:
    def test_product_state(self, rng):
        rho, gamma = random_density(rng), random_density(rng)
        rho12 = tensor(rho, gamma)
        assert_allclose(partial_trace(rho12, Side.FIRST).entries, rho.entries, atol=1e-14)
        assert_allclose(partial_trace(rho12, "2").entries, gamma.entries, atol=1e-14)

    def test_accepts_integer_side(self, rng):
        rho12 = tensor(random_density(rng), random_density(rng))
        assert_allclose(partial_trace(rho12, 1).entries, partial_trace(rho12, Side.FIRST).entries)

    def test_correlated_pure_state(self):
        a, d = 0.6, 0.8
        rho12 = TwoQubitPure(np.diag([a, d])).density()
        assert_allclose(partial_trace(rho12, Side.FIRST).entries, np.diag([a * a, d * d]), atol=1e-15)
        assert_allclose(partial_trace(rho12, Side.SECOND).entries, np.diag([a * a, d * d]), atol=1e-15)


class TestSchmidt:
    def test_product_state(self):
        form = schmidt_decompose(TwoQubitPure([[1, 0], [0, 0]]))
        assert_allclose(form.coefficients, [1.0, 0.0], atol=1e-15)

    def test_bell_state(self):
        form = schmidt_decompose(bell_state())
        assert_allclose(form.coefficients, [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_descending_coefficients(self):
        form = schmidt_decompose(TwoQubitPure([[0.6, 0], [0, 0.8]]))
        assert_allclose(form.coefficients, [0.8, 0.6], atol=1e-15)

    def test_random_states(self, rng):
        for psi_vec in haar_pure_amplitudes(rng, 200):
            psi = TwoQubitPure.from_vector(psi_vec)
            form = schmidt_decompose(psi)
            assert_allclose(form.amplitudes(), psi.amplitudes, atol=1e-12)
            marginal = partial_trace(psi.density(), Side.FIRST)
            assert_allclose(np.sort(form.coefficients ** 2), marginal.spectrum, atol=1e-12)


class TestHermitianEigvalsh:
    def test_matches_lapack(self, rng):
        for _ in range(30):
            z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            m = z + z.conj().T
            assert_allclose(hermitian_eigvalsh(m), np.linalg.eigvalsh(m), atol=1e-12)

    def test_two_by_two(self):
        assert_allclose(hermitian_eigvalsh(SIGMA_X), [-1.0, 1.0], atol=1e-15)
        assert_allclose(hermitian_eigvalsh(0.3 * SIGMA_Z + IDENTITY), [0.7, 1.3], atol=1e-15)
