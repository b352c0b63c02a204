import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel import ChannelAffine, apply, apply_product, catalog, random_unital_channel
from errors import DomainError, InvalidChannelError, NotCompletelyPositiveError
from minent import (
    COEFF_2MU_MINUS_1_SQ,
    COEFF_MU_2MU_MINUS_1,
    AsymptoticBranch,
    ProductBlockSpectrum,
    ScanKind,
    ScanResult,
    UvRule,
    additivity_scan,
    asymptotic_entropy_difference,
    block_spectrum,
    branch_value,
    entropy_curve_S,
    entropy_difference,
    entropy_difference_expanded,
    entropy_difference_lower_bound,
    entropy_difference_params,
    extreme_corners,
    extreme_points,
    max_norm,
    min_output_entropy,
    mixing_scan,
    norm_multiplicativity_scan,
    rho_diag_state,
)
from cp import check_tetrahedron
from qstate import bloch_to_density, eta, random_density, von_neumann_entropy

from conftest import h


def mu_u(mu, u):
    return ChannelAffine.diagonal([mu, u, mu])


def random_extreme_pair(rng):
    mu, nu = rng.uniform(0, 1, size=2)
    u = rng.choice(extreme_points(mu))
    v = rng.choice(extreme_points(nu))
    return mu, u, nu, v


class TestSingleChannel:
    @pytest.mark.parametrize("mu, u", [(0.5, 0.2), (0.8, 0.6), (0.3, -0.3)])
    def test_max_norm_closed_form(self, mu, u):
        assert max_norm(mu_u(mu, u)) == pytest.approx(0.5 * (1 + mu), abs=1e-14)

    def test_identity(self, identity):
        assert max_norm(identity) == pytest.approx(1.0)
        assert min_output_entropy(identity)[0] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("x", [0.0, 0.1, 0.25, 0.5, 0.75, 1.0])
    def test_depolarizing(self, x):
        value, _ = min_output_entropy(catalog("depolarizing", [x]))
        assert value == pytest.approx(h(abs(1 - 4 * x / 3)), abs=1e-12)

    def test_fuchs(self, fuchs):
        value, w = min_output_entropy(fuchs)
        assert value == pytest.approx(0.4164955307, abs=1e-8)
        assert abs(w.w[0]) == pytest.approx(math.sqrt(3) / 2, abs=1e-6)
        assert_allclose(w.w[1:], [0.0, 0.5], atol=1e-6)
        assert max_norm(fuchs) == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)), abs=1e-8)

    def test_achieving_input_attains_the_minimum(self, rng):
        channel = random_unital_channel(rng)
        value, w = min_output_entropy(channel)
        assert von_neumann_entropy(apply(channel, bloch_to_density(w))) == pytest.approx(value, abs=1e-10)

    def test_non_cp_rejected(self, transpose):
        with pytest.raises(NotCompletelyPositiveError):
            min_output_entropy(transpose)
        with pytest.raises(NotCompletelyPositiveError):
            max_norm(transpose)

    def test_unital_maps_never_decrease_entropy(self, rng):
        for _ in range(200):
            channel = random_unital_channel(rng)
            rho = random_density(rng)
            assert von_neumann_entropy(apply(channel, rho)) >= von_neumann_entropy(rho) - 1e-10


class TestBlockSpectrum:
    def test_unentangled_end(self):
        mu, u = 0.6, 0.2
        ev = block_spectrum(mu_u(mu, u), mu_u(mu, u), 0.0)
        assert_allclose(ev, [(1 + mu) ** 2 / 4, (1 - mu) ** 2 / 4, (1 - mu * mu) / 4, (1 - mu * mu) / 4], atol=1e-15)

    def test_maximally_entangled_end(self):
        mu, u = 0.6, 0.2
        ev = block_spectrum(mu_u(mu, u), mu_u(mu, u), 1.0)
        s, d = mu * mu + u * u, abs(mu * mu - u * u)
        assert_allclose(ev, [(1 + mu * mu + s) / 4, (1 + mu * mu - s) / 4,
                             (1 - mu * mu + d) / 4, (1 - mu * mu - d) / 4], atol=1e-15)

    def test_identity(self, identity):
        for t in np.linspace(0, 1, 11):
            assert_allclose(np.sort(block_spectrum(identity, identity, t)), [0, 0, 0, 1], atol=1e-15)

    def test_matches_dense_output(self, rng):
        for _ in range(300):
            phi = random_unital_channel(rng, rotate=False)
            omega = random_unital_channel(rng, rotate=False)
            t, theta = rng.uniform(), rng.uniform(0, 2 * math.pi)
            ev = block_spectrum(phi, omega, t, theta)
            dense = apply_product(phi, omega, rho_diag_state(t, theta).density())
            assert_allclose(np.sort(ev), dense.spectrum, atol=1e-10)
            assert ev.sum() == pytest.approx(1.0, abs=1e-14)

    def test_rho_diag_state(self):
        psi = rho_diag_state(0.64)
        a, d = psi.amplitudes[0, 0].real, abs(psi.amplitudes[1, 1])
        assert 4 * a * a * d * d == pytest.approx(0.64, abs=1e-14)
        assert a >= d

    def test_t_domain(self, identity):
        with pytest.raises(DomainError):
            block_spectrum(identity, identity, 1.5)

    def test_needs_unital_diagonal(self, fuchs, identity):
        with pytest.raises(InvalidChannelError):
            ProductBlockSpectrum.from_channels(fuchs, identity)


class TestEntropyCurve:
    @pytest.mark.parametrize("mu", [0.2, 0.5, 0.9])
    def test_product_end(self, mu):
        phi = ChannelAffine.diagonal([mu, mu, mu])
        assert entropy_curve_S(phi, phi, 0.0) == pytest.approx(2 * h(mu), abs=1e-12)

    def test_identity_is_flat(self, identity):
        for t in (0.0, 0.3, 1.0):
            assert entropy_curve_S(identity, identity, t) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize(
        "phi, omega",
        [
            ([0.5, 0.3, 0.5], [0.6, 0.3, 0.6]),
            ([0.2, 0.5, 0.1], [0.5, 0.2, 0.1]),
        ],
    )
    def test_matches_dense_at_critical_phase(self, phi, omega):
        phi, omega = ChannelAffine.diagonal(phi), ChannelAffine.diagonal(omega)
        spectrum = ProductBlockSpectrum.from_channels(phi, omega)
        theta = 0.0 if spectrum.gamma >= 0 else 0.5 * math.pi
        for t in np.linspace(0, 1, 11):
            dense = apply_product(phi, omega, rho_diag_state(t, theta).density())
            assert entropy_curve_S(phi, omega, t) == pytest.approx(von_neumann_entropy(dense), abs=1e-10)

    def test_concave_on_extreme_pairs(self, rng):
        grid = np.linspace(0, 1, 101)
        for _ in range(100):
            mu, u, nu, v = random_extreme_pair(rng)
            values = np.array([entropy_curve_S(mu_u(mu, u), mu_u(nu, v), t) for t in grid])
            assert np.max(np.diff(values, 2)) <= 1e-9

    def test_outer_term_nondecreasing(self, rng):
        grid = np.linspace(0, 1, 51)
        for _ in range(50):
            mu, u, nu, v = random_extreme_pair(rng)
            spectrum = ProductBlockSpectrum.from_channels(mu_u(mu, u), mu_u(nu, v))
            outer = np.array([eta(spectrum.A, spectrum.f(t)) for t in grid])
            assert np.min(np.diff(outer)) >= -1e-12


class TestEntropyDifference:
    def test_worked_example(self):
        phi = mu_u(0.5, 0.5)
        assert entropy_difference(phi, phi) == pytest.approx(0.7144533217, abs=1e-9)

    def test_equals_four_times_curve_gap(self, rng):
        for _ in range(30):
            mu, u, nu, v = random_extreme_pair(rng)
            phi, omega = mu_u(mu, u), mu_u(nu, v)
            gap = 4 * (entropy_curve_S(phi, omega, 1.0) - entropy_curve_S(phi, omega, 0.0))
            assert entropy_difference(phi, omega) == pytest.approx(gap, abs=1e-10)

    def test_expanded_form_agrees(self, rng):
        for _ in range(200):
            mu, u, nu, v = random_extreme_pair(rng)
            assert entropy_difference_expanded(mu, nu, u * v) == pytest.approx(
                entropy_difference_params(mu, nu, u * v), abs=1e-10)

    def test_positive_on_u_equals_mu(self):
        for mu in np.linspace(0.05, 0.95, 19):
            for nu in np.linspace(0.05, 0.95, 19):
                assert entropy_difference_params(mu, nu, mu * nu) > 0

    def test_needs_mu_u_mu_form(self, identity):
        with pytest.raises(InvalidChannelError):
            entropy_difference(ChannelAffine.diagonal([0.5, 0.2, 0.3]), identity)

    @pytest.mark.parametrize(
        "rule, lo, hi",
        [
            (UvRule.MU, 0.0, 1.0),
            (UvRule.MINUS_MU, 0.0, 1 / 3),
            (UvRule.TWO_MU_MINUS_1, 1 / 3, 1.0),
        ],
    )
    def test_curves_are_nonnegative(self, rule, lo, hi):
        for mu in np.linspace(lo, hi, 101):
            u = branch_value(rule, mu)
            assert entropy_difference_params(mu, mu, u * u) >= -1e-9
            assert entropy_difference_params(mu, mu, mu * u) >= -1e-9

    def test_two_channel_grid_nonnegative(self):
        grid = np.linspace(1 / 3, 1, 200)
        for mu in grid:
            for nu in grid:
                assert entropy_difference_params(mu, nu, (2 * mu - 1) * (2 * nu - 1)) >= -1e-9


class TestAsymptotics:
    def test_coefficients(self):
        assert COEFF_MU_2MU_MINUS_1 == pytest.approx(3.3398, abs=1e-4)
        assert COEFF_2MU_MINUS_1_SQ == pytest.approx(1.2274, abs=1e-4)

    @pytest.mark.parametrize("mu", [0.01, 0.03, 0.05])
    def test_minus_mu_squared(self, mu):
        exact = entropy_difference_params(mu, mu, -mu * mu)
        approx = asymptotic_entropy_difference(AsymptoticBranch.MINUS_MU_SQUARED, mu)
        assert approx == pytest.approx(4 * mu * mu)
        assert abs(exact - approx) / approx < 0.10

    @pytest.mark.parametrize("x", [0.005, 0.01, 0.02])
    def test_mu_2mu_minus_1(self, x):
        mu = 1 - x
        exact = entropy_difference_params(mu, mu, mu * (2 * mu - 1))
        approx = asymptotic_entropy_difference("uv=mu(2mu-1)", x)
        assert abs(exact - approx) / approx < 0.05

    @pytest.mark.parametrize("x", [0.005, 0.01, 0.02])
    def test_2mu_minus_1_squared(self, x):
        mu = 1 - x
        exact = entropy_difference_params(mu, mu, (2 * mu - 1) ** 2)
        approx = asymptotic_entropy_difference(AsymptoticBranch.TWO_MU_MINUS_1_SQUARED, x)
        assert abs(exact - approx) / approx < 0.05

    def test_two_variable_lower_bound(self):
        for x in np.linspace(0.001, 0.02, 20):
            for y in np.linspace(0.001, 0.02, 20):
                mu, nu = 1 - x, 1 - y
                exact = entropy_difference_params(mu, nu, (2 * mu - 1) * (2 * nu - 1))
                assert exact >= entropy_difference_lower_bound(x, y)

    def test_domain(self):
        with pytest.raises(DomainError):
            asymptotic_entropy_difference("uv=mu(2mu-1)", 0.01, 0.02)
        with pytest.raises(DomainError):
            asymptotic_entropy_difference("uv=-mu2", 0.0)


class TestExtremePoints:
    def test_small_mu(self):
        assert extreme_points(1 / 3) == pytest.approx([1 / 3, -1 / 3])

    def test_half(self):
        assert extreme_points(0.5) == pytest.approx([0.5, 0.0])

    def test_identity_corner_deduplicated(self):
        assert extreme_points(1.0) == [1.0]

    def test_points_are_cp(self):
        for mu in np.linspace(0, 1, 31):
            for u in extreme_points(mu):
                assert check_tetrahedron(mu_u(mu, u)).is_cp

    def test_corners(self):
        corners = extreme_corners(0.6)
        assert len(corners) == 6
        assert corners[1] == pytest.approx((0.6, 0.2))

    def test_domain(self):
        with pytest.raises(DomainError):
            extreme_points(1.5)

    def test_branch_range(self):
        assert branch_value("2mu-1", 0.75) == pytest.approx(0.5)
        assert branch_value(UvRule.MINUS_MU, 0.25) == pytest.approx(-0.25)
        with pytest.raises(DomainError):
            branch_value(UvRule.MINUS_MU, 0.5)
        with pytest.raises(DomainError):
            branch_value(UvRule.TWO_MU_MINUS_1, 0.2)


class TestScans:
    def test_identity_pair(self, identity):
        result = additivity_scan(identity, identity, samples=200, seed=1)
        assert result.best_value == pytest.approx(0.0, abs=1e-9)
        assert not result.violation

    def test_depolarizing_additivity(self):
        phi = catalog("depolarizing", [0.2])
        result = additivity_scan(phi, phi, samples=2000, seed=7)
        assert result.gap >= -1e-7
        assert not result.violation

    @pytest.mark.parametrize("x", [0.1, 0.5])
    def test_two_pauli_refinement_reaches_baseline(self, x):
        phi = catalog("two-pauli", [x])
        result = additivity_scan(phi, phi, samples=2000, seed=7)
        assert result.refined
        assert result.product_baseline == pytest.approx(2 * h(max(x, abs(2 * x - 1))), abs=1e-12)
        assert result.best_value == pytest.approx(2 * h(max(x, abs(2 * x - 1))), abs=1e-6)
        assert abs(result.gap) <= 1e-6

    def test_stratified_mode(self):
        phi = catalog("two-pauli", [1 / 3])
        result = additivity_scan(phi, phi, samples=1000, seed=3, mode="stratified", refine=False)
        assert not result.violation
        assert result.best_state is not None

    def test_norm_multiplicativity(self):
        phi, omega = mu_u(0.6, 0.2), catalog("depolarizing", [0.1])
        result = norm_multiplicativity_scan(phi, omega, samples=2000, seed=11)
        assert result.kind is ScanKind.NORM
        assert result.gap <= 1e-7
        assert not result.violation

    def test_fuchs_norm_multiplicativity(self, fuchs):
        result = norm_multiplicativity_scan(fuchs, fuchs, samples=2000, seed=13)
        assert result.product_baseline == pytest.approx(max_norm(fuchs) ** 2, abs=1e-12)
        assert result.product_baseline == pytest.approx((0.5 * (1 + 1 / math.sqrt(2))) ** 2, abs=1e-9)
        assert result.refined
        assert -1e-6 <= result.gap <= 1e-7
        assert not result.violation

    def test_mixing(self):
        phi = mu_u(0.6, 0.2)
        result = mixing_scan(phi, phi, samples=500, seed=5)
        assert result.best_value >= 2 * h(0.6) - 1e-8
        assert not result.refined

    def test_mixing_needs_unital(self, fuchs):
        with pytest.raises(InvalidChannelError):
            mixing_scan(fuchs, fuchs, samples=10)

    def test_zero_samples(self, identity):
        result = additivity_scan(identity, identity, samples=0)
        assert result.best_value is None and result.gap is None
        assert not result.violation
        assert result.to_dict()["best_state"] is None

    def test_reproducible(self):
        phi = catalog("two-pauli", [0.9])
        first = additivity_scan(phi, phi, samples=500, seed=42, refine=False)
        second = additivity_scan(phi, phi, samples=500, seed=42, refine=False)
        assert first.best_value == second.best_value

    @pytest.mark.slow
    def test_worker_pool_is_reproducible(self):
        phi = catalog("two-pauli", [0.9])
        first = additivity_scan(phi, phi, samples=2000, seed=42, workers=2, refine=False)
        second = additivity_scan(phi, phi, samples=2000, seed=42, workers=2, refine=False)
        assert first.best_value == second.best_value
        assert first.workers == 2

    def test_non_cp_rejected(self, transpose, identity):
        with pytest.raises(NotCompletelyPositiveError):
            additivity_scan(transpose, identity, samples=10)

    def test_violation_flag(self):
        below = ScanResult(kind=ScanKind.ADDITIVITY, best_value=0.5, best_state=None,
                           samples=1, seed=0, product_baseline=1.0)
        above = ScanResult(kind=ScanKind.NORM, best_value=0.9, best_state=None,
                           samples=1, seed=0, product_baseline=0.5)
        assert below.violation and above.violation
        assert below.to_dict()["gap"] == pytest.approx(-0.5)
