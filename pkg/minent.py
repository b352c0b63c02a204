"""
Minimal Output Entropy Module for QChan
=======================================
Output norms and entropies of qubit maps and their products:
1. Maximal output norm M_Phi and minimal output entropy of a single map
2. Closed-form block spectrum of (Phi (x) Omega) on a|00> + e^{i theta} d|11>
3. The entropy curve S(t), entropy differences 4[S(1) - S(0)] and their asymptotics
4. Extreme points of the (mu, u) region
5. Randomized additivity / multiplicativity / mixing scans with Nelder-Mead refinement
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation
from scipy.special import entr, xlogy

from channel import ChannelAffine, DiagonalChannel, apply_product, as_affine
from config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    REFINE_ITERATIONS,
    REFINE_ROUNDS,
    REFINE_TOL,
    SCAN_BATCH_SIZE,
    SPHERE_ASCENT_MAX_ITER,
    SPHERE_ASCENT_TOL,
    STATE_TOL,
    UNITAL_TOL,
    VIOLATION_TOL,
)
from cp import require_cp
from decompose import lift_rotation, minimal_entropy_set, polar_factor
from errors import DomainError, InvalidChannelError
from qstate import (
    PAULI_PRODUCTS,
    BlochVector,
    TwoQubitPure,
    entropy_of_bloch_length,
    eta,
    haar_pure_amplitudes,
    hermitian_eigvalsh,
    schmidt_decompose,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)

ChannelLike = Union[ChannelAffine, DiagonalChannel]

LN4 = math.log(4.0)

# 4[S(1) - S(0)] ~ 3x ln(1/x) + C x for uv = mu(2mu - 1), x = 1 - mu
COEFF_MU_2MU_MINUS_1 = 7.0 * (1.0 + math.log(4.0)) - 6.0 * math.log(3.0) - 4.0 * (1.0 + math.log(2.0))
# 4[S(1) - S(0)] ~ 4x ln(1/x) + C x for uv = (2mu - 1)^2
COEFF_2MU_MINUS_1_SQ = 4.0 * (1.0 - math.log(2.0))

# Maps e3 to e1; the diagonal-family states have their Schmidt axis along e3
_Z_TO_X = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


# =============================================================================
# Data Models
# =============================================================================

class ScanKind(str, Enum):
    ADDITIVITY = "additivity"
    NORM = "norm"
    MIXING = "mixing"


class SamplingMode(str, Enum):
    HAAR = "haar"
    STRATIFIED = "stratified"


class UvRule(str, Enum):
    """Extreme-point branches u(mu) for Phi[mu, u, mu]."""
    MU = "mu"
    MINUS_MU = "-mu"
    TWO_MU_MINUS_1 = "2mu-1"


class AsymptoticBranch(str, Enum):
    MINUS_MU_SQUARED = "uv=-mu2"
    MU_2MU_MINUS_1 = "uv=mu(2mu-1)"
    TWO_MU_MINUS_1_SQUARED = "uv=(2mu-1)2"


@dataclass(frozen=True)
class ProductBlockSpectrum:
    """
    Spectrum of (Phi (x) Omega)(|psi><psi|) for psi = a|00> + e^{i theta} d|11>.

    The output splits into an outer block on {|00>, |11>} with eigenvalues
    1/4 [A +- f(t)] and an inner block on {|01>, |10>} with 1/4 [B +- g(t)],
    where t = 4 a^2 d^2.
    """
    lambdas: Tuple[float, float, float]
    omegas: Tuple[float, float, float]
    theta: float = 0.0

    @classmethod
    def from_channels(cls, phi: ChannelLike, omega: ChannelLike, theta: float = 0.0) -> "ProductBlockSpectrum":
        return cls(_unital_diagonal(phi), _unital_diagonal(omega), float(theta))

    @property
    def A(self) -> float:
        return 1.0 + self.lambdas[2] * self.omegas[2]

    @property
    def B(self) -> float:
        return 1.0 - self.lambdas[2] * self.omegas[2]

    @property
    def _plus_minus(self) -> Tuple[float, float, float, float]:
        l1, l2, _ = self.lambdas
        w1, w2, _ = self.omegas
        return l1 + l2, l1 - l2, w1 + w2, w1 - w2

    @property
    def gamma(self) -> float:
        lp, lm, wp, wm = self._plus_minus
        return lp * lm * wp * wm

    def _radius(self, t: float, axial: float, first: float, second: float) -> float:
        cross = 2.0 * math.cos(2.0 * self.theta) * self.gamma
        value = (1.0 - t) * axial ** 2 + 0.25 * t * (first + second + cross)
        return math.sqrt(max(value, 0.0))

    def f(self, t: float) -> float:
        t = _check_t(t)
        lp, lm, wp, wm = self._plus_minus
        return self._radius(t, self.lambdas[2] + self.omegas[2], (lp * wp) ** 2, (lm * wm) ** 2)

    def g(self, t: float) -> float:
        t = _check_t(t)
        lp, lm, wp, wm = self._plus_minus
        return self._radius(t, self.lambdas[2] - self.omegas[2], (lp * wm) ** 2, (lm * wp) ** 2)

    def eigenvalues(self, t: float) -> np.ndarray:
        """[outer +, outer -, inner +, inner -]."""
        f, g = self.f(t), self.g(t)
        return 0.25 * np.array([self.A + f, self.A - f, self.B + g, self.B - g])


@dataclass(frozen=True, eq=False)
class ScanResult:
    kind: ScanKind
    best_value: Optional[float]
    best_state: Optional[TwoQubitPure]
    samples: int
    seed: int
    product_baseline: float
    workers: int = 1
    mode: SamplingMode = SamplingMode.HAAR
    refined: bool = False
    tolerance: float = VIOLATION_TOL

    @property
    def gap(self) -> Optional[float]:
        """best - baseline; negative means below the product value."""
        if self.best_value is None:
            return None
        return self.best_value - self.product_baseline

    @property
    def violation(self) -> bool:
        if self.gap is None:
            return False
        if self.kind is ScanKind.NORM:
            return self.gap > self.tolerance
        return self.gap < -self.tolerance

    def to_dict(self) -> dict:
        state = None
        if self.best_state is not None:
            state = [[z.real, z.imag] for z in self.best_state.vector]
        return {
            "kind": self.kind.value,
            "mode": self.mode.value,
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
            "refined": self.refined,
            "best_value": self.best_value,
            "product_baseline": self.product_baseline,
            "gap": self.gap,
            "tolerance": self.tolerance,
            "violation": self.violation,
            "best_state": state,
        }


# =============================================================================
# Helpers
# =============================================================================

def _check_t(t: float) -> float:
    if t < -STATE_TOL or t > 1.0 + STATE_TOL:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    return min(max(float(t), 0.0), 1.0)


def _unital_diagonal(channel: ChannelLike) -> Tuple[float, float, float]:
    channel = as_affine(channel)
    if not (channel.is_unital and channel.is_diagonal):
        raise InvalidChannelError("Block spectra need unital maps with diagonal T")
    return tuple(float(x) for x in channel.lambdas)


def _mu_u_form(channel: ChannelLike) -> Tuple[float, float]:
    l1, l2, l3 = _unital_diagonal(channel)
    if abs(l1 - l3) > UNITAL_TOL or l1 < abs(l2) - UNITAL_TOL:
        raise InvalidChannelError(f"Expected Phi[mu, u, mu] with mu >= |u|, got Phi[{l1}, {l2}, {l3}]")
    return l1, l2


# =============================================================================
# Single-channel norm and entropy
# =============================================================================

def _lattice_starts() -> np.ndarray:
    grid = np.array([(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1) if (i, j, k) != (0, 0, 0)], dtype=float)
    return grid / np.linalg.norm(grid, axis=1, keepdims=True)


def _sphere_ascent(channel: ChannelAffine) -> Tuple[float, np.ndarray]:
    """
    Maximize |t + T w| over |w| = 1 from 26 lattice starts.

    Each step w <- T^T (t + T w) / |T^T (t + T w)| never decreases the convex
    objective, so every start climbs to a stationary point.
    """
    t, T = channel.t, channel.T
    w = _lattice_starts()
    for iteration in range(SPHERE_ASCENT_MAX_ITER):
        grad = (t + w @ T.T) @ T
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        w_next = np.where(norms > 0, grad / np.where(norms > 0, norms, 1.0), w)
        step = float(np.max(np.linalg.norm(w_next - w, axis=1)))
        w = w_next
        if step < SPHERE_ASCENT_TOL:
            break
    else:
        logger.warning(f"Sphere ascent stopped after {SPHERE_ASCENT_MAX_ITER} iterations (step {step:.2e})")

    lengths = np.linalg.norm(t + w @ T.T, axis=1)
    best = int(np.argmax(lengths))
    return float(lengths[best]), w[best]


def max_output_bloch_length(channel: ChannelLike) -> Tuple[float, BlochVector]:
    """Largest |t + T w| over pure inputs, with an achieving input direction."""
    channel = as_affine(channel)
    if channel.is_unital:
        nf = polar_factor(channel)
        return float(abs(nf.lambdas[0])), BlochVector(nf.pre_rotation[:, 0])
    length, w = _sphere_ascent(channel)
    return length, BlochVector(w)


def max_norm(channel: ChannelLike) -> float:
    """M_Phi = sup_rho ||Phi(rho)||, the largest output eigenvalue."""
    require_cp(channel)
    length, _ = max_output_bloch_length(channel)
    return 0.5 * (1.0 + length)


def min_output_entropy(channel: ChannelLike) -> Tuple[float, BlochVector]:
    """inf_rho S(Phi(rho)) = h(largest output Bloch length), with an achieving input."""
    require_cp(channel)
    length, w = max_output_bloch_length(channel)
    return entropy_of_bloch_length(length), w


# =============================================================================
# Block spectra and entropy curves
# =============================================================================

def rho_diag_state(t: float, theta: float = 0.0) -> TwoQubitPure:
    """a|00> + e^{i theta} d|11> with a^2 = (1 + sqrt(1 - t)) / 2, so that t = 4 a^2 d^2."""
    t = _check_t(t)
    alpha = 0.5 * (1.0 + math.sqrt(1.0 - t))
    a, d = math.sqrt(alpha), math.sqrt(1.0 - alpha)
    return TwoQubitPure(np.array([[a, 0.0], [0.0, d * np.exp(1j * theta)]]))


def block_spectrum(phi: ChannelLike, omega: ChannelLike, t: float, theta: float = 0.0) -> np.ndarray:
    return ProductBlockSpectrum.from_channels(phi, omega, theta).eigenvalues(t)


def _critical_theta(spectrum: ProductBlockSpectrum) -> float:
    return 0.0 if spectrum.gamma >= 0 else 0.5 * math.pi


def entropy_curve_S(phi: ChannelLike, omega: ChannelLike, t: float) -> float:
    """S(t) = 1/4 eta(A, f(t)) + 1/4 eta(B, g(t)) + ln 4 at the entropy-minimizing phase."""
    spectrum = ProductBlockSpectrum.from_channels(phi, omega)
    spectrum = ProductBlockSpectrum(spectrum.lambdas, spectrum.omegas, _critical_theta(spectrum))
    return 0.25 * eta(spectrum.A, spectrum.f(t)) + 0.25 * eta(spectrum.B, spectrum.g(t)) + LN4


def entropy_difference_params(mu: float, nu: float, uv: float) -> float:
    """4[S(1) - S(0)] for Phi[mu, u, mu] (x) Omega[nu, v, nu]; depends on u, v only through uv."""
    return (
        eta(1.0 + mu * nu, mu * nu + uv)
        - eta(1.0 + mu * nu, mu + nu)
        + eta(1.0 - mu * nu, mu * nu - uv)
        - eta(1.0 - mu * nu, mu - nu)
    )


def entropy_difference_expanded(mu: float, nu: float, uv: float) -> float:
    """Same quantity written out term by term in x ln x."""
    return float(
        -xlogy(1.0 + 2.0 * mu * nu + uv, 1.0 + 2.0 * mu * nu + uv)
        - xlogy(1.0 - 2.0 * mu * nu + uv, 1.0 - 2.0 * mu * nu + uv)
        - 2.0 * xlogy(1.0 - uv, 1.0 - uv)
        + 2.0 * xlogy(1.0 + mu, 1.0 + mu)
        + 2.0 * xlogy(1.0 - mu, 1.0 - mu)
        + 2.0 * xlogy(1.0 + nu, 1.0 + nu)
        + 2.0 * xlogy(1.0 - nu, 1.0 - nu)
    )


def entropy_difference(phi: ChannelLike, omega: ChannelLike) -> float:
    mu, u = _mu_u_form(phi)
    nu, v = _mu_u_form(omega)
    return entropy_difference_params(mu, nu, u * v)


def asymptotic_entropy_difference(branch: Union[AsymptoticBranch, str], x: float, y: Optional[float] = None) -> float:
    """
    Leading-order behaviour of 4[S(1) - S(0)] near the ends of the extreme branches.

    MINUS_MU_SQUARED expands around mu = x -> 0 (with y = nu for uv = -mu nu);
    the other branches expand in x = 1 - mu (and y = 1 - nu).
    """
    branch = AsymptoticBranch(branch)
    if x <= 0 or (y is not None and y <= 0):
        raise DomainError("Expansion variables must be positive")

    if branch is AsymptoticBranch.MINUS_MU_SQUARED:
        return 4.0 * x * x if y is None else 2.0 * (x * x + y * y)
    if branch is AsymptoticBranch.MU_2MU_MINUS_1:
        if y is not None:
            raise DomainError(f"{branch.value} has a one-variable expansion only")
        return 3.0 * x * math.log(1.0 / x) + COEFF_MU_2MU_MINUS_1 * x
    if y is None:
        return 4.0 * x * math.log(1.0 / x) + COEFF_2MU_MINUS_1_SQ * x
    return (
        2.0 * (x * math.log(x) + y * math.log(y) - 2.0 * (x + y) * math.log(x + y))
        + (x + y) * (2.0 + 2.0 * math.log(2.0))
    )


def entropy_difference_lower_bound(x: float, y: float) -> float:
    """2(x + y): convexity bound on the (2mu-1)(2nu-1) expansion."""
    return 2.0 * (x + y)


# =============================================================================
# Extreme points
# =============================================================================

def extreme_points(mu: float) -> List[float]:
    """Admissible extreme u for Phi[mu, u, mu]: {mu, -mu} below 1/3, {mu, 2mu - 1} above."""
    if mu < -STATE_TOL or mu > 1.0 + STATE_TOL:
        raise DomainError(f"mu must lie in [0, 1], got {mu}")
    mu = min(max(mu, 0.0), 1.0)
    candidates = [mu, -mu] if mu <= 1.0 / 3.0 + STATE_TOL else [mu, 2.0 * mu - 1.0]

    points: List[float] = []
    for u in candidates:
        if all(abs(u - p) > STATE_TOL for p in points):
            points.append(u)
    return points


def extreme_corners(mu: float) -> List[Tuple[float, float]]:
    """Six corners of the convex region containing (u, v) pairs at a given mu."""
    return [
        (mu, mu), (mu, 2 * mu - 1), (2 * mu - 1, mu),
        (-mu, -mu), (-mu, 1 - 2 * mu), (1 - 2 * mu, -mu),
    ]


def branch_value(rule: Union[UvRule, str], mu: float) -> float:
    """u for the named extreme branch, checked against the range where it is extreme."""
    rule = UvRule(rule)
    if mu < -STATE_TOL or mu > 1.0 + STATE_TOL:
        raise DomainError(f"mu must lie in [0, 1], got {mu}")
    third = 1.0 / 3.0
    if rule is UvRule.MINUS_MU:
        if mu > third + STATE_TOL:
            raise DomainError(f"u = -mu is an extreme point only for mu <= 1/3, got {mu}")
        return -mu
    if rule is UvRule.TWO_MU_MINUS_1:
        if mu < third - STATE_TOL:
            raise DomainError(f"u = 2mu-1 is an extreme point only for mu >= 1/3, got {mu}")
        return 2.0 * mu - 1.0
    return mu


# =============================================================================
# Batched product-channel evaluation
# =============================================================================

def _output_spectra(phi_matrix: np.ndarray, omega_matrix: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of (Phi (x) Omega)(|psi><psi|) for a stack of psi (n, 4)."""
    rho = np.einsum("na,nb->nab", amplitudes, amplitudes.conj())
    coeffs = np.einsum("ijab,nba->nij", PAULI_PRODUCTS, rho).real
    mapped = phi_matrix @ coeffs @ omega_matrix.T
    out = 0.25 * np.einsum("nij,ijab->nab", mapped, PAULI_PRODUCTS)
    return np.linalg.eigvalsh(out)


def _objective(kind: ScanKind, spectra: np.ndarray) -> np.ndarray:
    """Quantity to minimize: output entropy, or minus the largest eigenvalue."""
    if kind is ScanKind.NORM:
        return -spectra[:, -1]
    return np.sum(entr(np.clip(spectra, 0.0, None)), axis=1)


def _rotation_taking_z_to(n: np.ndarray) -> Rotation:
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(z, n)
    sin_angle = float(np.linalg.norm(axis))
    cos_angle = float(np.dot(z, n))
    if sin_angle < STATE_TOL:
        return Rotation.identity() if cos_angle > 0 else Rotation.from_rotvec([math.pi, 0.0, 0.0])
    return Rotation.from_rotvec(axis / sin_angle * math.atan2(sin_angle, cos_angle))


def _diag_family(rng: np.random.Generator, count: int, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """(U1 (x) U2)(a|00> + e^{i theta} d|11>) with t stratified over [0, 1]."""
    t = (np.arange(count) + rng.uniform(size=count)) / max(count, 1)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=count)
    alpha = 0.5 * (1.0 + np.sqrt(1.0 - t))
    amps = np.zeros((count, 2, 2), dtype=complex)
    amps[:, 0, 0] = np.sqrt(alpha)
    amps[:, 1, 1] = np.sqrt(1.0 - alpha) * np.exp(1j * theta)
    if u1.ndim == 2:
        u1 = np.broadcast_to(u1, (count, 2, 2))
        u2 = np.broadcast_to(u2, (count, 2, 2))
    rotated = u1 @ amps @ np.transpose(u2, (0, 2, 1))
    return rotated.reshape(count, 4)


def _random_lifts_into(rng: np.random.Generator, basis: np.ndarray, count: int) -> np.ndarray:
    """SU(2) lifts of random rotations R with R e3 in span(basis)."""
    coords = rng.standard_normal((count, basis.shape[1]))
    directions = coords @ basis.T
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    twists = rng.uniform(0.0, 2.0 * math.pi, size=count)
    lifts = np.empty((count, 2, 2), dtype=complex)
    for k in range(count):
        R = _rotation_taking_z_to(directions[k]) * Rotation.from_rotvec([0.0, 0.0, twists[k]])
        lifts[k] = lift_rotation(R.as_matrix())
    return lifts


@dataclass(frozen=True)
class _ScanJob:
    kind: ScanKind
    mode: SamplingMode
    phi_matrix: np.ndarray
    omega_matrix: np.ndarray
    samples: int
    seed: int
    index: int
    lift_phi: np.ndarray
    lift_omega: np.ndarray
    basis_phi: Optional[np.ndarray] = None
    basis_omega: Optional[np.ndarray] = None


def _draw(job: _ScanJob, rng: np.random.Generator, count: int) -> np.ndarray:
    if job.kind is ScanKind.MIXING:
        u1 = _random_lifts_into(rng, job.basis_phi, count)
        u2 = _random_lifts_into(rng, job.basis_omega, count)
        return _diag_family(rng, count, u1, u2)
    if job.mode is SamplingMode.STRATIFIED:
        return _diag_family(rng, count, job.lift_phi, job.lift_omega)
    return haar_pure_amplitudes(rng, count)


def _scan_worker(job: _ScanJob) -> Tuple[Optional[float], Optional[np.ndarray]]:
    """Best objective value and amplitudes over this worker's share of the samples."""
    rng = np.random.default_rng(np.random.SeedSequence([job.seed, job.index]))
    best_value, best_amps = None, None
    remaining = job.samples
    while remaining > 0:
        count = min(remaining, SCAN_BATCH_SIZE)
        amps = _draw(job, rng, count)
        values = _objective(job.kind, _output_spectra(job.phi_matrix, job.omega_matrix, amps))
        k = int(np.argmin(values))
        if best_value is None or values[k] < best_value:
            best_value, best_amps = float(values[k]), amps[k].copy()
        remaining -= count
    return best_value, best_amps


# =============================================================================
# Refinement on the pure-state and product manifolds
# =============================================================================

def _amplitudes_from_params(x: np.ndarray) -> np.ndarray:
    a, b, c, p1, p2, p3 = x
    moduli = np.array([
        math.cos(a),
        math.sin(a) * math.cos(b),
        math.sin(a) * math.sin(b) * math.cos(c),
        math.sin(a) * math.sin(b) * math.sin(c),
    ])
    return moduli * np.exp(1j * np.array([0.0, p1, p2, p3]))


def _params_from_amplitudes(psi: np.ndarray) -> np.ndarray:
    r = np.abs(psi)
    phases = np.angle(psi) - np.angle(psi[0])
    a = math.atan2(math.sqrt(r[1] ** 2 + r[2] ** 2 + r[3] ** 2), r[0])
    b = math.atan2(math.hypot(r[2], r[3]), r[1])
    c = math.atan2(r[3], r[2])
    return np.array([a, b, c, phases[1], phases[2], phases[3]])


def _schmidt_factors(psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Dominant Schmidt pair of psi."""
    form = schmidt_decompose(TwoQubitPure.from_vector(psi, normalize=True))
    return form.left_basis[:, 0], form.right_basis[:, 0]


def _qubit_angles(v: np.ndarray) -> Tuple[float, float]:
    return 2.0 * math.atan2(abs(v[1]), abs(v[0])), float(np.angle(v[1]) - np.angle(v[0]))


def _qubit_from_angles(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2.0), np.exp(1j * phi) * math.sin(theta / 2.0)])


def _product_amplitudes(y: np.ndarray) -> np.ndarray:
    return np.kron(_qubit_from_angles(y[0], y[1]), _qubit_from_angles(y[2], y[3]))


def _refine(kind: ScanKind, phi_matrix: np.ndarray, omega_matrix: np.ndarray,
            psi: np.ndarray, value: float) -> Tuple[float, np.ndarray]:
    """
    Nelder-Mead on the 6-parameter pure-state manifold, then on the 4-parameter
    product manifold through the dominant Schmidt pair of the incumbent.
    """
    def evaluate(amps: np.ndarray) -> float:
        return float(_objective(kind, _output_spectra(phi_matrix, omega_matrix, amps[None, :]))[0])

    def improve(to_amps, x: np.ndarray, best: Tuple[float, np.ndarray]) -> Tuple[float, np.ndarray]:
        def objective(y: np.ndarray) -> float:
            return evaluate(to_amps(y))

        for _ in range(REFINE_ROUNDS):
            result = minimize(
                objective, x, method="Nelder-Mead",
                options={"maxiter": REFINE_ITERATIONS, "xatol": REFINE_TOL, "fatol": REFINE_TOL},
            )
            x = result.x
            if result.fun < best[0]:
                best = (float(result.fun), to_amps(result.x))
        return best

    best = improve(_amplitudes_from_params, _params_from_amplitudes(psi), (value, psi))

    left, right = _schmidt_factors(best[1])
    product = np.kron(left, right)
    product_value = evaluate(product)
    if product_value < best[0]:
        best = (product_value, product)
    y = np.array([*_qubit_angles(left), *_qubit_angles(right)])
    best = improve(_product_amplitudes, y, best)

    logger.info(f"Refinement moved {kind.value} objective from {value:.12g} to {best[0]:.12g}")
    return best


# =============================================================================
# Scans
# =============================================================================

def _split(samples: int, workers: int) -> List[int]:
    return [samples // workers + (1 if k < samples % workers else 0) for k in range(workers)]


def _run_scan(kind: ScanKind, phi: ChannelLike, omega: ChannelLike, samples: Optional[int],
              seed: Optional[int], workers: Optional[int], mode: Union[SamplingMode, str],
              refine: bool, baseline: float, tolerance: Optional[float]) -> ScanResult:
    phi, omega = as_affine(phi), as_affine(omega)
    samples = DEFAULT_SAMPLES if samples is None else int(samples)
    seed = DEFAULT_SEED if seed is None else int(seed)
    workers = max(1, DEFAULT_WORKERS if workers is None else int(workers))
    mode = SamplingMode(mode)
    tolerance = VIOLATION_TOL if tolerance is None else tolerance
    if samples < 0:
        raise DomainError(f"samples must be non-negative, got {samples}")

    common = dict(kind=kind, mode=mode, samples=samples, seed=seed, workers=workers,
                  product_baseline=baseline, tolerance=tolerance)
    if samples == 0:
        return ScanResult(best_value=None, best_state=None, **common)

    pre_phi, pre_omega = polar_factor(phi).pre_rotation, polar_factor(omega).pre_rotation
    basis_phi = basis_omega = None
    if kind is ScanKind.MIXING:
        basis_phi = minimal_entropy_set(phi).basis
        basis_omega = minimal_entropy_set(omega).basis

    jobs = [
        _ScanJob(kind, mode, phi.matrix, omega.matrix, share, seed, index,
                 lift_rotation(pre_phi @ _Z_TO_X), lift_rotation(pre_omega @ _Z_TO_X),
                 basis_phi, basis_omega)
        for index, share in enumerate(_split(samples, workers))
    ]
    if workers == 1:
        results = [_scan_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_worker, jobs))
    for index, (value, _) in enumerate(results):
        logger.info(f"{kind.value} scan worker {index}: {jobs[index].samples} samples, best {value}")

    value, psi = min((r for r in results if r[0] is not None), key=lambda r: r[0])
    refined = refine and kind is not ScanKind.MIXING
    if refined:
        value, psi = _refine(kind, phi.matrix, omega.matrix, psi, value)

    state = TwoQubitPure.from_vector(psi, normalize=True)
    output = apply_product(phi, omega, state.density())
    if kind is ScanKind.NORM:
        best_value = float(hermitian_eigvalsh(output.entries)[-1])
    else:
        best_value = von_neumann_entropy(output)

    return ScanResult(best_value=best_value, best_state=state, refined=refined, **common)


def additivity_scan(phi: ChannelLike, omega: ChannelLike, samples: Optional[int] = None,
                    seed: Optional[int] = None, workers: Optional[int] = None,
                    mode: Union[SamplingMode, str] = SamplingMode.HAAR, refine: bool = True,
                    tolerance: Optional[float] = None) -> ScanResult:
    """Search for entangled inputs with S((Phi (x) Omega)(rho)) below the product minimum."""
    require_cp(phi)
    require_cp(omega)
    baseline = min_output_entropy(phi)[0] + min_output_entropy(omega)[0]
    return _run_scan(ScanKind.ADDITIVITY, phi, omega, samples, seed, workers, mode, refine, baseline, tolerance)


def norm_multiplicativity_scan(phi: ChannelLike, omega: ChannelLike, samples: Optional[int] = None,
                               seed: Optional[int] = None, workers: Optional[int] = None,
                               mode: Union[SamplingMode, str] = SamplingMode.HAAR, refine: bool = True,
                               tolerance: Optional[float] = None) -> ScanResult:
    """Search for inputs whose largest output eigenvalue exceeds M_Phi M_Omega."""
    require_cp(phi)
    require_cp(omega)
    baseline = max_norm(phi) * max_norm(omega)
    return _run_scan(ScanKind.NORM, phi, omega, samples, seed, workers, mode, refine, baseline, tolerance)


def mixing_scan(phi: ChannelLike, omega: ChannelLike, samples: Optional[int] = None,
                seed: Optional[int] = None, workers: Optional[int] = None,
                tolerance: Optional[float] = None) -> ScanResult:
    """
    Output entropy of entangled states whose marginals lie in L(Phi) x L(Omega).

    States are (U1 (x) U2)(a|00> + e^{i theta} d|11>) with U_k lifts of rotations
    carrying e3 into the minimal-entropy set.
    """
    require_cp(phi)
    require_cp(omega)
    baseline = min_output_entropy(phi)[0] + min_output_entropy(omega)[0]
    return _run_scan(ScanKind.MIXING, phi, omega, samples, seed, workers, SamplingMode.STRATIFIED,
                     False, baseline, tolerance)
