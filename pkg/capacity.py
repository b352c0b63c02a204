"""
Capacity Module for QChan
=========================
Classical information capacities of qubit maps:
1. Holevo quantity and Holevo capacity (closed form for unital maps,
   multi-start Nelder-Mead over two- and three-state ensembles otherwise)
2. Shannon capacity over two-state ensembles and projective measurements
3. Binary classical channels and the l1 = 0 classical limit
4. Fixed points and the ellipse geometry of the axial splaying family
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import entr, rel_entr

from channel import ChannelAffine, apply, as_affine
from config import (
    CAPACITY_MAX_ITER,
    CAPACITY_PRIOR_GRID,
    CAPACITY_SPHERE_STARTS,
    CAPACITY_XATOL,
    GEOMETRY_XATOL,
    MAX_ENSEMBLE_SIZE,
    PSD_TOL,
    STATE_TOL,
    UNITAL_TOL,
)
from cp import require_cp
from decompose import polar_factor
from errors import DomainError, InvalidChannelError, InvalidStateError, NoFixedPointError
from qstate import (
    IDENTITY,
    PAULI_VECTOR,
    BlochVector,
    DensityMatrix,
    bloch_to_density,
    density_to_bloch,
    entropy_of_bloch_length,
    hermitian_eigvalsh,
    von_neumann_entropy,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Data Models
# =============================================================================

@dataclass(frozen=True, eq=False)
class Ensemble:
    """Input ensemble {pi_i, rho_i}."""
    priors: Tuple[float, ...]
    states: Tuple[DensityMatrix, ...]

    def __post_init__(self):
        priors = tuple(float(p) for p in self.priors)
        states = tuple(self.states)
        if not 1 <= len(priors) <= MAX_ENSEMBLE_SIZE:
            raise InvalidStateError(f"Ensemble size must be 1 to {MAX_ENSEMBLE_SIZE}, got {len(priors)}")
        if len(states) != len(priors):
            raise InvalidStateError(f"{len(priors)} priors for {len(states)} states")
        if min(priors) < -STATE_TOL:
            raise InvalidStateError(f"Negative prior {min(priors)}")
        if abs(sum(priors) - 1.0) > STATE_TOL:
            raise InvalidStateError(f"Priors sum to {sum(priors):.15g}, expected 1")
        object.__setattr__(self, "priors", tuple(max(p, 0.0) for p in priors))
        object.__setattr__(self, "states", states)

    @classmethod
    def from_bloch(cls, priors: Sequence[float], vectors: Sequence[Sequence[float]]) -> "Ensemble":
        return cls(tuple(priors), tuple(bloch_to_density(w) for w in vectors))

    @property
    def bloch_vectors(self) -> np.ndarray:
        return np.array([density_to_bloch(s).w for s in self.states])

    def max_overlap(self) -> float:
        """Largest |<psi_i|psi_j>| between distinct pure members, from their Bloch vectors."""
        w = self.bloch_vectors
        best = 0.0
        for i in range(len(w)):
            for j in range(i + 1, len(w)):
                best = max(best, math.sqrt(max(0.0, 0.5 * (1.0 + float(w[i] @ w[j])))))
        return best


@dataclass(frozen=True, eq=False)
class Povm:
    elements: Tuple[np.ndarray, ...]

    def __post_init__(self):
        elements = tuple(np.array(e, dtype=complex) for e in self.elements)
        total = sum(elements)
        if np.max(np.abs(total - IDENTITY)) > PSD_TOL:
            raise InvalidStateError("POVM elements do not sum to the identity")
        for k, e in enumerate(elements):
            if np.max(np.abs(e - e.conj().T)) > PSD_TOL or hermitian_eigvalsh(e)[0] < -PSD_TOL:
                raise InvalidStateError(f"POVM element {k} is not positive semidefinite")
        object.__setattr__(self, "elements", elements)

    @classmethod
    def projective(cls, axis: Sequence[float]) -> "Povm":
        """E_+- = 1/2 [I +- n . sigma]."""
        n = np.asarray(axis, dtype=float)
        n = n / np.linalg.norm(n)
        n_sigma = np.einsum("k,kab->ab", n, PAULI_VECTOR)
        return cls((0.5 * (IDENTITY + n_sigma), 0.5 * (IDENTITY - n_sigma)))

    @property
    def axis(self) -> np.ndarray:
        """Bloch axis of the first element of a projective pair."""
        return np.real(np.einsum("kab,ba->k", PAULI_VECTOR, self.elements[0] - self.elements[1])) / 2.0

    def probabilities(self, rho: DensityMatrix) -> np.ndarray:
        return np.array([np.real(np.trace(rho.entries @ e)) for e in self.elements])


@dataclass(frozen=True, eq=False)
class EllipseGeometry:
    """Image of the Bloch sphere under T = diag(l1, 0, l3), t = (0, 0, t)."""
    endpoints: np.ndarray
    endpoint_length: float
    min_entropy_points: np.ndarray
    min_entropy_inputs: np.ndarray
    level_circle_radius: float

    @property
    def endpoint_entropy(self) -> float:
        return entropy_of_bloch_length(self.endpoint_length)

    @property
    def min_entropy(self) -> float:
        return entropy_of_bloch_length(self.level_circle_radius)


# =============================================================================
# Helpers
# =============================================================================

def _h(r: np.ndarray) -> np.ndarray:
    """Entropy of a qubit state of Bloch length r, vectorized."""
    r = np.clip(r, 0.0, 1.0)
    return entr(0.5 * (1.0 + r)) + entr(0.5 * (1.0 - r))


def _sphere(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _angles(w: np.ndarray) -> Tuple[float, float]:
    w = w / np.linalg.norm(w)
    return math.acos(max(-1.0, min(1.0, float(w[2])))), math.atan2(float(w[1]), float(w[0]))


def _prior_angle(pi: float) -> float:
    """p with cos^2 p = pi."""
    return math.acos(math.sqrt(min(max(pi, 0.0), 1.0)))


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform deterministic points on the unit sphere."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    points = []
    for i in range(n):
        z = 1.0 - (2.0 * i + 1.0) / n
        r = math.sqrt(max(0.0, 1.0 - z * z))
        points.append((r * math.cos(golden * i), r * math.sin(golden * i), z))
    return np.array(points)


def _chi(t: np.ndarray, T: np.ndarray, priors: np.ndarray, inputs: np.ndarray) -> float:
    outputs = t + inputs @ T.T
    average = priors @ outputs
    return float(_h(np.linalg.norm(average)) - priors @ _h(np.linalg.norm(outputs, axis=1)))


def _nelder_mead(objective, starts: List[np.ndarray]) -> Tuple[float, np.ndarray]:
    best_value, best_x = math.inf, None
    for x0 in starts:
        result = minimize(
            objective, x0, method="Nelder-Mead",
            options={"maxiter": CAPACITY_MAX_ITER, "xatol": CAPACITY_XATOL, "fatol": CAPACITY_XATOL ** 2},
        )
        if result.fun < best_value:
            best_value, best_x = float(result.fun), result.x
    return best_value, best_x


def _capacity_starts(with_measurement: bool, channel: ChannelAffine) -> List[np.ndarray]:
    """Fibonacci directions x prior grid, second input antipodal to the first."""
    starts = []
    for w in fibonacci_sphere(CAPACITY_SPHERE_STARTS):
        theta1, phi1 = _angles(w)
        theta2, phi2 = _angles(-w)
        for pi in CAPACITY_PRIOR_GRID:
            x = [_prior_angle(pi), theta1, phi1, theta2, phi2]
            if with_measurement:
                image = channel.T @ w
                x.extend(_angles(image if np.linalg.norm(image) > STATE_TOL else w))
            starts.append(np.array(x))
    return starts


# =============================================================================
# Holevo
# =============================================================================

def holevo_quantity(channel: ChannelAffine, ensemble: Ensemble) -> float:
    """chi = S(sum pi_i Phi(rho_i)) - sum pi_i S(Phi(rho_i))."""
    channel = as_affine(channel)
    outputs = [apply(channel, rho) for rho in ensemble.states]
    average = DensityMatrix(sum(p * out.entries for p, out in zip(ensemble.priors, outputs)))
    return von_neumann_entropy(average) - sum(p * von_neumann_entropy(out) for p, out in zip(ensemble.priors, outputs))


def _unital_optimal_ensemble(channel: ChannelAffine) -> Ensemble:
    w_mu = polar_factor(channel).pre_rotation[:, 0]
    return Ensemble.from_bloch((0.5, 0.5), (w_mu, -w_mu))


def _two_state(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p, theta1, phi1, theta2, phi2 = x[:5]
    pi = math.cos(p) ** 2
    return np.array([pi, 1.0 - pi]), np.array([_sphere(theta1, phi1), _sphere(theta2, phi2)])


def _three_state(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a, b = x[0], x[1]
    priors = np.array([math.cos(a) ** 2, math.sin(a) ** 2 * math.cos(b) ** 2, math.sin(a) ** 2 * math.sin(b) ** 2])
    inputs = np.array([_sphere(x[2 + 2 * k], x[3 + 2 * k]) for k in range(3)])
    return priors, inputs


def holevo_capacity(channel: ChannelAffine) -> Tuple[float, Ensemble]:
    """
    sup over ensembles of chi.

    Unital maps use the antipodal ensemble along the largest singular direction;
    other maps run 20 Nelder-Mead starts over two-state ensembles followed by a
    three-state pass seeded from the best two-state ensemble.
    """
    channel = as_affine(channel)
    require_cp(channel)
    if channel.is_unital:
        ensemble = _unital_optimal_ensemble(channel)
        return holevo_quantity(channel, ensemble), ensemble

    t, T = channel.t, channel.T

    def neg_chi2(x):
        return -_chi(t, T, *_two_state(x))

    def neg_chi3(x):
        return -_chi(t, T, *_three_state(x))

    value2, x2 = _nelder_mead(neg_chi2, _capacity_starts(False, channel))
    priors, inputs = _two_state(x2)
    logger.info(f"Two-state Holevo optimum {-value2:.12g} from {CAPACITY_SPHERE_STARTS * len(CAPACITY_PRIOR_GRID)} starts")

    third = -(inputs[0] + inputs[1])
    third = third / np.linalg.norm(third) if np.linalg.norm(third) > STATE_TOL else np.array([0.0, 1.0, 0.0])
    seed3 = [x2[0], 0.0, *_angles(inputs[0]), *_angles(inputs[1]), *_angles(third)]
    value3, x3 = _nelder_mead(neg_chi3, [np.array(seed3)])
    if value3 < value2 - CAPACITY_XATOL:
        logger.info(f"Three-state ensemble improves Holevo quantity to {-value3:.12g}")
        priors, inputs = _three_state(x3)

    ensemble = Ensemble.from_bloch(priors / priors.sum(), inputs)
    _check_mirror_priors(channel, ensemble)
    return holevo_quantity(channel, ensemble), ensemble


def _check_mirror_priors(channel: ChannelAffine, ensemble: Ensemble):
    """Mirror-symmetric splaying maps are expected, not proven, to have equal optimal priors."""
    try:
        l1, _, _ = _splaying_parameters(channel)
    except InvalidChannelError:
        return
    if l1 <= STATE_TOL or len(ensemble.priors) != 2:
        return
    gap = abs(ensemble.priors[0] - 0.5)
    if gap > 1e-4:
        logger.warning(f"Optimal priors ({ensemble.priors[0]:.6f}, {ensemble.priors[1]:.6f}) break the x -> -x symmetry")


def orthogonal_holevo_capacity(channel: ChannelAffine) -> Tuple[float, Ensemble]:
    """sup of chi over ensembles of two orthogonal pure states."""
    channel = as_affine(channel)
    require_cp(channel)
    if channel.is_unital:
        ensemble = _unital_optimal_ensemble(channel)
        return holevo_quantity(channel, ensemble), ensemble

    t, T = channel.t, channel.T

    def antipodal(x):
        w = _sphere(x[1], x[2])
        pi = math.cos(x[0]) ** 2
        return np.array([pi, 1.0 - pi]), np.array([w, -w])

    starts = [
        np.array([_prior_angle(pi), *_angles(w)])
        for w in fibonacci_sphere(CAPACITY_SPHERE_STARTS)
        for pi in CAPACITY_PRIOR_GRID
    ]
    _, x = _nelder_mead(lambda x: -_chi(t, T, *antipodal(x)), starts)
    ensemble = Ensemble.from_bloch(*antipodal(x))
    return holevo_quantity(channel, ensemble), ensemble


# =============================================================================
# Shannon
# =============================================================================

def mutual_information(priors: Sequence[float], transition: np.ndarray) -> float:
    """I(X; Y) with transition[i, j] = P(y = j | x = i)."""
    priors = np.asarray(priors, dtype=float)
    transition = np.asarray(transition, dtype=float)
    output = priors @ transition
    return float(np.sum(priors[:, None] * rel_entr(transition, output[None, :])))


def _measurement_transition(t: np.ndarray, T: np.ndarray, inputs: np.ndarray, axis: np.ndarray) -> np.ndarray:
    plus = 0.5 * (1.0 + (t + inputs @ T.T) @ axis)
    plus = np.clip(plus, 0.0, 1.0)
    return np.stack([plus, 1.0 - plus], axis=1)


def shannon_capacity(channel: ChannelAffine) -> Tuple[float, Ensemble, Povm]:
    """sup over two-state ensembles and projective measurements of the mutual information."""
    channel = as_affine(channel)
    require_cp(channel)
    t, T = channel.t, channel.T

    def unpack(x):
        priors, inputs = _two_state(x)
        return priors, inputs, _sphere(x[5], x[6])

    def neg_info(x):
        priors, inputs, axis = unpack(x)
        return -mutual_information(priors, _measurement_transition(t, T, inputs, axis))

    nf = polar_factor(channel)
    w_mu = nf.pre_rotation[:, 0]
    image = T @ w_mu
    axis = image if np.linalg.norm(image) > STATE_TOL else np.array([0.0, 0.0, 1.0])
    analytic = np.array([_prior_angle(0.5), *_angles(w_mu), *_angles(-w_mu), *_angles(axis)])

    starts = [analytic] + _capacity_starts(True, channel)
    _, x = _nelder_mead(neg_info, starts)
    priors, inputs, axis = unpack(x)
    value = mutual_information(priors, _measurement_transition(t, T, inputs, axis))
    return value, Ensemble.from_bloch(priors, inputs), Povm.projective(axis)


def binary_channel_capacity(matrix: np.ndarray) -> Tuple[float, float]:
    """Capacity and optimal prior of input 0 for a 2x2 column-stochastic matrix M[j, i] = P(j | i)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (2, 2) or np.min(matrix) < -PSD_TOL or np.max(np.abs(matrix.sum(axis=0) - 1.0)) > STATE_TOL:
        raise DomainError("Expected a 2x2 column-stochastic matrix")
    transition = matrix.T

    result = minimize_scalar(
        lambda pi: -mutual_information([pi, 1.0 - pi], transition),
        bounds=(0.0, 1.0), method="bounded", options={"xatol": GEOMETRY_XATOL},
    )
    return float(-result.fun), float(result.x)


# =============================================================================
# Fixed point and ellipse geometry
# =============================================================================

def fixed_point(channel: ChannelAffine) -> BlochVector:
    """w* with t + T w* = w*; the maximally mixed state for unital maps."""
    channel = as_affine(channel)
    if channel.is_unital:
        return BlochVector(np.zeros(3))

    system = np.eye(3) - channel.T
    try:
        w = np.linalg.solve(system, channel.t)
    except np.linalg.LinAlgError:
        logger.warning("I - T is singular; falling back to least squares for the fixed point")
        w = np.linalg.lstsq(system, channel.t, rcond=None)[0]

    residual = float(np.linalg.norm(channel.t + channel.T @ w - w))
    if residual > 1e-12:
        raise NoFixedPointError(f"t is not in the range of I - T (residual {residual:.3e})")
    return BlochVector(w)


def _splaying_parameters(channel: ChannelAffine) -> Tuple[float, float, float]:
    channel = as_affine(channel)
    T, t = channel.T, channel.t
    if not (channel.is_diagonal and abs(T[1, 1]) <= UNITAL_TOL and abs(t[0]) <= UNITAL_TOL and abs(t[1]) <= UNITAL_TOL):
        raise InvalidChannelError("Ellipse geometry needs T = diag(l1, 0, l3) and t = (0, 0, t)")
    return abs(float(T[0, 0])), float(T[2, 2]), float(t[2])


def ellipse_geometry(channel: ChannelAffine) -> EllipseGeometry:
    """
    Endpoints A+- = (+-l1, 0, t) and the points C+- of maximal Bloch length.

    With input (sqrt(1 - s^2), 0, s) the squared output length is
    l1^2 + t^2 + 2 t l3 s + (l3^2 - l1^2) s^2, maximized in closed form when
    it is strictly concave and numerically when it is (nearly) linear.
    """
    l1, l3, t = _splaying_parameters(channel)

    def length_sq(s: float) -> float:
        return l1 * l1 * (1.0 - s * s) + (t + l3 * s) ** 2

    curvature = l1 * l1 - l3 * l3
    s_star: Optional[float] = None
    if curvature > 1e-12:
        candidate = t * l3 / curvature
        if abs(candidate) < 1.0:
            s_star = candidate
    elif abs(curvature) <= 1e-12:
        result = minimize_scalar(lambda s: -length_sq(s), bounds=(-1.0, 1.0), method="bounded",
                                 options={"xatol": GEOMETRY_XATOL})
        if abs(result.x) < 1.0 - GEOMETRY_XATOL and l1 > 0:
            s_star = float(result.x)

    if s_star is None:
        s_star = 1.0 if length_sq(1.0) >= length_sq(-1.0) else -1.0

    if abs(s_star) < 1.0 and l1 > 0:
        x = math.sqrt(1.0 - s_star * s_star)
        inputs = np.array([[x, 0.0, s_star], [-x, 0.0, s_star]])
    else:
        inputs = np.array([[0.0, 0.0, s_star]])
    points = np.column_stack([l1 * inputs[:, 0], np.zeros(len(inputs)), t + l3 * inputs[:, 2]])

    return EllipseGeometry(
        endpoints=np.array([[l1, 0.0, t], [-l1, 0.0, t]]),
        endpoint_length=math.hypot(l1, t),
        min_entropy_points=points,
        min_entropy_inputs=inputs,
        level_circle_radius=math.sqrt(max(length_sq(s_star), 0.0)),
    )
