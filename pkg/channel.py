"""
Channel Module for QChan
========================
Qubit stochastic maps in three representations:
1. KrausSet      - operator-sum form, Phi(rho) = sum A_k^dag rho A_k
2. ChannelAffine - Stokes form w -> t + T w (canonical internal representation)
3. DiagonalChannel - Phi[l1, l2, l3] with optional translation

plus application to one- and two-qubit states and the built-in catalog.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from config import CROSS_CHECK_TOL, MAX_KRAUS_OPS, PSD_TOL, STATE_TOL, TP_TOL, UNITAL_TOL
from errors import InvalidChannelError, InvalidStateError, NotCompletelyPositiveError
from qstate import (
    IDENTITY,
    PAULI,
    PAULI_PRODUCTS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    TwoQubitState,
    bloch_to_density,
    density_to_bloch,
)

logger = logging.getLogger(__name__)

# LEVI_CIVITA[i, j, k] = epsilon_ijk over the three Pauli indices
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0


# =============================================================================
# Data Models
# =============================================================================

class KrausConvention(str, Enum):
    ADJOINT = "adjoint"    # Phi(rho) = sum A^dag rho A ; TP iff sum A A^dag = I
    STANDARD = "standard"  # Phi(rho) = sum A rho A^dag ; TP iff sum A^dag A = I


class CatalogName(str, Enum):
    AMPLITUDE_DAMPING = "amplitude-damping"
    DEPOLARIZING = "depolarizing"
    FUCHS = "fuchs"
    IDENTITY = "identity"
    PHASE_DAMPING = "phase-damping"
    ROTATION = "rotation"
    SPLAYING_FAMILY = "splaying-family"
    TWO_PAULI = "two-pauli"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChannelAffine:
    """Action w -> t + T w on Bloch vectors; 4x4 form [[1, 0], [t, T]]."""
    t: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(-1)
        T = np.array(self.T, dtype=float)
        if t.shape != (3,) or T.shape != (3, 3):
            raise InvalidChannelError(f"Affine channel needs t of shape (3,) and T of shape (3, 3), got {t.shape} and {T.shape}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(T))):
            raise InvalidChannelError("Affine channel has non-finite entries")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "T", _readonly(T))

    @classmethod
    def identity(cls) -> "ChannelAffine":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def diagonal(cls, lambdas: Sequence[float], t: Sequence[float] = (0.0, 0.0, 0.0)) -> "ChannelAffine":
        """Phi[l1, l2, l3] + t, without any positivity check (the transpose is a valid value)."""
        return cls(np.asarray(t, dtype=float), np.diag(np.asarray(lambdas, dtype=float)))

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((4, 4))
        m[0, 0] = 1.0
        m[1:, 0] = self.t
        m[1:, 1:] = self.T
        return m

    @property
    def is_unital(self) -> bool:
        return float(np.linalg.norm(self.t)) <= UNITAL_TOL

    @property
    def is_diagonal(self) -> bool:
        return float(np.max(np.abs(self.T - np.diag(np.diag(self.T))))) <= UNITAL_TOL

    @property
    def lambdas(self) -> np.ndarray:
        return np.diag(self.T).copy()

    def to_diagonal(self) -> "DiagonalChannel":
        if not self.is_diagonal:
            raise InvalidChannelError("T is not diagonal; use decompose.polar_factor for the normal form")
        return DiagonalChannel(self.lambdas, self.t)


@dataclass(frozen=True, eq=False)
class DiagonalChannel:
    """Phi[l1, l2, l3] with translation t'; unital ones must lie in the CP tetrahedron."""
    lambdas: np.ndarray
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        t = np.array(self.t, dtype=float).reshape(-1)
        if lam.shape != (3,) or t.shape != (3,):
            raise InvalidChannelError("DiagonalChannel needs three lambdas and a 3-vector t")
        if float(np.linalg.norm(t)) <= UNITAL_TOL:
            l1, l2, l3 = lam
            if abs(l1 + l2) > abs(1 + l3) + PSD_TOL or abs(l1 - l2) > abs(1 - l3) + PSD_TOL:
                raise InvalidChannelError(
                    f"Phi[{l1:.6g}, {l2:.6g}, {l3:.6g}] violates |l1 +- l2| <= |1 +- l3|"
                )
        object.__setattr__(self, "lambdas", _readonly(lam))
        object.__setattr__(self, "t", _readonly(t))

    @property
    def affine(self) -> ChannelAffine:
        return ChannelAffine.diagonal(self.lambdas, self.t)

    @property
    def is_unital(self) -> bool:
        return float(np.linalg.norm(self.t)) <= UNITAL_TOL


@dataclass(frozen=True, eq=False)
class KrausSet:
    """
    Operator-sum form of a channel.

    Operators are stored as given; `adjoint_ops` always returns them in the
    Phi(rho) = sum A^dag rho A convention used by every formula in this package.
    """
    ops: Tuple[np.ndarray, ...]
    convention: KrausConvention = KrausConvention.ADJOINT

    def __post_init__(self):
        ops = tuple(_readonly(np.array(a, dtype=complex)) for a in self.ops)
        if not 1 <= len(ops) <= MAX_KRAUS_OPS:
            raise InvalidChannelError(f"Kraus set needs 1 to {MAX_KRAUS_OPS} operators, got {len(ops)}")
        for k, a in enumerate(ops):
            if a.shape != (2, 2):
                raise InvalidChannelError(f"Kraus operator {k} must be 2x2, got shape {a.shape}")
            if not np.all(np.isfinite(a)):
                raise InvalidChannelError(f"Kraus operator {k} has non-finite entries")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "convention", KrausConvention(self.convention))

        stack = self.adjoint_ops
        deviation = float(np.max(np.abs(np.einsum("kab,kcb->ac", stack, stack.conj()) - IDENTITY)))
        if deviation > TP_TOL:
            raise InvalidChannelError(f"Kraus set is not trace preserving (deviation {deviation:.3e})")

    @classmethod
    def from_standard(cls, ops: Sequence) -> "KrausSet":
        """Kraus operators written for Phi(rho) = sum A rho A^dag."""
        return cls(tuple(ops), KrausConvention.STANDARD)

    @property
    def adjoint_ops(self) -> np.ndarray:
        stack = np.stack(self.ops)
        if self.convention is KrausConvention.STANDARD:
            return np.conj(np.transpose(stack, (0, 2, 1)))
        return stack

    @property
    def is_unital(self) -> bool:
        stack = self.adjoint_ops
        return float(np.max(np.abs(np.einsum("kba,kbc->ac", stack.conj(), stack) - IDENTITY))) <= TP_TOL

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        """Linear action sum A^dag m A on an arbitrary 2x2 matrix."""
        stack = self.adjoint_ops
        return np.einsum("kba,bc,kcd->ad", stack.conj(), np.asarray(m, dtype=complex), stack)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(self.apply_matrix(rho.entries))


def as_affine(channel: Union[ChannelAffine, DiagonalChannel]) -> ChannelAffine:
    if isinstance(channel, DiagonalChannel):
        return channel.affine
    if not isinstance(channel, ChannelAffine):
        raise InvalidChannelError(f"Expected a channel, got {type(channel).__name__}")
    return channel


# =============================================================================
# Conversions
# =============================================================================

def _affine_from_gram(ops: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inner-product formulas on the Stokes vectors v_kj = 1/2 Tr(sigma_j A_k)."""
    v = 0.5 * np.einsum("jab,kba->kj", PAULI, ops)
    gram = v.conj().T @ v
    g_diag = gram.diagonal().real

    T = 2.0 * gram[1:, 1:].real - 2.0 * np.einsum("ijk,k->ij", LEVI_CIVITA, gram[0, 1:].imag)
    T[np.diag_indices(3)] = 2.0 * g_diag[1:] + g_diag[0] - g_diag[1:].sum()

    twist = np.cross(v[:, 1:].real, v[:, 1:].imag).sum(axis=0)
    t = 2.0 * gram[0, 1:].real - 2.0 * twist
    return t, T


def _affine_from_basis_action(kraus: KrausSet) -> Tuple[np.ndarray, np.ndarray]:
    """T_ij = 1/2 Tr(sigma_i Phi(sigma_j)), t_i = 1/2 Tr(sigma_i Phi(I))."""
    images = np.stack([kraus.apply_matrix(s) for s in PAULI])
    m = 0.5 * np.real(np.einsum("iab,jba->ij", PAULI, images))
    return m[1:, 0], m[1:, 1:]


def kraus_to_affine(kraus: KrausSet) -> ChannelAffine:
    """Stokes form of a Kraus set, computed two ways and cross-checked."""
    t, T = _affine_from_gram(kraus.adjoint_ops)
    t_direct, T_direct = _affine_from_basis_action(kraus)

    mismatch = max(float(np.max(np.abs(t - t_direct))), float(np.max(np.abs(T - T_direct))))
    if mismatch > CROSS_CHECK_TOL:
        raise InvalidChannelError(f"Kraus conversion cross-check failed (mismatch {mismatch:.3e})")

    logger.debug(f"Converted {len(kraus.adjoint_ops)} Kraus operators (cross-check mismatch {mismatch:.1e})")
    return ChannelAffine(t, T)


# =============================================================================
# Application
# =============================================================================

def apply(channel: ChannelAffine, rho: DensityMatrix) -> DensityMatrix:
    """Phi(rho): Bloch vector w -> t + T w."""
    w_out = channel.t + channel.T @ density_to_bloch(rho).w
    length = float(np.linalg.norm(w_out))
    if length > 1.0 + 2.0 * PSD_TOL:
        raise NotCompletelyPositiveError(
            f"Output Bloch length {length:.12g} exceeds 1; the map is not positive"
        )
    if length > 1.0:
        w_out = w_out / length
    return bloch_to_density(w_out)


def product_matrix(phi: ChannelAffine, omega: ChannelAffine, m: np.ndarray) -> np.ndarray:
    """
    Linear extension of Phi (x) Omega to any 4x4 matrix, no validation.

    m = 1/4 sum c_ij sigma_i (x) sigma_j is mapped coefficient-wise by
    c -> M_Phi c M_Omega^T with M the 4x4 Stokes matrices.
    """
    coeffs = np.einsum("ijab,ba->ij", PAULI_PRODUCTS, np.asarray(m, dtype=complex))
    mapped = phi.matrix @ coeffs @ omega.matrix.T
    return 0.25 * np.einsum("ij,ijab->ab", mapped, PAULI_PRODUCTS)


def apply_product(phi: ChannelAffine, omega: ChannelAffine, rho12: TwoQubitState) -> TwoQubitState:
    out = product_matrix(phi, omega, rho12.entries)
    out = 0.5 * (out + out.conj().T)
    try:
        return TwoQubitState(out)
    except InvalidStateError as exc:
        raise NotCompletelyPositiveError(f"Product map produced an invalid state: {exc}") from exc


# =============================================================================
# Random channels
# =============================================================================

# Conjugation by I, sigma_x, sigma_y, sigma_z
_TETRAHEDRON_CORNERS = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
])


def random_tetrahedron_lambdas(rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the CP tetrahedron of unital diagonal maps."""
    return rng.dirichlet(np.ones(4)) @ _TETRAHEDRON_CORNERS


def random_unital_channel(rng: np.random.Generator, rotate: bool = True) -> ChannelAffine:
    lambdas = random_tetrahedron_lambdas(rng)
    if not rotate:
        return ChannelAffine.diagonal(lambdas)
    pre, post = Rotation.random(2, rng).as_matrix()
    return ChannelAffine(np.zeros(3), post @ np.diag(lambdas) @ pre.T)


def random_cp_channel(rng: np.random.Generator) -> ChannelAffine:
    """Convex mixture of a random unital map and a rotated amplitude damping; CP by convexity."""
    unital = random_unital_channel(rng)
    gamma = float(rng.uniform(0.0, 1.0))
    c = math.sqrt(1.0 - gamma)
    pre, post = Rotation.random(2, rng).as_matrix()
    damping_t = post @ np.array([0.0, 0.0, gamma])
    damping_T = post @ np.diag([c, c, 1.0 - gamma]) @ pre.T

    p = float(rng.uniform(0.0, 1.0))
    return ChannelAffine(p * unital.t + (1.0 - p) * damping_t, p * unital.T + (1.0 - p) * damping_T)


# =============================================================================
# Catalog
# =============================================================================

@dataclass(frozen=True)
class CatalogEntry:
    name: CatalogName
    params: Tuple[str, ...]
    formula: str
    param_range: str
    cp_note: str
    build: Callable[..., ChannelAffine] = field(repr=False, compare=False)
    optional_params: Tuple[str, ...] = ()


def _depolarizing(x: float) -> ChannelAffine:
    lam = 1.0 - 4.0 * x / 3.0
    return ChannelAffine.diagonal([lam, lam, lam])


def _two_pauli(x: float) -> ChannelAffine:
    return ChannelAffine.diagonal([x, x, 2.0 * x - 1.0])


def _phase_damping(x: float) -> ChannelAffine:
    return ChannelAffine.diagonal([1.0 - x, 1.0 - x, 1.0])


def _rotation(theta: float, nx: float = 0.0, ny: float = 0.0, nz: float = 1.0) -> ChannelAffine:
    axis = np.array([nx, ny, nz], dtype=float)
    norm = float(np.linalg.norm(axis))
    if norm == 0.0:
        raise InvalidChannelError("rotation axis must be nonzero")
    return ChannelAffine(np.zeros(3), Rotation.from_rotvec(theta * axis / norm).as_matrix())


def _amplitude_damping(gamma: float) -> ChannelAffine:
    if not 0.0 <= gamma <= 1.0:
        raise InvalidChannelError(f"amplitude-damping needs 0 <= gamma <= 1, got {gamma}")
    c = math.sqrt(1.0 - gamma)
    return ChannelAffine.diagonal([c, c, 1.0 - gamma], [0.0, 0.0, gamma])


def _fuchs() -> ChannelAffine:
    return _splaying_family(1.0 / math.sqrt(3.0), 1.0 / 3.0, 1.0 / 3.0)


def _splaying_family(l1: float, l3: float, t: float) -> ChannelAffine:
    return ChannelAffine.diagonal([l1, 0.0, l3], [0.0, 0.0, t])


def _identity() -> ChannelAffine:
    return ChannelAffine.identity()


CATALOG: Dict[CatalogName, CatalogEntry] = {
    entry.name: entry
    for entry in (
        CatalogEntry(
            CatalogName.AMPLITUDE_DAMPING, ("gamma",),
            "t = (0, 0, γ), T = diag(√(1−γ), √(1−γ), 1−γ)",
            "0 ≤ γ ≤ 1",
            "CP throughout; equality in (λ₁±λ₂)² ≤ (1±λ₃)² − t²",
            _amplitude_damping,
        ),
        CatalogEntry(
            CatalogName.DEPOLARIZING, ("x",),
            "Φ[1−4x/3, 1−4x/3, 1−4x/3]",
            "0 ≤ x ≤ 1",
            "CP iff −1/3 ≤ 1−4x/3 ≤ 1",
            _depolarizing,
        ),
        CatalogEntry(
            CatalogName.FUCHS, (),
            "λ = (1/√3, 0, 1/3), t = (0, 0, 1/3)",
            "no parameters",
            "CP boundary: λ₁² + t² = (1 − |λ₃|)²",
            _fuchs,
        ),
        CatalogEntry(
            CatalogName.IDENTITY, (),
            "Φ[1, 1, 1]",
            "no parameters",
            "CP, corner (1, 1, 1) of the tetrahedron",
            _identity,
        ),
        CatalogEntry(
            CatalogName.PHASE_DAMPING, ("x",),
            "Φ[1−x, 1−x, 1]",
            "0 ≤ x ≤ 2",
            "CP iff |1−x| ≤ 1",
            _phase_damping,
        ),
        CatalogEntry(
            CatalogName.ROTATION, ("theta",),
            "T = R(θ, n), t = 0; Φ(ρ) = UρU†",
            "θ real, axis n ≠ 0 (default z)",
            "always CP (unitary conjugation)",
            _rotation,
            optional_params=("nx", "ny", "nz"),
        ),
        CatalogEntry(
            CatalogName.SPLAYING_FAMILY, ("l1", "l3", "t"),
            "λ = (λ₁, 0, λ₃), t = (0, 0, t)",
            "λ₁, λ₃, t real",
            "CP iff λ₁² + t² ≤ (1 − |λ₃|)²",
            _splaying_family,
        ),
        CatalogEntry(
            CatalogName.TWO_PAULI, ("x",),
            "Φ[x, x, 2x−1]",
            "0 ≤ x ≤ 1",
            "CP iff 0 ≤ x ≤ 1; x = 1/3 gives Φ[1/3, 1/3, −1/3]",
            _two_pauli,
        ),
    )
}


def _catalog_entry(name: Union[CatalogName, str]) -> CatalogEntry:
    try:
        return CATALOG[CatalogName(name)]
    except ValueError:
        known = ", ".join(sorted(n.value for n in CatalogName))
        raise InvalidChannelError(f"Unknown channel '{name}'; known channels: {known}") from None


def _check_param_count(entry: CatalogEntry, params: Sequence[float]):
    low = len(entry.params)
    high = low + len(entry.optional_params)
    if not low <= len(params) <= high:
        expected = ", ".join(entry.params + entry.optional_params) or "none"
        raise InvalidChannelError(
            f"{entry.name.value} takes {low}" + (f" to {high}" if high > low else "")
            + f" parameter(s) ({expected}), got {len(params)}"
        )


def catalog(name: Union[CatalogName, str], params: Sequence[float] = ()) -> ChannelAffine:
    """Built-in channel by name; parameters outside the CP region are rejected."""
    from cp import cp_report

    entry = _catalog_entry(name)
    params = [float(p) for p in params]
    _check_param_count(entry, params)

    channel = entry.build(*params)
    report = cp_report(channel)
    if not report.is_cp:
        violated = ", ".join(m.identifier for m in report.violated)
        raise InvalidChannelError(
            f"{entry.name.value}{tuple(params)} is not completely positive: violates {violated}"
        )
    return channel


def catalog_kraus(name: Union[CatalogName, str], params: Sequence[float] = ()) -> KrausSet:
    """Kraus form of the catalog channels that have one listed."""
    entry = _catalog_entry(name)
    params = [float(p) for p in params]
    _check_param_count(entry, params)

    if entry.name is CatalogName.IDENTITY:
        return KrausSet((IDENTITY,))

    if entry.name is CatalogName.AMPLITUDE_DAMPING:
        (gamma,) = params
        if not 0.0 <= gamma <= 1.0:
            raise InvalidChannelError(f"amplitude-damping needs 0 <= gamma <= 1, got {gamma}")
        return KrausSet.from_standard([
            np.diag([1.0, math.sqrt(1.0 - gamma)]),
            np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]]),
        ])

    # Pauli-diagonal channels: weights on I, sigma_x, sigma_y, sigma_z
    pauli_weights: Dict[CatalogName, Callable[[float], List[float]]] = {
        CatalogName.DEPOLARIZING: lambda x: [1.0 - x, x / 3.0, x / 3.0, x / 3.0],
        CatalogName.TWO_PAULI: lambda x: [x, (1.0 - x) / 2.0, (1.0 - x) / 2.0, 0.0],
        CatalogName.PHASE_DAMPING: lambda x: [1.0 - x / 2.0, 0.0, 0.0, x / 2.0],
    }
    if entry.name not in pauli_weights:
        raise InvalidChannelError(f"No Kraus form is listed for {entry.name.value}")

    weights = pauli_weights[entry.name](params[0])
    if min(weights) < -STATE_TOL:
        raise InvalidChannelError(f"{entry.name.value}({params[0]}) has negative Pauli weights")
    ops = [
        math.sqrt(max(p, 0.0)) * s
        for p, s in zip(weights, (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z))
        if p > 0.0
    ]
    return KrausSet(tuple(ops))


def classical_limit_matrix(l3: float, t: float) -> np.ndarray:
    """
    Column-stochastic matrix of the l1 = 0 splaying map acting on (p_0, p_1).

    Column j is the output distribution for input |j>: w3 = t + l3 for |0>,
    t - l3 for |1>.
    """
    m = 0.5 * np.array([
        [1.0 + t + l3, 1.0 + t - l3],
        [1.0 - t - l3, 1.0 - t + l3],
    ])
    if np.min(m) < -PSD_TOL:
        raise InvalidChannelError(f"l3={l3}, t={t} do not give a stochastic matrix")
    return np.clip(m, 0.0, 1.0)
