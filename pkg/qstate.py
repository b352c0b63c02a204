"""
Qubit State Module for QChan
============================
Representations of one- and two-qubit states:
1. Density matrices and Bloch (Stokes) vectors
2. Entropy functionals: von Neumann, h(mu), eta(alpha, x), relative entropy
3. Partial traces of two-qubit states
4. Schmidt decomposition of two-qubit pure states
5. Dense Hermitian eigenvalues (closed form 2x2, cyclic Jacobi otherwise)

All logarithms are natural; entropies are in nats.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import entr

from config import (
    JACOBI_MAX_SWEEPS,
    JACOBI_TOL,
    PSD_TOL,
    PURE_TOL,
    STATE_TOL,
)
from errors import DomainError, InvalidStateError

logger = logging.getLogger(__name__)


# =============================================================================
# Pauli Basis
# =============================================================================

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI = np.stack([IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z])
PAULI_VECTOR = PAULI[1:]

# PAULI_PRODUCTS[i, j] = sigma_i (x) sigma_j, i, j in 0..3
PAULI_PRODUCTS = np.einsum("iab,jcd->ijacbd", PAULI, PAULI).reshape(4, 4, 4, 4)


class Side(str, Enum):
    FIRST = "1"
    SECOND = "2"


# =============================================================================
# Dense Hermitian Eigenvalues
# =============================================================================

def _eigvalsh_2x2(m: np.ndarray) -> np.ndarray:
    a = m[0, 0].real
    d = m[1, 1].real
    mean = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), abs(m[0, 1]))
    return np.array([mean - radius, mean + radius])


def _jacobi_eigvalsh(a: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi sweeps on a real symmetric matrix; returns sorted eigenvalues."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))

    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
    else:
        logger.warning(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-norm {off:.3e})")

    return np.sort(np.diag(a))


def hermitian_eigvalsh(m) -> np.ndarray:
    """
    Ascending eigenvalues of a small Hermitian matrix.

    2x2 uses the trace/determinant formula. Larger matrices are embedded as the
    real symmetric [[Re, -Im], [Im, Re]], whose spectrum is that of m with every
    eigenvalue doubled, and diagonalized by cyclic Jacobi.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape == (2, 2):
        return _eigvalsh_2x2(m)

    re, im = m.real, m.imag
    embedded = np.block([[re, -im], [im, re]])
    doubled = _jacobi_eigvalsh(0.5 * (embedded + embedded.T))
    return 0.5 * (doubled[0::2] + doubled[1::2])


def _spectrum_entropy(evals: np.ndarray) -> float:
    clipped = np.clip(evals, 0.0, None)
    return float(np.sum(entr(clipped)))


# =============================================================================
# Data Models
# =============================================================================

def _validated_state(entries, dim: int, label: str) -> Tuple[np.ndarray, np.ndarray]:
    m = np.array(entries, dtype=complex)
    if m.shape != (dim, dim):
        raise InvalidStateError(f"{label} must be {dim}x{dim}, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError(f"{label} has non-finite entries")

    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > STATE_TOL:
        raise InvalidStateError(f"{label} is not Hermitian (deviation {asym:.3e})")

    trace = np.trace(m)
    if abs(trace - 1.0) > STATE_TOL:
        raise InvalidStateError(f"{label} trace is {trace.real:.15g}, expected 1")

    evals = hermitian_eigvalsh(m)
    if evals[0] < -PSD_TOL:
        raise InvalidStateError(f"{label} has negative eigenvalue {evals[0]:.3e}")

    m.setflags(write=False)
    evals.setflags(write=False)
    return m, evals


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A qubit state rho: 2x2 Hermitian, unit trace, positive semidefinite."""
    entries: np.ndarray
    spectrum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m, evals = _validated_state(self.entries, 2, "DensityMatrix")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "spectrum", evals)

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        """Projection onto the normalized vector."""
        v = np.asarray(vector, dtype=complex).reshape(2)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @property
    def bloch(self) -> "BlochVector":
        return density_to_bloch(self)


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Stokes parametrization w of rho = 1/2 [I + w . sigma], |w| <= 1."""
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (3,):
            raise InvalidStateError(f"BlochVector needs 3 components, got {w.shape[0]}")
        norm = float(np.linalg.norm(w))
        if not math.isfinite(norm) or norm > 1.0 + STATE_TOL:
            raise InvalidStateError(f"Bloch vector norm {norm:.15g} exceeds 1")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.w))

    @property
    def is_pure(self) -> bool:
        return abs(self.norm - 1.0) <= PURE_TOL


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """A density matrix rho_12 on C^2 (x) C^2, basis order |00>, |01>, |10>, |11>."""
    entries: np.ndarray
    spectrum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m, evals = _validated_state(self.entries, 4, "TwoQubitState")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "spectrum", evals)


@dataclass(frozen=True, eq=False)
class TwoQubitPure:
    """Pure state Psi = sum a_jk |j>|k>, stored as the coefficient matrix A = (a_jk)."""
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (2, 2):
            raise InvalidStateError(f"TwoQubitPure amplitudes must be 2x2, got {a.shape}")
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidStateError(f"TwoQubitPure is not normalized (norm {norm:.15g})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_vector(cls, psi, normalize: bool = False) -> "TwoQubitPure":
        v = np.asarray(psi, dtype=complex).reshape(4)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(v.reshape(2, 2))

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(4)

    def density(self) -> TwoQubitState:
        v = self.vector
        return TwoQubitState(np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """Psi = sum_k mu_k psi_k (x) chi_k with psi_k, chi_k the columns of the two bases."""
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def __post_init__(self):
        mu = np.array(self.coefficients, dtype=float)
        if mu.shape != (2,) or np.any(mu < 0) or mu[0] < mu[1]:
            raise InvalidStateError("Schmidt coefficients must be two non-negative reals, descending")
        if abs(float(np.sum(mu ** 2)) - 1.0) > PURE_TOL:
            raise InvalidStateError("Squared Schmidt coefficients must sum to 1")
        for basis in (self.left_basis, self.right_basis):
            if np.max(np.abs(basis.conj().T @ basis - IDENTITY)) > PURE_TOL:
                raise InvalidStateError("Schmidt basis is not unitary")
        object.__setattr__(self, "coefficients", mu)

    def amplitudes(self) -> np.ndarray:
        """Coefficient matrix rebuilt from the decomposition."""
        return self.left_basis @ np.diag(self.coefficients) @ self.right_basis.T


# =============================================================================
# Constructors and Samplers
# =============================================================================

def tensor(rho: DensityMatrix, gamma: DensityMatrix) -> TwoQubitState:
    return TwoQubitState(np.kron(rho.entries, gamma.entries))


def bell_state() -> TwoQubitPure:
    """(|00> + |11>)/sqrt(2)."""
    return TwoQubitPure(np.eye(2) / math.sqrt(2.0))


def haar_pure_amplitudes(rng: np.random.Generator, count: Optional[int] = None) -> np.ndarray:
    """Unitarily invariant random vectors in C^4 from normalized complex Gaussians."""
    shape = (4,) if count is None else (count, 4)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def random_bloch_vector(rng: np.random.Generator, pure: bool = False) -> BlochVector:
    """Uniform on the sphere (pure) or in the ball (mixed)."""
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    radius = 1.0 if pure else rng.uniform() ** (1.0 / 3.0)
    return BlochVector(radius * direction)


def random_density(rng: np.random.Generator, pure: bool = False) -> DensityMatrix:
    return bloch_to_density(random_bloch_vector(rng, pure=pure))


# =============================================================================
# Bloch / Stokes Conversion
# =============================================================================

def bloch_to_density(w: Union[BlochVector, np.ndarray, list]) -> DensityMatrix:
    """rho = 1/2 [I + w . sigma]."""
    vec = w if isinstance(w, BlochVector) else BlochVector(w)
    return DensityMatrix(0.5 * (IDENTITY + np.einsum("k,kab->ab", vec.w, PAULI_VECTOR)))


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    """w_k = Tr(rho sigma_k)."""
    w = np.real(np.einsum("kab,ba->k", PAULI_VECTOR, rho.entries))
    return BlochVector(w)


# =============================================================================
# Entropy Functionals
# =============================================================================

def von_neumann_entropy(state: Union[DensityMatrix, TwoQubitState]) -> float:
    """S(rho) = -Tr rho ln rho, with 0 ln 0 = 0."""
    if not isinstance(state, (DensityMatrix, TwoQubitState)):
        raise TypeError(f"Expected a validated state, got {type(state).__name__}")
    return _spectrum_entropy(state.spectrum)


def binary_entropy_h(mu: float) -> float:
    """h(mu): entropy of the eigenvalues 1/2 (1 +- mu)."""
    if mu < -STATE_TOL or mu > 1.0 + STATE_TOL:
        raise DomainError(f"h(mu) requires mu in [0, 1], got {mu}")
    mu = min(max(mu, 0.0), 1.0)
    return float(entr(0.5 * (1.0 + mu)) + entr(0.5 * (1.0 - mu)))


def entropy_of_bloch_length(r: float) -> float:
    """Entropy of any qubit state whose Bloch vector has length r."""
    if r > 1.0 + PSD_TOL:
        raise DomainError(f"Bloch length {r} exceeds 1")
    return binary_entropy_h(min(abs(r), 1.0))


def eta(alpha: float, x: float) -> float:
    """eta(alpha, x) = -(alpha+x) ln(alpha+x) - (alpha-x) ln(alpha-x)."""
    if alpha < 0:
        raise DomainError(f"eta requires alpha >= 0, got {alpha}")
    if abs(x) > alpha:
        if abs(x) - alpha > STATE_TOL:
            raise DomainError(f"eta requires |x| <= alpha, got alpha={alpha}, x={x}")
        x = math.copysign(alpha, x)
    return float(entr(alpha + x) + entr(alpha - x))


def relative_entropy(p: DensityMatrix, q: DensityMatrix) -> float:
    """
    H(P, Q) = Tr P [ln P - ln Q].

    Returns math.inf when the support of P is not contained in the support of Q.
    """
    q_vals, q_vecs = np.linalg.eigh(q.entries)
    weights = np.real(np.einsum("ij,ik,kj->j", q_vecs.conj(), p.entries, q_vecs))

    cross = 0.0
    for q_val, weight in zip(q_vals, weights):
        if weight <= PSD_TOL:
            continue
        if q_val <= PSD_TOL:
            return math.inf
        cross += weight * math.log(q_val)

    return -_spectrum_entropy(p.spectrum) - cross


# =============================================================================
# Partial Trace and Schmidt Decomposition
# =============================================================================

def partial_trace(rho12: TwoQubitState, which: Union[Side, str, int]) -> DensityMatrix:
    """
    Reduced density matrix kept on the given side.

    Side.FIRST returns rho_1 = T_2(rho_12); Side.SECOND returns rho_2 = T_1(rho_12).
    """
    side = Side(str(which.value if isinstance(which, Side) else which))
    blocks = rho12.entries.reshape(2, 2, 2, 2)
    if side is Side.FIRST:
        reduced = np.einsum("ijkj->ik", blocks)
    else:
        reduced = np.einsum("ijil->jl", blocks)
    return DensityMatrix(reduced)


def schmidt_decompose(psi: TwoQubitPure) -> SchmidtForm:
    """SVD of the amplitude matrix A = U diag(mu) V^H; right basis vectors are the rows of V^H."""
    u, mu, vh = np.linalg.svd(psi.amplitudes)
    return SchmidtForm(coefficients=mu, left_basis=u, right_basis=vh.T)
