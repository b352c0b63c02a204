"""
Structural decompositions of qubit maps.

T = R2 diag(l) R1^T with R1, R2 proper rotations, so that
Phi = Rot(R2) o Phi[l1, l2, l3] + t' o Rot(R1^T) with t' = R2^T t,
and the lift of Bloch rotations to SU(2).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from channel import ChannelAffine, DiagonalChannel, as_affine
from config import DEGENERACY_RTOL, ROTATION_TOL, STATE_TOL
from errors import DomainError, InvalidChannelError
from qstate import IDENTITY, PAULI_VECTOR

logger = logging.getLogger(__name__)


class EntropySetKind(str, Enum):
    AXIS = "axis"
    DISK = "disk"
    SPHERE = "sphere"


@dataclass(frozen=True, eq=False)
class ChannelNormalForm:
    pre_rotation: np.ndarray
    post_rotation: np.ndarray
    lambdas: np.ndarray
    translation: np.ndarray
    lifted_pre: np.ndarray
    lifted_post: np.ndarray

    @property
    def diag(self) -> DiagonalChannel:
        return DiagonalChannel(self.lambdas, self.translation)

    @property
    def diag_affine(self) -> ChannelAffine:
        """The diagonal map without the CP validation DiagonalChannel performs."""
        return ChannelAffine.diagonal(self.lambdas, self.translation)

    def reconstruct(self) -> np.ndarray:
        return self.post_rotation @ np.diag(self.lambdas) @ self.pre_rotation.T


@dataclass(frozen=True, eq=False)
class MinimalEntropySet:
    """Input Bloch directions along the largest |l|; columns of `basis` span the set."""
    kind: EntropySetKind
    basis: np.ndarray
    mu: float

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class OutputEllipsoid:
    """Image of the Bloch sphere: center + sum_k semi_axes[k] * s_k * axes[:, k], |s| = 1."""
    center: np.ndarray
    semi_axes: np.ndarray
    axes: np.ndarray


# =============================================================================
# Polar / SVD normal form
# =============================================================================

def _canonical_svd(T: np.ndarray):
    u, s, vh = np.linalg.svd(T)
    v = vh.T
    for k in range(3):
        lead = int(np.argmax(np.abs(v[:, k])))
        if v[lead, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return u, s, v


def polar_factor(channel: ChannelAffine) -> ChannelNormalForm:
    """
    Normal form T = post diag(l) pre^T.

    |l| is descending; only l3 may be negative. A fully degenerate T = s O keeps
    pre = I and puts O (made proper) into post.
    """
    channel = as_affine(channel)
    T = channel.T
    u, s, v = _canonical_svd(T)

    if s[0] <= STATE_TOL:
        pre, post, lambdas = np.eye(3), np.eye(3), np.zeros(3)
    elif s[0] - s[2] <= STATE_TOL * s[0]:
        logger.debug(f"Degenerate singular values {s[0]:.6g}; keeping pre = I")
        sign = 1.0 if np.linalg.det(T) >= 0 else -1.0
        lambdas = np.array([s[0], s[0], sign * s[0]])
        pre = np.eye(3)
        post = T @ np.diag(1.0 / lambdas)
    else:
        lambdas = s.copy()
        pre, post = v, u
        if np.linalg.det(post) < 0:
            post[:, 2] = -post[:, 2]
            lambdas[2] = -lambdas[2]
        if np.linalg.det(pre) < 0:
            pre[:, 2] = -pre[:, 2]
            lambdas[2] = -lambdas[2]

    translation = post.T @ channel.t
    return ChannelNormalForm(
        pre_rotation=pre,
        post_rotation=post,
        lambdas=lambdas,
        translation=translation,
        lifted_pre=lift_rotation(pre),
        lifted_post=lift_rotation(post),
    )


# =============================================================================
# SO(3) -> SU(2)
# =============================================================================

def lift_rotation(R: np.ndarray) -> np.ndarray:
    """
    U in SU(2) with U sigma_i U^dag = sum_j R_ji sigma_j.

    Of the two lifts +-U, the one whose leading nonzero entry has positive
    real part is returned; a purely imaginary lead must have negative imaginary part.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise DomainError(f"Rotation must be 3x3, got {R.shape}")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ROTATION_TOL or abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
        raise DomainError("Matrix is not a proper rotation")

    x, y, z, w = Rotation.from_matrix(R).as_quat()
    U = w * IDENTITY - 1j * np.einsum("k,kab->ab", np.array([x, y, z]), PAULI_VECTOR)

    lead = next(e for e in U.flat if abs(e) > ROTATION_TOL)
    if lead.real < -ROTATION_TOL or (abs(lead.real) <= ROTATION_TOL and lead.imag > 0):
        U = -U
    return U


# =============================================================================
# Minimal-entropy geometry
# =============================================================================

def minimal_entropy_set(channel: ChannelAffine, rtol: Optional[float] = None) -> MinimalEntropySet:
    """Input directions whose image has the maximal length mu = max |l| (unital maps)."""
    channel = as_affine(channel)
    if not channel.is_unital:
        raise InvalidChannelError("The minimal-entropy set is defined here for unital maps only")

    rtol = DEGENERACY_RTOL if rtol is None else rtol
    nf = polar_factor(channel)
    mags = np.abs(nf.lambdas)
    mu = float(mags.max())
    selected = np.flatnonzero(mags >= mu * (1.0 - rtol))

    kind = {1: EntropySetKind.AXIS, 2: EntropySetKind.DISK, 3: EntropySetKind.SPHERE}[len(selected)]
    return MinimalEntropySet(kind=kind, basis=nf.pre_rotation[:, selected], mu=mu)


def output_ellipsoid(channel: ChannelAffine) -> OutputEllipsoid:
    channel = as_affine(channel)
    nf = polar_factor(channel)
    return OutputEllipsoid(center=channel.t.copy(), semi_axes=np.abs(nf.lambdas), axes=nf.post_rotation)
