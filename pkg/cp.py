"""
Complete-positivity tests for qubit maps.

Three tests, all reported as CpReport:
- the tetrahedron inequalities |l1 +- l2| <= |1 +- l3| (unital diagonal maps)
- sqrt(l1^2 + t^2) <= 1 - |l3| for the axial non-unital family T = diag(l1, 0, l3), t = (0, 0, t)
- the Choi matrix (id (x) Phi)(|Phi+><Phi+|) >= 0, valid for every map

The tetrahedron margins equal four times the Choi eigenvalues of the same map,
so all margins are compared against tolerances on the Choi scale.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple, Union

import numpy as np

from channel import ChannelAffine, DiagonalChannel, as_affine, product_matrix
from config import PSD_TOL, UNITAL_TOL
from errors import NotCompletelyPositiveError, WrongTestError
from qstate import PAULI_PRODUCTS, bell_state, hermitian_eigvalsh

logger = logging.getLogger(__name__)

CHOI_ID = "choi>=0"
TETRAHEDRON_IDS = ("l1+l2<=1+l3", "l1-l2<=1-l3", "l2-l1<=1-l3", "-l1-l2<=1+l3")
NONUNITAL_ID = "sqrt(l1^2+t^2)<=1-|l3|"
LAMBDA3_ID = "|l3|<=1"

# Tr(|Phi+><Phi+| sigma_i (x) sigma_j)
_BELL_COEFFS = np.diag([1.0, 1.0, -1.0, 1.0])

ChannelLike = Union[ChannelAffine, DiagonalChannel]


# =============================================================================
# Data Models
# =============================================================================

@dataclass(frozen=True)
class InequalityMargin:
    """margin >= 0 means satisfied; violation needs margin < -tolerance."""
    identifier: str
    margin: float
    tolerance: float = PSD_TOL

    @property
    def satisfied(self) -> bool:
        return self.margin >= -self.tolerance

    @property
    def boundary(self) -> bool:
        return abs(self.margin) <= self.tolerance


@dataclass(frozen=True)
class CpReport:
    is_cp: bool
    violated: Tuple[InequalityMargin, ...]
    choi_min_eigenvalue: float
    margins: Tuple[InequalityMargin, ...]
    advisory: Tuple[InequalityMargin, ...] = ()

    @property
    def boundary(self) -> bool:
        return self.is_cp and any(m.boundary for m in self.margins)

    def margin(self, identifier: str) -> float:
        for m in self.margins:
            if m.identifier == identifier:
                return m.margin
        raise KeyError(identifier)

    def to_dict(self) -> Dict:
        return {
            "is_cp": self.is_cp,
            "boundary": self.boundary,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "violated": [m.identifier for m in self.violated],
            "margins": [asdict(m) for m in self.margins],
            "advisory": [asdict(m) for m in self.advisory],
        }


def _report(margins: List[InequalityMargin], choi_min: float, advisory: List[InequalityMargin] = ()) -> CpReport:
    violated = tuple(m for m in margins if not m.satisfied)
    return CpReport(
        is_cp=not violated,
        violated=violated,
        choi_min_eigenvalue=choi_min,
        margins=tuple(margins),
        advisory=tuple(advisory),
    )


def _tetrahedron_margins(l1: float, l2: float, l3: float, prefix: str = "") -> List[InequalityMargin]:
    values = (1 + l3 - l1 - l2, 1 - l3 - l1 + l2, 1 - l3 + l1 - l2, 1 + l3 + l1 + l2)
    return [
        InequalityMargin(prefix + ident, float(v), 4.0 * PSD_TOL)
        for ident, v in zip(TETRAHEDRON_IDS, values)
    ]


def _is_axial_splaying(channel: ChannelAffine) -> bool:
    return (
        channel.is_diagonal
        and abs(channel.T[1, 1]) <= UNITAL_TOL
        and abs(channel.t[0]) <= UNITAL_TOL
        and abs(channel.t[1]) <= UNITAL_TOL
    )


# =============================================================================
# Tests
# =============================================================================

def check_tetrahedron(channel: ChannelLike) -> CpReport:
    """Four linear inequalities; necessary and sufficient for unital diagonal maps."""
    channel = as_affine(channel)
    if not (channel.is_unital and channel.is_diagonal):
        raise WrongTestError("Tetrahedron test needs a unital map with diagonal T; use choi_check")

    margins = _tetrahedron_margins(*channel.lambdas)
    return _report(margins, min(m.margin for m in margins) / 4.0)


def check_nonunital_special(l1: float, l3: float, t: float) -> CpReport:
    """CP test for T = diag(l1, 0, l3), t = (0, 0, t): l1^2 + t^2 <= (1 - |l3|)^2 with |l3| <= 1."""
    slack = 1.0 - abs(l3) - math.hypot(l1, t)
    margins = [
        InequalityMargin(NONUNITAL_ID, slack, 4.0 * PSD_TOL),
        InequalityMargin(LAMBDA3_ID, 1.0 - abs(l3), 4.0 * PSD_TOL),
    ]
    return _report(margins, slack / 4.0)


def choi_matrix(channel: ChannelLike) -> np.ndarray:
    """(id (x) Phi)(|Phi+><Phi+|)."""
    bell = bell_state().vector
    return product_matrix(ChannelAffine.identity(), as_affine(channel), np.outer(bell, bell.conj()))


def choi_min_eigenvalues(t: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Batched Choi minimum eigenvalues for stacks t (n, 3), T (n, 3, 3)."""
    n = t.shape[0]
    stokes = np.zeros((n, 4, 4))
    stokes[:, 0, 0] = 1.0
    stokes[:, 1:, 0] = t
    stokes[:, 1:, 1:] = T
    coeffs = np.einsum("ij,njk->nik", _BELL_COEFFS, np.transpose(stokes, (0, 2, 1)))
    choi = 0.25 * np.einsum("nij,ijab->nab", coeffs, PAULI_PRODUCTS)
    return np.linalg.eigvalsh(choi)[:, 0]


def choi_check(channel: ChannelLike) -> CpReport:
    """Authoritative CP test for any affine map."""
    choi_min = float(hermitian_eigvalsh(choi_matrix(channel))[0])
    return _report([InequalityMargin(CHOI_ID, choi_min)], choi_min)


def diagonal_entry_margins(channel: ChannelLike) -> List[InequalityMargin]:
    """Tetrahedron condition on (T11, T22, T33): necessary for any CP map, never sufficient."""
    return _tetrahedron_margins(*as_affine(channel).lambdas, prefix="diag:")


def cp_report(channel: ChannelLike) -> CpReport:
    """Choi oracle merged with every inequality test that applies to the map."""
    channel = as_affine(channel)
    choi = choi_check(channel)
    margins = list(choi.margins)
    advisory: List[InequalityMargin] = []

    if channel.is_diagonal and channel.is_unital:
        margins.extend(check_tetrahedron(channel).margins)
    elif _is_axial_splaying(channel):
        margins.extend(check_nonunital_special(channel.T[0, 0], channel.T[2, 2], channel.t[2]).margins)
    elif not channel.is_diagonal:
        advisory = diagonal_entry_margins(channel)

    report = _report(margins, choi.choi_min_eigenvalue, advisory)
    if report.is_cp != choi.is_cp:
        logger.warning(
            f"Inequality tests and Choi oracle disagree (choi min {choi.choi_min_eigenvalue:.3e}); "
            f"violated: {[m.identifier for m in report.violated]}"
        )
    return report


def require_cp(channel: ChannelLike) -> CpReport:
    report = cp_report(channel)
    if not report.is_cp:
        violated = ", ".join(m.identifier for m in report.violated)
        raise NotCompletelyPositiveError(f"Map is not completely positive: violates {violated}", report)
    return report
