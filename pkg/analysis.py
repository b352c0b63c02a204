"""
Channel Analysis Service
========================
Single entry point that runs every per-channel computation and gathers the
results into one report:
1. CP margins and Choi minimum eigenvalue
2. Normal form (lambdas, rotations and their SU(2) lifts)
3. Maximal output norm and minimal output entropy
4. Fixed point, Holevo and Shannon capacities
5. Minimal-entropy-set geometry (unital maps) and ellipse geometry (axial maps)
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np

from capacity import EllipseGeometry, ellipse_geometry, fixed_point, holevo_capacity, shannon_capacity
from channel import ChannelAffine, DiagonalChannel, as_affine
from cp import CpReport, cp_report
from decompose import ChannelNormalForm, MinimalEntropySet, minimal_entropy_set, polar_factor
from errors import InvalidChannelError, NoFixedPointError, NotCompletelyPositiveError
from minent import max_norm, min_output_entropy

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


def _complex_pairs(m: np.ndarray) -> list:
    return np.stack([m.real, m.imag], axis=-1).tolist()


@dataclass
class ChannelReport:
    """Everything `analyze` prints for one channel. Entropies and capacities are in nats."""
    name: str
    channel: ChannelAffine
    cp: CpReport
    normal_form: ChannelNormalForm
    max_norm: Optional[float] = None
    min_output_entropy: Optional[float] = None
    min_entropy_input: Optional[np.ndarray] = None
    fixed_point: Optional[np.ndarray] = None
    holevo_capacity: Optional[float] = None
    holevo_priors: Optional[tuple] = None
    holevo_inputs: Optional[np.ndarray] = None
    shannon_capacity: Optional[float] = None
    shannon_axis: Optional[np.ndarray] = None
    entropy_set: Optional[MinimalEntropySet] = None
    ellipse: Optional[EllipseGeometry] = None

    def to_dict(self, bits: bool = False) -> Dict:
        scale = 1.0 / LN2 if bits else 1.0

        def entropy(value: Optional[float]) -> Optional[float]:
            return None if value is None else value * scale

        def vector(value: Optional[np.ndarray]) -> Optional[list]:
            return None if value is None else np.asarray(value).tolist()

        nf = self.normal_form
        result = {
            "name": self.name,
            "unit": "bits" if bits else "nats",
            "t": self.channel.t.tolist(),
            "T": self.channel.T.tolist(),
            "cp": self.cp.to_dict(),
            "normal_form": {
                "lambdas": nf.lambdas.tolist(),
                "translation": nf.translation.tolist(),
                "pre_rotation": nf.pre_rotation.tolist(),
                "post_rotation": nf.post_rotation.tolist(),
                "lifted_pre": _complex_pairs(nf.lifted_pre),
                "lifted_post": _complex_pairs(nf.lifted_post),
            },
            "max_norm": self.max_norm,
            "min_output_entropy": entropy(self.min_output_entropy),
            "min_entropy_input": vector(self.min_entropy_input),
            "fixed_point": vector(self.fixed_point),
            "holevo_capacity": entropy(self.holevo_capacity),
            "holevo_ensemble": None if self.holevo_priors is None else {
                "priors": list(self.holevo_priors),
                "bloch_vectors": vector(self.holevo_inputs),
            },
            "shannon_capacity": entropy(self.shannon_capacity),
            "shannon_axis": vector(self.shannon_axis),
            "entropy_set": None,
            "ellipse": None,
        }
        if self.entropy_set is not None:
            result["entropy_set"] = {
                "kind": self.entropy_set.kind.value,
                "mu": self.entropy_set.mu,
                "basis": self.entropy_set.basis.T.tolist(),
            }
        if self.ellipse is not None:
            result["ellipse"] = {
                "endpoints": self.ellipse.endpoints.tolist(),
                "endpoint_length": self.ellipse.endpoint_length,
                "endpoint_entropy": entropy(self.ellipse.endpoint_entropy),
                "min_entropy_points": self.ellipse.min_entropy_points.tolist(),
                "level_circle_radius": self.ellipse.level_circle_radius,
            }
        return result


class ChannelAnalysisService:
    """Runs the decompose, minent and capacity computations for one channel."""

    def analyze(self, channel: Union[ChannelAffine, DiagonalChannel], name: str = "channel",
                require_cp: bool = True) -> ChannelReport:
        affine = as_affine(channel)
        report = cp_report(affine)
        if not report.is_cp:
            violated = ", ".join(m.identifier for m in report.violated)
            if require_cp:
                raise NotCompletelyPositiveError(f"{name} is not completely positive: violates {violated}", report)
            logger.warning(f"{name} is not completely positive ({violated}); reporting structure only")

        result = ChannelReport(name=name, channel=affine, cp=report, normal_form=polar_factor(affine))
        if not report.is_cp:
            return result

        result.max_norm = max_norm(affine)
        result.min_output_entropy, direction = min_output_entropy(affine)
        result.min_entropy_input = direction.w

        try:
            result.fixed_point = fixed_point(affine).w
        except NoFixedPointError as e:
            logger.warning(f"{name}: {e}")

        result.holevo_capacity, ensemble = holevo_capacity(affine)
        result.holevo_priors = ensemble.priors
        result.holevo_inputs = ensemble.bloch_vectors
        result.shannon_capacity, _, povm = shannon_capacity(affine)
        result.shannon_axis = povm.axis

        if affine.is_unital:
            result.entropy_set = minimal_entropy_set(affine)
        else:
            try:
                result.ellipse = ellipse_geometry(affine)
            except InvalidChannelError:
                pass

        logger.info(f"Analyzed {name}: minent={result.min_output_entropy:.9g}, C_Holv={result.holevo_capacity:.9g}")
        return result


# Singleton instance
_service: Optional[ChannelAnalysisService] = None

def get_analysis_service() -> ChannelAnalysisService:
    """Get or create the analysis service singleton."""
    global _service
    if _service is None:
        _service = ChannelAnalysisService()
    return _service
