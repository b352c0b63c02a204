"""Generate channel spec files, the entropy-difference curve CSVs and the tiered eval set."""

import csv
import logging
import math
import os
from typing import List, Tuple

import numpy as np

from channel import ChannelAffine, catalog
from cli import ChannelSpec, KrausRep, curve_rows, spec_from_channel, write_curve_csv
from config import CHANNEL_DIR, CURVE_DIR, LOG_LEVEL

logging.basicConfig(level=LOG_LEVEL, format="%(levelname)s: %(message)s")
logger = logging.getLogger(__name__)


def _complex_rows(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_specs() -> List[Tuple[str, ChannelSpec]]:
    """(file stem, spec) for every shipped example channel."""
    gamma = 0.5
    amplitude_damping = KrausRep(
        ops=[
            _complex_rows(np.diag([1.0, math.sqrt(1.0 - gamma)])),
            _complex_rows(np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])),
        ],
        convention="standard",
    )
    return [
        ("fuchs", spec_from_channel("fuchs", catalog("fuchs"))),
        ("identity", spec_from_channel("identity", catalog("identity"))),
        ("depolarizing-0.25", spec_from_channel("depolarizing(0.25)", catalog("depolarizing", [0.25]))),
        ("two-pauli-0.5", spec_from_channel("two-pauli(0.5)", catalog("two-pauli", [0.5]))),
        ("amplitude-damping-0.5", ChannelSpec(name="amplitude-damping(0.5)", kraus=amplitude_damping)),
        # Not CP: transpose w -> (w1, -w2, w3)
        ("transpose", spec_from_channel("transpose", ChannelAffine.diagonal([1.0, -1.0, 1.0]))),
    ]


# (file stem, family, case, mu range, nu range)
CURVES = [
    ("uv-plus-mu2", "phi-eq-omega", "uv=+mu2", (0.0, 1.0 / 3.0, 100), None),
    ("uv-minus-mu2", "phi-eq-omega", "uv=-mu2", (0.0, 1.0 / 3.0, 100), None),
    ("uv-mu-2mu-1", "phi-eq-omega", "uv=mu(2mu-1)", (1.0 / 3.0, 1.0, 100), None),
    ("uv-2mu-1-squared", "phi-eq-omega", "uv=(2mu-1)2", (1.0 / 3.0, 1.0, 100), None),
    ("two-channel-grid", "phi-neq-omega", "uv=(2mu-1)2", (1.0 / 3.0, 1.0, 50), (1.0 / 3.0, 1.0, 50)),
]


# (check, tier, expected, tolerance); each check in eval.py returns one number
EVAL_SET = [
    ("block_spectrum_oracle", "oracle", 0.0, 1e-10),
    ("cp_tetrahedron_vs_choi", "oracle", 0.0, 0.0),
    ("cp_nonunital_vs_choi", "oracle", 0.0, 0.0),
    ("small_mu_negative_points", "curves", 0.0, 0.0),
    ("small_mu_relative_error", "curves", 0.0, 0.10),
    ("large_mu_mu_2mu_minus_1_relative_error", "curves", 0.0, 0.05),
    ("large_mu_2mu_minus_1_squared_relative_error", "curves", 0.0, 0.05),
    ("two_channel_negative_points", "curves", 0.0, 0.0),
    ("two_channel_lower_bound_shortfall", "curves", 0.0, 5e-3),
    ("fuchs_min_entropy", "fuchs", 0.4164955307, 1e-6),
    ("fuchs_endpoint_entropy", "fuchs", 0.4505612089, 1e-6),
    ("fuchs_fixed_point_error", "fuchs", 0.0, 1e-12),
    ("fuchs_cp_margin", "fuchs", 0.0, 1e-12),
    ("fuchs_c_points_error", "fuchs", 0.0, 1e-9),
    ("capacity_unital_coincidence", "capacity", 0.0, 1e-7),
    ("capacity_closed_form_error", "capacity", 0.0, 1e-12),
    ("capacity_holevo_bound_excess", "capacity", 0.0, 1e-9),
    ("additivity_two_pauli_0.1", "scans", 0.0, 1e-6),
    ("additivity_two_pauli_third", "scans", 0.0, 1e-6),
    ("additivity_two_pauli_0.5", "scans", 0.0, 1e-6),
    ("additivity_two_pauli_0.9", "scans", 0.0, 1e-6),
    ("additivity_depolarizing_0.2", "scans", 0.0, 1e-6),
    ("additivity_depolarizing_0.75", "scans", 0.0, 1e-6),
    ("schmidt_two_pauli_0.1", "scans", 0.0, 1e-4),
    ("schmidt_two_pauli_third", "scans", 0.0, 1e-4),
    ("schmidt_two_pauli_0.5", "scans", 0.0, 1e-4),
    ("schmidt_two_pauli_0.9", "scans", 0.0, 1e-4),
    ("schmidt_depolarizing_0.2", "scans", 0.0, 1e-4),
    ("norm_multiplicativity_excess", "scans", 0.0, 1e-7),
    ("mixing_theorem_shortfall", "scans", 0.0, 1e-9),
]


def main():
    os.makedirs(CHANNEL_DIR, exist_ok=True)
    os.makedirs(CURVE_DIR, exist_ok=True)

    logger.info("Writing channel specs...")
    for stem, spec in channel_specs():
        path = os.path.join(CHANNEL_DIR, f"{stem}.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(spec.to_json() + "\n")
        logger.info(f"  {path}")

    logger.info("Writing entropy-difference curves...")
    for stem, family, case, mu_range, nu_range in CURVES:
        header, rows = curve_rows(family, case, mu_range, nu_range)
        path = os.path.join(CURVE_DIR, f"{stem}.csv")
        with open(path, "w", newline="", encoding="utf-8") as f:
            write_curve_csv(f, header, rows)
        logger.info(f"  {path}: {len(rows)} rows, min delta {min(r[-1] for r in rows):.3e}")

    with open("eval_set.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["check", "tier", "expected", "tolerance"])
        for row in EVAL_SET:
            writer.writerow(row)
    logger.info(f"Created eval_set.csv with {len(EVAL_SET)} checks")
    logger.info("Next: python eval.py")


if __name__ == "__main__":
    main()
