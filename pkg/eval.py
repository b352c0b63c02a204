"""Tiered acceptance benchmark: numerical checks with per-tier pass rate and latency."""

import csv
import json
import logging
import math
import os
import time
from collections import defaultdict
from functools import lru_cache
from typing import Callable, Dict, List

import numpy as np

from capacity import ellipse_geometry, fixed_point, holevo_capacity, shannon_capacity
from channel import (
    CATALOG,
    CatalogName,
    ChannelAffine,
    apply_product,
    catalog,
    random_cp_channel,
    random_unital_channel,
)
from config import CURVE_FLOOR, DEFAULT_SEED, PSD_TOL, LOG_LEVEL
from cp import NONUNITAL_ID, check_nonunital_special, check_tetrahedron, choi_check, choi_min_eigenvalues, cp_report
from minent import (
    AsymptoticBranch,
    ProductBlockSpectrum,
    additivity_scan,
    asymptotic_entropy_difference,
    entropy_difference_lower_bound,
    entropy_difference_params,
    min_output_entropy,
    mixing_scan,
    norm_multiplicativity_scan,
    rho_diag_state,
)
from qstate import binary_entropy_h, hermitian_eigvalsh, schmidt_decompose

logging.basicConfig(level=LOG_LEVEL, format="%(levelname)s: %(message)s")
logger = logging.getLogger(__name__)

SCAN_SAMPLES = 100_000
SCAN_CHANNELS = {
    "two_pauli_0.1": ("two-pauli", 0.1),
    "two_pauli_third": ("two-pauli", 1.0 / 3.0),
    "two_pauli_0.5": ("two-pauli", 0.5),
    "two_pauli_0.9": ("two-pauli", 0.9),
    "depolarizing_0.2": ("depolarizing", 0.2),
    "depolarizing_0.75": ("depolarizing", 0.75),
}


def _latency_line(seconds: List[float]) -> str:
    if not seconds:
        return "  Latency:  n/a"
    p50, p95 = np.percentile(seconds, [50, 95])
    return f"  Latency:  P50={p50:.2f}s, P95={p95:.2f}s"


def _rng(offset: int = 0) -> np.random.Generator:
    return np.random.default_rng([DEFAULT_SEED, offset])


# =============================================================================
# Oracles
# =============================================================================

def block_spectrum_oracle() -> float:
    """Largest deviation of the closed-form spectrum from dense diagonalization."""
    rng = _rng(1)
    worst = 0.0
    for _ in range(10_000):
        phi = random_unital_channel(rng, rotate=False)
        omega = random_unital_channel(rng, rotate=False)
        t, theta = float(rng.uniform()), float(rng.uniform(0.0, 2.0 * math.pi))
        closed = np.sort(ProductBlockSpectrum.from_channels(phi, omega, theta).eigenvalues(t))
        dense = hermitian_eigvalsh(apply_product(phi, omega, rho_diag_state(t, theta).density()).entries)
        worst = max(worst, float(np.max(np.abs(closed - dense))))
    return worst


def cp_tetrahedron_vs_choi() -> float:
    """Disagreements away from the 1e-9 boundary band."""
    rng = _rng(2)
    disagreements = 0
    for lambdas in rng.uniform(-1.2, 1.2, size=(10_000, 3)):
        channel = ChannelAffine.diagonal(lambdas)
        tetra, choi = check_tetrahedron(channel), choi_check(channel)
        if abs(choi.choi_min_eigenvalue) > 1e-9 and tetra.is_cp != choi.is_cp:
            disagreements += 1
    return float(disagreements)


def cp_nonunital_vs_choi() -> float:
    axis = np.linspace(-1.0, 1.0, 50)
    l1, l3, t = (g.ravel() for g in np.meshgrid(axis, axis, axis, indexing="ij"))
    T = np.zeros((l1.size, 3, 3))
    T[:, 0, 0], T[:, 2, 2] = l1, l3
    shift = np.zeros((l1.size, 3))
    shift[:, 2] = t
    choi_min = choi_min_eigenvalues(shift, T)

    disagreements = 0
    for k in range(l1.size):
        report = check_nonunital_special(l1[k], l3[k], t[k])
        if abs(report.margin(NONUNITAL_ID)) > 1e-9 and report.is_cp != (choi_min[k] >= -PSD_TOL):
            disagreements += 1
    return float(disagreements)


# =============================================================================
# Curves
# =============================================================================

def _branch_curve(mus: np.ndarray, uv: Callable[[float], float]) -> np.ndarray:
    return np.array([entropy_difference_params(mu, mu, uv(mu)) for mu in mus])


def small_mu_negative_points() -> float:
    mus = np.linspace(0.0, 1.0 / 3.0, 100)
    values = np.concatenate([_branch_curve(mus, lambda m: m * m), _branch_curve(mus, lambda m: -m * m)])
    return float(np.sum(values < CURVE_FLOOR))


def small_mu_relative_error() -> float:
    mus = np.linspace(0.0, 1.0 / 3.0, 100)
    mus = mus[(mus > 0) & (mus <= 0.05)]
    exact = _branch_curve(mus, lambda m: -m * m)
    approx = np.array([asymptotic_entropy_difference(AsymptoticBranch.MINUS_MU_SQUARED, m) for m in mus])
    return float(np.max(np.abs(exact - approx) / approx))


def _large_mu_error(branch: AsymptoticBranch, uv: Callable[[float], float]) -> float:
    xs = np.linspace(0.001, 0.02, 20)
    exact = _branch_curve(1.0 - xs, uv)
    approx = np.array([asymptotic_entropy_difference(branch, x) for x in xs])
    return float(np.max(np.abs(exact - approx) / approx))


def large_mu_mu_2mu_minus_1_relative_error() -> float:
    return _large_mu_error(AsymptoticBranch.MU_2MU_MINUS_1, lambda m: m * (2 * m - 1))


def large_mu_2mu_minus_1_squared_relative_error() -> float:
    return _large_mu_error(AsymptoticBranch.TWO_MU_MINUS_1_SQUARED, lambda m: (2 * m - 1) ** 2)


def two_channel_negative_points() -> float:
    grid = np.linspace(1.0 / 3.0, 1.0, 200)
    count = 0
    for mu in grid:
        for nu in grid:
            if entropy_difference_params(mu, nu, (2 * mu - 1) * (2 * nu - 1)) < CURVE_FLOOR:
                count += 1
    return float(count)


def two_channel_lower_bound_shortfall() -> float:
    """Largest amount by which the grid falls below 2(x + y) for x, y <= 0.02."""
    xs = np.linspace(0.001, 0.02, 20)
    worst = 0.0
    for x in xs:
        for y in xs:
            mu, nu = 1.0 - x, 1.0 - y
            delta = entropy_difference_params(mu, nu, (2 * mu - 1) * (2 * nu - 1))
            worst = max(worst, entropy_difference_lower_bound(x, y) - delta)
    return worst


# =============================================================================
# Fuchs channel
# =============================================================================

def fuchs_min_entropy() -> float:
    return min_output_entropy(catalog("fuchs"))[0]


def fuchs_endpoint_entropy() -> float:
    return ellipse_geometry(catalog("fuchs")).endpoint_entropy


def fuchs_fixed_point_error() -> float:
    return float(np.max(np.abs(fixed_point(catalog("fuchs")).w - np.array([0.0, 0.0, 0.5]))))


def fuchs_cp_margin() -> float:
    return cp_report(catalog("fuchs")).margin(NONUNITAL_ID)


def fuchs_c_points_error() -> float:
    points = ellipse_geometry(catalog("fuchs")).min_entropy_points
    expected = np.array([[0.5, 0.0, 0.5], [-0.5, 0.0, 0.5]])
    return float(np.max(np.abs(points - expected)))


# =============================================================================
# Capacities
# =============================================================================

def capacity_unital_coincidence() -> float:
    rng = _rng(3)
    worst = 0.0
    for _ in range(50):
        channel = random_unital_channel(rng)
        worst = max(worst, abs(shannon_capacity(channel)[0] - holevo_capacity(channel)[0]))
    return worst


def capacity_closed_form_error() -> float:
    rng = _rng(4)
    worst = 0.0
    for _ in range(50):
        channel = random_unital_channel(rng)
        mu = float(np.max(np.abs(np.linalg.svd(channel.T, compute_uv=False))))
        expected = math.log(2.0) - binary_entropy_h(mu)
        worst = max(worst, abs(holevo_capacity(channel)[0] - expected))
    return worst


def _catalog_examples() -> List[ChannelAffine]:
    defaults = {
        CatalogName.AMPLITUDE_DAMPING: [0.5],
        CatalogName.DEPOLARIZING: [0.25],
        CatalogName.PHASE_DAMPING: [0.5],
        CatalogName.ROTATION: [0.7, 1.0, 1.0, 0.0],
        CatalogName.SPLAYING_FAMILY: [0.5, 0.2, 0.3],
        CatalogName.TWO_PAULI: [0.5],
    }
    return [catalog(name, defaults.get(name, [])) for name in CATALOG]


def capacity_holevo_bound_excess() -> float:
    worst = 0.0
    for channel in _catalog_examples():
        worst = max(worst, shannon_capacity(channel)[0] - holevo_capacity(channel)[0])
    return worst


# =============================================================================
# Scans
# =============================================================================

@lru_cache(maxsize=None)
def _additivity(key: str):
    name, x = SCAN_CHANNELS[key]
    channel = catalog(name, [x])
    return additivity_scan(channel, channel, samples=SCAN_SAMPLES, seed=DEFAULT_SEED, refine=True)


def _additivity_shortfall(key: str) -> float:
    return max(0.0, -_additivity(key).gap)


def _schmidt_distance(key: str) -> float:
    return 1.0 - float(schmidt_decompose(_additivity(key).best_state).coefficients[0])


def norm_multiplicativity_excess() -> float:
    rng = _rng(5)
    worst = -math.inf
    for k in range(20):
        phi, omega = random_unital_channel(rng), random_cp_channel(rng)
        result = norm_multiplicativity_scan(phi, omega, samples=10_000, seed=DEFAULT_SEED + k)
        worst = max(worst, result.gap)
    return max(worst, 0.0)


def mixing_theorem_shortfall() -> float:
    rng = _rng(6)
    worst = 0.0
    for k in range(10):
        mu = float(rng.uniform(0.2, 0.9))
        u = float(rng.uniform(-mu, mu)) * 0.9
        channel = ChannelAffine.diagonal([mu, u, mu])
        if not cp_report(channel).is_cp:
            continue
        result = mixing_scan(channel, channel, samples=1_000, seed=DEFAULT_SEED + k)
        worst = max(worst, 2.0 * binary_entropy_h(mu) - result.best_value)
    return worst


CHECKS: Dict[str, Callable[[], float]] = {
    "block_spectrum_oracle": block_spectrum_oracle,
    "cp_tetrahedron_vs_choi": cp_tetrahedron_vs_choi,
    "cp_nonunital_vs_choi": cp_nonunital_vs_choi,
    "small_mu_negative_points": small_mu_negative_points,
    "small_mu_relative_error": small_mu_relative_error,
    "large_mu_mu_2mu_minus_1_relative_error": large_mu_mu_2mu_minus_1_relative_error,
    "large_mu_2mu_minus_1_squared_relative_error": large_mu_2mu_minus_1_squared_relative_error,
    "two_channel_negative_points": two_channel_negative_points,
    "two_channel_lower_bound_shortfall": two_channel_lower_bound_shortfall,
    "fuchs_min_entropy": fuchs_min_entropy,
    "fuchs_endpoint_entropy": fuchs_endpoint_entropy,
    "fuchs_fixed_point_error": fuchs_fixed_point_error,
    "fuchs_cp_margin": fuchs_cp_margin,
    "fuchs_c_points_error": fuchs_c_points_error,
    "capacity_unital_coincidence": capacity_unital_coincidence,
    "capacity_closed_form_error": capacity_closed_form_error,
    "capacity_holevo_bound_excess": capacity_holevo_bound_excess,
    "norm_multiplicativity_excess": norm_multiplicativity_excess,
    "mixing_theorem_shortfall": mixing_theorem_shortfall,
}
for _key in SCAN_CHANNELS:
    CHECKS[f"additivity_{_key}"] = lambda key=_key: _additivity_shortfall(key)
    CHECKS[f"schmidt_{_key}"] = lambda key=_key: _schmidt_distance(key)


def evaluate(csv_path: str = "eval_set.csv") -> None:
    """Run tiered benchmark and report per-tier metrics."""
    if not os.path.exists(csv_path):
        logger.warning(f"{csv_path} not found. Run generate_data.py first.")
        return

    results: Dict[str, Dict] = defaultdict(lambda: {
        "total": 0, "passed": 0, "latencies": [], "errors": []
    })

    with open(csv_path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))

    logger.info(f"Running {len(rows)} checks...")
    tiers: List[str] = []
    for row in rows:
        check, tier = row["check"], row["tier"]
        expected, tolerance = float(row["expected"]), float(row["tolerance"])
        if tier not in tiers:
            tiers.append(tier)
        results[tier]["total"] += 1

        start = time.time()
        try:
            actual = CHECKS[check]()
            latency = time.time() - start
            results[tier]["latencies"].append(latency)
            if abs(actual - expected) <= tolerance:
                results[tier]["passed"] += 1
            else:
                results[tier]["errors"].append({
                    "check": check, "expected": expected, "tolerance": tolerance, "actual": actual,
                })
            logger.info(f"  {check}: {actual:.6g} ({latency:.2f}s)")
        except Exception as e:
            logger.error(f"Error: {check}: {e}")
            results[tier]["latencies"].append(time.time() - start)
            results[tier]["errors"].append({
                "check": check, "expected": expected, "tolerance": tolerance, "actual": f"ERROR: {e}",
            })

    print("\n" + "=" * 60)
    print("EVALUATION RESULTS")
    print("=" * 60)

    all_latencies: List[float] = []
    total_passed = total_checks = 0
    for tier in tiers:
        r = results[tier]
        all_latencies.extend(r["latencies"])
        total_passed += r["passed"]
        total_checks += r["total"]

        print(f"\n{tier.upper()} ({r['total']} checks)")
        print(f"  Passed:   {r['passed']}/{r['total']} = {r['passed'] / r['total']:.1%}")
        print(_latency_line(r["latencies"]))
        for err in r["errors"][:3]:
            print(f"    {err['check']}: expected {err['expected']} +- {err['tolerance']}, got {err['actual']}")

    print(f"\n{'=' * 60}")
    print("OVERALL")
    print(f"  Passed:   {total_passed}/{total_checks} = {total_passed / max(total_checks, 1):.1%}")
    print(_latency_line(all_latencies))
    print("=" * 60)

    all_errors: List[Dict] = []
    for tier, r in results.items():
        for err in r["errors"]:
            err["tier"] = tier
            all_errors.append(err)

    if all_errors:
        with open("eval_errors.json", "w") as f:
            json.dump(all_errors, f, indent=2)
        print(f"\nDetailed errors saved to eval_errors.json ({len(all_errors)} errors)")


if __name__ == "__main__":
    evaluate()
