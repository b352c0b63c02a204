"""
QChan command line
==================
1. cp-check  - inequality margins and Choi minimum eigenvalue of a channel spec
2. analyze   - normal form, norms, entropies, fixed point and capacities
3. curve     - CSV of entropy differences 4[S(1) - S(0)] along extreme branches
4. scan      - randomized additivity / norm / mixing search over entangled inputs
5. catalog   - built-in channels with parameter ranges and CP conditions

Channels are given as JSON spec files or as `catalog:<name>[:p1,p2,...]`.
Exit codes: 0 ok, 1 input error, 2 not completely positive, 3 violation found.
"""

import argparse
import csv
import json
import logging
import math
import sys
from enum import IntEnum
from typing import Any, Dict, Iterable, List, Optional, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from analysis import get_analysis_service
from channel import CATALOG, ChannelAffine, KrausConvention, KrausSet, as_affine, catalog, kraus_to_affine
from config import CSV_DIGITS, CURVE_FLOOR, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_WORKERS, LOG_LEVEL
from cp import cp_report
from errors import DomainError, NotCompletelyPositiveError, QChanError
from minent import (
    ScanKind,
    SamplingMode,
    UvRule,
    additivity_scan,
    branch_value,
    entropy_difference_params,
    mixing_scan,
    norm_multiplicativity_scan,
)

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

Vector3 = Tuple[float, float, float]
ComplexPair = Tuple[float, float]


class ExitCode(IntEnum):
    OK = 0
    INPUT_ERROR = 1
    NOT_CP = 2
    VIOLATION = 3


# =============================================================================
# Channel spec files
# =============================================================================

class KrausRep(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ops: List[Tuple[Tuple[ComplexPair, ComplexPair], Tuple[ComplexPair, ComplexPair]]]
    convention: KrausConvention = KrausConvention.ADJOINT

    @model_validator(mode="before")
    @classmethod
    def _bare_list(cls, value: Any) -> Any:
        if isinstance(value, list):
            return {"ops": value}
        return value

    def to_kraus(self) -> KrausSet:
        ops = tuple(np.array([[complex(re, im) for re, im in row] for row in op]) for op in self.ops)
        return KrausSet(ops, self.convention)


class AffineRep(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t: Vector3
    T: Tuple[Vector3, Vector3, Vector3]


class DiagonalRep(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    lambdas: Vector3 = Field(alias="lambda")
    t: Vector3 = (0.0, 0.0, 0.0)


class ChannelSpec(BaseModel):
    """One channel per file; exactly one of kraus / affine / diagonal."""
    model_config = ConfigDict(extra="forbid")

    name: str
    kraus: Optional[KrausRep] = None
    affine: Optional[AffineRep] = None
    diagonal: Optional[DiagonalRep] = None

    @field_validator("name")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("name must not be empty")
        return value

    @model_validator(mode="after")
    def _one_rep(self) -> "ChannelSpec":
        present = [k for k in ("kraus", "affine", "diagonal") if getattr(self, k) is not None]
        if len(present) != 1:
            raise ValueError(f"exactly one of kraus, affine, diagonal is required, got {present or 'none'}")
        return self

    def to_channel(self) -> ChannelAffine:
        if self.kraus is not None:
            return kraus_to_affine(self.kraus.to_kraus())
        if self.affine is not None:
            return ChannelAffine(self.affine.t, self.affine.T)
        return ChannelAffine.diagonal(self.diagonal.lambdas, self.diagonal.t)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True, indent=2)


def spec_from_channel(name: str, channel) -> ChannelSpec:
    """Diagonal rep when T has no off-diagonal entries, affine otherwise."""
    channel = as_affine(channel)
    t = tuple(float(x) for x in channel.t)
    if np.count_nonzero(channel.T - np.diag(np.diag(channel.T))) == 0:
        return ChannelSpec(name=name, diagonal=DiagonalRep(lambdas=tuple(float(x) for x in channel.lambdas), t=t))
    T = tuple(tuple(float(x) for x in row) for row in channel.T)
    return ChannelSpec(name=name, affine=AffineRep(t=t, T=T))


def load_spec(path: str) -> ChannelSpec:
    with open(path, "r", encoding="utf-8") as f:
        return ChannelSpec.model_validate_json(f.read())


def load_channel(ref: str) -> Tuple[str, ChannelAffine]:
    """A spec file path, or catalog:<name>[:p1,p2,...]."""
    if ref.startswith("catalog:"):
        _, _, rest = ref.partition(":")
        name, _, params = rest.partition(":")
        values = [float(p) for p in params.split(",") if p.strip()]
        label = name if not values else f"{name}({', '.join(f'{v:g}' for v in values)})"
        return label, catalog(name, values)
    spec = load_spec(ref)
    return spec.name, spec.to_channel()


def _describe(error: Exception) -> str:
    if isinstance(error, ValidationError):
        parts = []
        for e in error.errors():
            location = ".".join(str(p) for p in e["loc"]) or "spec"
            parts.append(f"{location}: {e['msg']}")
        return "invalid channel spec: " + "; ".join(parts)
    return str(error)


# =============================================================================
# Output helpers
# =============================================================================

def _fmt(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.10g}"


def _vec(v: Optional[Iterable[float]]) -> str:
    return "n/a" if v is None else "(" + ", ".join(f"{x:.8g}" for x in v) + ")"


def _print_json(payload: Dict):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _banner(title: str):
    print("=" * 60)
    print(title)
    print("=" * 60)


# =============================================================================
# Commands
# =============================================================================

def cmd_cp_check(args) -> ExitCode:
    name, channel = load_channel(args.spec)
    report = cp_report(channel)

    if args.json:
        _print_json({"name": name, **report.to_dict()})
    else:
        _banner(f"CP CHECK: {name}")
        print(f"  completely positive: {'yes' if report.is_cp else 'no'}")
        print(f"  boundary:            {'yes' if report.boundary else 'no'}")
        print(f"  Choi min eigenvalue: {report.choi_min_eigenvalue:.6e}")
        print("  margins:")
        for m in report.margins:
            flag = "" if m.satisfied else "  VIOLATED"
            print(f"    {m.identifier:<24} {m.margin: .6e}{flag}")
        if report.advisory:
            print("  advisory (diagonal entries, necessary only):")
            for m in report.advisory:
                print(f"    {m.identifier:<29} {m.margin: .6e}")
        if report.violated:
            print(f"  violated: {', '.join(m.identifier for m in report.violated)}")

    return ExitCode.OK if report.is_cp else ExitCode.NOT_CP


def cmd_analyze(args) -> ExitCode:
    name, channel = load_channel(args.spec)
    report = get_analysis_service().analyze(channel, name, require_cp=not args.allow_non_cp)
    data = report.to_dict(bits=args.bits)

    if args.json:
        _print_json(data)
        return ExitCode.OK

    unit = data["unit"]
    nf = report.normal_form
    _banner(f"ANALYSIS: {name}")
    print(f"  t = {_vec(report.channel.t)}")
    print(f"  T = {[_vec(row) for row in report.channel.T]}")
    print(f"  completely positive: {'yes' if report.cp.is_cp else 'no'} "
          f"(Choi min {report.cp.choi_min_eigenvalue:.3e}{', boundary' if report.cp.boundary else ''})")
    print("\nNormal form T = R2 diag(l) R1^T")
    print(f"  lambdas:     {_vec(nf.lambdas)}")
    print(f"  translation: {_vec(nf.translation)}")
    print(f"  R1 rows:     {[_vec(row) for row in nf.pre_rotation]}")
    print(f"  R2 rows:     {[_vec(row) for row in nf.post_rotation]}")
    if not report.cp.is_cp:
        return ExitCode.OK

    print("\nOutputs")
    print(f"  max output norm M:      {_fmt(data['max_norm'])}")
    print(f"  min output entropy:     {_fmt(data['min_output_entropy'])} {unit}")
    print(f"  achieved at input:      {_vec(report.min_entropy_input)}")
    print(f"  fixed point:            {_vec(report.fixed_point)}")
    if report.entropy_set is not None:
        print(f"  minimal-entropy set:    {report.entropy_set.kind.value} (mu = {report.entropy_set.mu:.10g})")
    if report.ellipse is not None:
        print(f"  ellipse endpoints A+-:  {[_vec(p) for p in report.ellipse.endpoints]} "
              f"(entropy {_fmt(data['ellipse']['endpoint_entropy'])} {unit})")
        print(f"  max-length points C+-:  {[_vec(p) for p in report.ellipse.min_entropy_points]} "
              f"(length {report.ellipse.level_circle_radius:.10g})")

    print("\nCapacities")
    print(f"  Holevo:  {_fmt(data['holevo_capacity'])} {unit}")
    print(f"    priors {_vec(report.holevo_priors)}, inputs {[_vec(w) for w in report.holevo_inputs]}")
    print(f"  Shannon: {_fmt(data['shannon_capacity'])} {unit}")
    print(f"    measurement axis {_vec(report.shannon_axis)}")
    return ExitCode.OK


def _parse_case(case: str) -> Tuple[UvRule, UvRule]:
    named = {
        "uv=+mu2": (UvRule.MU, UvRule.MU),
        "uv=mu2": (UvRule.MU, UvRule.MU),
        "uv=-mu2": (UvRule.MU, UvRule.MINUS_MU),
        "uv=mu(2mu-1)": (UvRule.MU, UvRule.TWO_MU_MINUS_1),
        "uv=(2mu-1)2": (UvRule.TWO_MU_MINUS_1, UvRule.TWO_MU_MINUS_1),
    }
    key = case.replace(" ", "")
    if key in named:
        return named[key]
    try:
        parts = dict(p.split("=", 1) for p in key.split(","))
        return UvRule(parts["u"]), UvRule(parts["v"].replace("nu", "mu"))
    except (ValueError, KeyError):
        raise DomainError(
            f"Unknown curve case '{case}'; use one of {', '.join(named)} or u=<rule>,v=<rule> "
            f"with rules {', '.join(r.value for r in UvRule)}"
        ) from None


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    return np.linspace(lo, hi, steps + 1)


def curve_rows(family: str, case: str, mu_range: Tuple[float, float, int],
               nu_range: Optional[Tuple[float, float, int]] = None) -> Tuple[List[str], List[Tuple[float, ...]]]:
    """Header and (mu[, nu], delta) rows; delta in nats."""
    u_rule, v_rule = _parse_case(case)
    mus = _grid(*mu_range)
    if family == "phi-eq-omega" or nu_range is None:
        rows = []
        for mu in mus:
            uv = branch_value(u_rule, mu) * branch_value(v_rule, mu)
            rows.append((float(mu), entropy_difference_params(mu, mu, uv)))
        return ["mu", "delta"], rows

    nus = _grid(*nu_range)
    rows = []
    for mu in mus:
        u = branch_value(u_rule, mu)
        for nu in nus:
            uv = u * branch_value(v_rule, nu)
            rows.append((float(mu), float(nu), entropy_difference_params(mu, nu, uv)))
    return ["mu", "nu", "delta"], rows


def write_curve_csv(out: TextIO, header: List[str], rows: List[Tuple[float, ...]], scale: float = 1.0):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        values = list(row[:-1]) + [row[-1] * scale]
        writer.writerow([f"{v:.{CSV_DIGITS}g}" for v in values])


def cmd_curve(args) -> ExitCode:
    nu_range = None
    if args.nu_min is not None or args.nu_max is not None:
        nu_range = (
            args.mu_min if args.nu_min is None else args.nu_min,
            args.mu_max if args.nu_max is None else args.nu_max,
            args.nu_steps or args.steps,
        )
    header, rows = curve_rows(args.family, args.case, (args.mu_min, args.mu_max, args.steps), nu_range)
    scale = 1.0 / LN2 if args.bits else 1.0

    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            write_curve_csv(f, header, rows, scale)
        logger.info(f"Wrote {len(rows)} rows to {args.out}")
    else:
        write_curve_csv(sys.stdout, header, rows, scale)

    worst = min(row[-1] for row in rows)
    if worst < CURVE_FLOOR:
        logger.warning(f"Entropy difference drops to {worst:.3e} below the floor {CURVE_FLOOR:g}")
        return ExitCode.VIOLATION
    return ExitCode.OK


def cmd_scan(args) -> ExitCode:
    name_a, phi = load_channel(args.spec_a)
    name_b, omega = load_channel(args.spec_b)
    kind = ScanKind(args.kind)
    options = dict(samples=args.samples, seed=args.seed, workers=args.workers)

    if kind is ScanKind.ADDITIVITY:
        result = additivity_scan(phi, omega, mode=args.mode, refine=not args.no_refine, **options)
    elif kind is ScanKind.NORM:
        result = norm_multiplicativity_scan(phi, omega, mode=args.mode, refine=not args.no_refine, **options)
    else:
        result = mixing_scan(phi, omega, **options)

    data = result.to_dict()
    data["channels"] = [name_a, name_b]
    if args.bits and kind is not ScanKind.NORM:
        for key in ("best_value", "product_baseline", "gap"):
            if data[key] is not None:
                data[key] /= LN2
        data["unit"] = "bits"

    if args.json:
        _print_json(data)
    else:
        unit = "" if kind is ScanKind.NORM else (" bits" if args.bits else " nats")
        _banner(f"{kind.value.upper()} SCAN: {name_a} (x) {name_b}")
        print(f"  samples: {result.samples}  seed: {result.seed}  workers: {result.workers}  "
              f"mode: {result.mode.value}  refined: {'yes' if result.refined else 'no'}")
        print(f"  product baseline: {_fmt(data['product_baseline'])}{unit}")
        print(f"  best value:       {_fmt(data['best_value'])}{unit}")
        print(f"  gap:              {_fmt(data['gap'])}{unit}")
        if result.best_state is not None:
            print(f"  best state:       {[f'{z:.6g}' for z in result.best_state.vector]}")
        print(f"  violation:        {'YES' if result.violation else 'no'} (tolerance {result.tolerance:g})")

    return ExitCode.VIOLATION if result.violation else ExitCode.OK


def cmd_catalog(args) -> ExitCode:
    entries = sorted(CATALOG.values(), key=lambda e: e.name.value)
    if args.json:
        _print_json({"channels": [
            {
                "name": e.name.value,
                "params": list(e.params),
                "optional_params": list(e.optional_params),
                "formula": e.formula,
                "range": e.param_range,
                "cp": e.cp_note,
            }
            for e in entries
        ]})
        return ExitCode.OK

    _banner("BUILT-IN CHANNELS")
    for e in entries:
        params = ", ".join(list(e.params) + [f"[{p}]" for p in e.optional_params])
        print(f"\n{e.name.value}({params})")
        print(f"  {e.formula}")
        print(f"  range: {e.param_range}")
        print(f"  CP:    {e.cp_note}")
    return ExitCode.OK


# =============================================================================
# Entry point
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qchan", description="Qubit stochastic map analysis")
    parser.add_argument("--json", action="store_true", help="emit one JSON object instead of text")
    parser.add_argument("--bits", action="store_true", help="report entropies and capacities in bits")
    parser.add_argument("--allow-non-cp", action="store_true", help="analyze maps that fail the CP test")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="logging level (default from QCHAN_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cp-check", help="complete-positivity margins")
    p.add_argument("spec")
    p.set_defaults(handler=cmd_cp_check)

    p = sub.add_parser("analyze", help="full single-channel report")
    p.add_argument("spec")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("curve", help="entropy-difference CSV")
    p.add_argument("--family", choices=["phi-eq-omega", "phi-neq-omega"], default="phi-eq-omega")
    p.add_argument("--case", required=True, help="uv=+mu2, uv=-mu2, uv=mu(2mu-1), uv=(2mu-1)2 or u=<rule>,v=<rule>")
    p.add_argument("--mu-min", type=float, default=0.0)
    p.add_argument("--mu-max", type=float, default=1.0 / 3.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--nu-min", type=float)
    p.add_argument("--nu-max", type=float)
    p.add_argument("--nu-steps", type=int)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(handler=cmd_curve)

    p = sub.add_parser("scan", help="randomized search over entangled inputs")
    p.add_argument("kind", choices=[k.value for k in ScanKind])
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    p.add_argument("--mode", choices=[m.value for m in SamplingMode], default=SamplingMode.HAAR.value)
    p.add_argument("--no-refine", action="store_true")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("catalog", help="list built-in channels")
    p.set_defaults(handler=cmd_catalog)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s: %(message)s")

    try:
        return int(args.handler(args))
    except NotCompletelyPositiveError as e:
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.NOT_CP)
    except (QChanError, ValidationError, OSError, ValueError) as e:
        print(f"error: {_describe(e)}", file=sys.stderr)
        return int(ExitCode.INPUT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
