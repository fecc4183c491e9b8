#!/usr/bin/env python
"""
Groupoid averaging CLI

Generate finite groupoids, check scenarios, run the averaging iteration with
its certificates, verify the cohomology contractions and build invariant
metrics.

Examples:
  groupoid-avg gen pair --n 3
  groupoid-avg gen bundle --groups z2,z3 -o bundle.json
  groupoid-avg check scenario.json
  groupoid-avg avg scenario.json --tol 1e-10 --trace runs/trace.csv
  groupoid-avg avg generated.json --seed 7
  groupoid-avg cohomology scenario.json --mode contract2-verify --seed 3
  groupoid-avg metric scenario.json --subset 0,1

Exit codes: 0 success, 2 validation failure, 3 gate refusal, 4 certificate violation.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from ..cohomology.cochains import (CoefficientSystem, coboundary0, coboundary1, contract1, contract2,
                                   defect_consistency, is_cocycle, random_cochain)
from ..config.settings import get_run_config
from ..errors import GateRefusedError, PreconditionError, StarvedOrbitError
from ..geometry.invariant_metric import average_metric, check_isometry, search_near_metric
from ..groupoid.core import ValidationReport, check_left_translation, validate
from ..groupoid.generators import (gen_action_groupoid, gen_group_bundle, gen_pair_groupoid,
                                   parse_group_spec, rotation_action, trivial_action)
from ..groupoid.haar import NormalizingFunction, check_left_invariance, check_normalizing
from ..metrics.certificates import CertificateLedger
from ..reps.iteration import iterate_average
from ..reps.pseudorep import (check_rep_shapes, defects, is_representation_over, near_representation_gate,
                              sup_distance)
from ..storage.artifacts import ArtifactStore
from ..storage.scenario import Scenario, load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_GATE = 3
EXIT_CERTIFICATE = 4

HOMOTOPY_TOL = 1e-11
CONSISTENCY_TOL = 1e-12
ISOMETRY_TOL = 1e-11


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def object_list(text: str) -> List[int]:
    text = text.strip()
    return [int(x) for x in text.split(",") if x.strip()] if text else []


def _print_report(report: ValidationReport, limit: int = 5) -> None:
    status = "OK" if report.ok else f"FAIL ({len(report.violations)} violations)"
    print(f"  {report.subject:<24} {status}")
    for v in report.violations[:limit]:
        print(f"      {v.check}: witness {list(v.witness)} {v.detail}")


def _require_rep(scenario: Scenario):
    if scenario.rep is None:
        raise ValueError(f"Scenario {scenario.source} has no 'rep' section")
    return scenario.rep


def _normalizing(scenario: Scenario, cfg: Dict[str, Any]) -> Optional[NormalizingFunction]:
    """The scenario's normalizing function, or None after reporting a non-invariant Haar system."""
    report = check_left_invariance(scenario.groupoid, scenario.haar, tol=cfg["norm_tol"])
    if not report.ok:
        print(f"Error: Haar system of {scenario.source} is not left invariant", file=sys.stderr)
        _print_report(report)
        return None
    return scenario.normalizing(tol=cfg["norm_tol"])


# ---------- gen ----------

def cmd_gen(args: argparse.Namespace, cfg: Dict[str, Any]) -> int:
    if args.kind == "pair":
        if args.n is None:
            print("Error: gen pair needs --n", file=sys.stderr)
            return EXIT_INVALID
        groupoid = gen_pair_groupoid(args.n)
    elif args.kind == "action":
        group = parse_group_spec(args.group)
        table = rotation_action(group.order) if args.action == "rotation" else \
            trivial_action(group, args.points)
        groupoid = gen_action_groupoid(group, table)
    else:
        groupoid = gen_group_bundle([parse_group_spec(s) for s in args.groups.split(",") if s.strip()])

    report = validate(groupoid)
    store = ArtifactStore(cfg["output_dir"])
    path = store.save_groupoid(groupoid, args.output or f"{args.kind}.json")
    print(f"Wrote {args.kind} groupoid ({groupoid.n_objects} objects, {groupoid.n_arrows} arrows) to {path}")
    if not report.ok:
        _print_report(report)
        return EXIT_INVALID
    return EXIT_OK


# ---------- check ----------

def cmd_check(args: argparse.Namespace, cfg: Dict[str, Any]) -> int:
    scenario = load_scenario(args.scenario)
    g = scenario.groupoid
    print(f"Checking {args.scenario} ({g.n_objects} objects, {g.n_arrows} arrows)")

    reports = [validate(g), check_left_translation(g),
               check_left_invariance(g, scenario.haar, tol=cfg["norm_tol"])]
    try:
        c = scenario.normalizing(tol=cfg["norm_tol"])
    except (StarvedOrbitError, PreconditionError) as e:
        for report in reports:
            _print_report(report)
        print(f"  {'normalizing_function':<24} FAIL: {e}")
        return EXIT_INVALID
    reports.append(check_normalizing(g, scenario.haar, c, tol=cfg["norm_tol"]))
    if scenario.rep is not None:
        reports.append(check_rep_shapes(scenario.rep))
    for report in reports:
        _print_report(report)

    if args.report:
        ArtifactStore(cfg["output_dir"]).write_report(
            {"scenario": args.scenario, "reports": [r.to_dict() for r in reports]}, args.report)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_INVALID


# ---------- avg ----------

def cmd_avg(args: argparse.Namespace, cfg: Dict[str, Any]) -> int:
    scenario = load_scenario(args.scenario, seed=args.seed)
    lam = _require_rep(scenario)
    c = _normalizing(scenario, cfg)
    if c is None:
        return EXIT_INVALID
    tol = args.tol if args.tol is not None else scenario.tol if scenario.tol is not None else cfg["tol"]
    max_iter = args.max_iter if args.max_iter is not None else \
        scenario.max_iter if scenario.max_iter is not None else cfg["max_iter"]
    store = ArtifactStore(cfg["output_dir"])

    metric, label = scenario.metric, "given"
    if args.search_metric:
        metric, _, label = search_near_metric(lam, scenario.haar, c, scenario.metric)
        print(f"Using {label} metric for the gate")

    try:
        final, trace = iterate_average(lam, scenario.haar, c, metric, tol=tol, max_iter=max_iter,
                                       force=args.force, max_parallel=cfg["max_parallel"],
                                       cond_limit=cfg["cond_limit"])
    except GateRefusedError as e:
        gate = e.report
        print(f"Refused: not a near representation (r = {gate.r:.6g}, "
              f"threshold = {gate.threshold:.6g}, b = {gate.b:.6g}). Use --force to iterate anyway.")
        store.write_report({"gate": gate.to_dict(), "refused": True}, args.report)
        return EXIT_GATE

    ledger = CertificateLedger(slack=cfg["cert_slack"]).grade(trace)
    final_defects = defects(final, metric)
    report: Dict[str, Any] = {
        "gate": near_representation_gate(lam, metric).to_dict(),
        "metric": label,
        "summary": trace.summary(),
        "final_defects": final_defects.to_dict(),
        "ledger": ledger.to_dict(),
    }
    if scenario.base_rep is not None:
        report["recovery"] = {
            "distance_to_base": sup_distance(final, scenario.base_rep, metric),
            "distance_from_start": sup_distance(final, lam, metric),
            "bound": CertificateLedger().recovery_bound(trace),
        }

    trace_path = store.write_trace(trace, args.trace or "trace.csv")
    store.write_summary(trace, args.summary)
    store.write_report(report, args.report)
    if args.save_rep:
        store.save_rep(final, args.save_rep)

    print(f"{trace.terminated_reason} after {trace.iterations} iterations: "
          f"r = {final_defects.r:.3e}, b = {final_defects.b:.6g}")
    print(f"Trace written to {trace_path}")
    if not trace.certified:
        print("Gate failed; certificates recorded but not claimed")
    elif ledger.violations:
        for check in ledger.violations[:5]:
            print(f"  certificate {check.name} violated at i={check.i}: {check.lhs:.6g} > {check.rhs:.6g}")
    if trace.terminated_reason == "converged" and ledger.ok:
        return EXIT_OK
    return EXIT_CERTIFICATE


# ---------- cohomology ----------

def _coefficients(scenario: Scenario) -> CoefficientSystem:
    spec = scenario.coefficients
    kind = spec.get("kind", "trivial")
    if kind == "trivial":
        return CoefficientSystem.trivial(scenario.groupoid, int(spec.get("dim", 1)))
    rep = _require_rep(scenario)
    if kind == "action":
        return CoefficientSystem.from_action(scenario.groupoid, rep.bundle, rep.maps)
    if kind == "factored":
        return CoefficientSystem.factored_system(rep, rep)
    raise ValueError(f"Unknown coefficient kind '{kind}'")


def cmd_cohomology(args: argparse.Namespace, cfg: Dict[str, Any]) -> int:
    scenario = load_scenario(args.scenario)
    c = _normalizing(scenario, cfg)
    if c is None:
        return EXIT_INVALID
    mu = scenario.haar
    result: Dict[str, Any] = {"mode": args.mode, "seed": args.seed}

    if args.mode == "defect-consistency":
        report = defect_consistency(_require_rep(scenario), mu, c)
        result.update(ratio_identity=report.ratio_identity, mean_ratio_identity=report.mean_ratio_identity)
        passed = report.worst <= CONSISTENCY_TOL
    else:
        rho = _coefficients(scenario)
        result["representation_defect"] = rho.representation_defect()
        if args.mode == "contract2-verify":
            z = coboundary1(random_cochain(rho, 1, args.seed), rho)
            result["is_cocycle"] = is_cocycle(z, rho, HOMOTOPY_TOL)
            residual = coboundary1(contract2(z, mu, c, rho), rho)
            diffs = {p: residual.values[p] - z.values[p] for p in z.values}
        else:
            x = coboundary0(random_cochain(rho, 0, args.seed), rho)
            result["is_cocycle"] = is_cocycle(x, rho, HOMOTOPY_TOL)
            residual = coboundary0(contract1(x, mu, c, rho), rho)
            diffs = {(a,): residual.values[a] - x.values[a] for a in range(len(x.values))}
        worst, witness = 0.0, None
        for simplex, d in diffs.items():
            n = float(np.linalg.norm(d))
            if n > worst:
                worst, witness = n, list(simplex)
        result.update(residual=worst, witness=witness)
        passed = worst <= HOMOTOPY_TOL

    result["passed"] = passed
    ArtifactStore(cfg["output_dir"]).write_report(result, args.report)
    print(f"{args.mode}: {'PASS' if passed else 'FAIL'}")
    for key, value in result.items():
        if key not in ("mode", "passed"):
            print(f"  {key}: {value}")
    return EXIT_OK if passed else EXIT_CERTIFICATE


# ---------- metric ----------

def cmd_metric(args: argparse.Namespace, cfg: Dict[str, Any]) -> int:
    scenario = load_scenario(args.scenario)
    lam = _require_rep(scenario)
    c = _normalizing(scenario, cfg)
    if c is None:
        return EXIT_INVALID
    subset = args.subset if args.subset is not None else scenario.subset
    if subset is None:
        subset = list(range(scenario.groupoid.n_objects))

    result = average_metric(scenario.metric, lam, scenario.haar, c, subset,
                            certify_saturation=args.saturation, eig_floor=cfg["eig_floor"],
                            max_parallel=cfg["max_parallel"])
    representation_on_s = is_representation_over(lam, subset, tol=cfg["norm_tol"])
    isometric = check_isometry(lam, result.metric, subset, tol=ISOMETRY_TOL)
    report = result.to_dict()
    report.update(isometric=isometric, representation_on_subset=representation_on_s)
    if is_representation_over(lam, range(scenario.groupoid.n_objects), tol=cfg["norm_tol"]):
        again = average_metric(result.metric, lam, scenario.haar, c, subset, certify=False)
        report["idempotence_defect"] = max(
            (float(np.abs(a - b).max()) for a, b in zip(again.metric.gram, result.metric.gram) if a.size),
            default=0.0)

    store = ArtifactStore(cfg["output_dir"])
    store.save_metric(result.metric, args.output)
    store.write_report(report, args.report)
    print(f"Averaged metric over S = {list(result.subset)}: invariance defect "
          f"{result.invariance_defect:.3e}, tau = {result.tau:g}")
    print(f"  min eigenvalues: {[f'{m:.4g}' for m in result.min_eigenvalues]}")
    if "idempotence_defect" in report:
        print(f"  idempotence defect: {report['idempotence_defect']:.3e}")
    if representation_on_s and not isometric:
        print("  isometry check FAILED on S")
        return EXIT_CERTIFICATE
    print(f"  isometry on S: {'yes' if isometric else 'no (not a representation over S)'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupoid-avg",
                                     description="Averaging of pseudo-representations of finite groupoids")
    parser.add_argument("--output-dir", default=None, help="Directory for written artifacts")
    parser.add_argument("--log-level", default=None, help="Logging level (DEBUG, INFO, WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Generate a groupoid JSON file")
    p.add_argument("kind", choices=["pair", "action", "bundle"])
    p.add_argument("--n", type=positive_int, help="Objects of the pair groupoid")
    p.add_argument("--group", default="z2", help="Acting group for 'action' (zN or sN)")
    p.add_argument("--action", choices=["rotation", "trivial"], default="rotation")
    p.add_argument("--points", type=positive_int, default=1, help="Points for the trivial action")
    p.add_argument("--groups", default="z2", help="Comma-separated isotropy groups for 'bundle'")
    p.add_argument("-o", "--output", default=None, help="Output file")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="Validate a scenario")
    p.add_argument("scenario")
    p.add_argument("--report", default=None, help="Write the check reports as JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("avg", help="Run the averaging iteration")
    p.add_argument("scenario")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--force", action="store_true", help="Iterate even when the gate fails")
    p.add_argument("--seed", type=int, default=None, help="Override the perturbation seed of a generated rep")
    p.add_argument("--search-metric", action="store_true",
                   help="Try Euclidean and orbit-averaged metrics if the given one fails the gate")
    p.add_argument("--trace", default=None, help="Trace CSV path")
    p.add_argument("--summary", default="summary.json")
    p.add_argument("--report", default="report.json")
    p.add_argument("--save-rep", default=None, help="Write the final iterate as a rep file")
    p.set_defaults(func=cmd_avg)

    p = sub.add_parser("cohomology", help="Verify contraction identities")
    p.add_argument("scenario")
    p.add_argument("--mode", choices=["contract2-verify", "contract1-verify", "defect-consistency"],
                   default="contract2-verify")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default="cohomology.json")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("metric", help="Average a fiber metric into an invariant one")
    p.add_argument("scenario")
    p.add_argument("--subset", type=object_list, default=None, help="Comma-separated object set S")
    p.add_argument("--saturation", action="store_true", help="Certify positivity on saturation(S)")
    p.add_argument("--output", default="metric.json")
    p.add_argument("--report", default="metric_report.json")
    p.set_defaults(func=cmd_metric)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run the groupoid averaging CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = get_run_config(output_dir=args.output_dir, log_level=args.log_level)
    logging.basicConfig(level=str(cfg["log_level"]).upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, cfg)
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
