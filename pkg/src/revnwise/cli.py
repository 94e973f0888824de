"""Command-line entry point: ``revnwise <subcommand> ...``.

Exit codes: 0 success, 1 invalid input (bad flags, files or schemas, or a
covering array that fails verification), 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from .domain import dump_partitions, load_partitions, output_space_cardinality
from .errors import PipelineError, ValidationError
from .faults import default_faults, dump_faults, fdr, load_faults, random_suite
from .metrics import CoverageLedger, CoverageReport, drift, prioritize
from .oca import FeasibilityModel, generate_oca, read_oca, size_lower_bound, verify_oca
from .pipeline import (
    SUT_KINDS,
    PipelineConfig,
    SUTConfig,
    Test,
    build_space,
    build_sut,
    run_pipeline,
    solve_rows,
    suite_json,
)
from .search import InverseTarget, OptimizerConfig
from .sut import SyntheticTabularSUT, adult_space, quantum_space


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def _feasibility(args, space):
    return FeasibilityModel.load(args.feasibility, space) if args.feasibility else FeasibilityModel()


def _load_suite(path, space):
    data = _read_json(path)
    if not isinstance(data, list):
        raise ValidationError(f"{path}: expected a list of tests")
    tests = []
    for i, t in enumerate(data):
        try:
            tests.append((tuple(t["input"]), space.indices_of(t["tuple"])))
        except KeyError as exc:
            raise ValidationError(f"{path}: [{i}] missing field {exc}") from None
        except ValidationError as exc:
            raise ValidationError(f"{path}: [{i}].tuple: {exc}") from None
    return data, tests


# ---------------------------------------------------------------------------
# subcommands


def cmd_partitions_validate(args):
    if args.emit:
        space = adult_space() if args.emit == "adult" else quantum_space(1)
        dump_partitions(space, args.path)
    space = load_partitions(args.path)
    _emit({
        "valid": True,
        "q": space.q,
        "dimensions": [{"name": n, "kind": s.kind, "classes": list(map(str, s.classes))} for n, s in space.dimensions],
        "full_tuple_count": output_space_cardinality(space),
    })
    return 0


def cmd_oca_generate(args):
    space = load_partitions(args.partitions)
    feas = _feasibility(args, space)
    oca = generate_oca(space, args.strength, feas, seed=args.seed, n_candidates=args.candidates)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    oca.to_csv(out / "oca.csv")
    _emit({"M": oca.M, "strength": oca.strength, "lower_bound": size_lower_bound(space, args.strength, feas),
           "path": str(out / "oca.csv")})
    return 0


def cmd_oca_verify(args):
    space = load_partitions(args.partitions) if args.partitions else None
    oca = read_oca(args.oca, space)
    feas = _feasibility(args, oca.space)
    report = verify_oca(oca, feas)
    _emit(report.to_json(oca.space))
    return 0 if report.ok else 1


def cmd_synthesize(args):
    cfg = PipelineConfig(
        partitions=args.partitions,
        seed=args.seed,
        workers=args.workers,
        sut=SUTConfig(kind=args.sut, command=args.sut_cmd),
        optimizer=OptimizerConfig(strategy=args.strategy, budget=args.budget),
    )
    # searching needs the concrete class boundaries, which the sidecar does not carry
    oca = read_oca(args.oca, build_space(cfg))
    sut = build_sut(cfg)
    try:
        outcomes = solve_rows(cfg, sut, [InverseTarget(oca.space, r) for r in oca.row_tuples()])
    finally:
        if hasattr(sut, "close"):
            sut.close()
    _emit([o.to_json(oca.space) for o in outcomes], Path(args.out) / "outcomes.json" if args.out else None)
    if args.out:
        _emit({"rows": oca.M, "successful": sum(o.success for o in outcomes)})
    return 0


def cmd_run(args):
    if args.config:
        cfg = PipelineConfig.load(args.config)
    else:
        cfg = PipelineConfig()
    overrides = {}
    for name in ("partitions", "feasibility", "seed", "strength", "workers", "theta", "out"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    if args.faults is not None:
        overrides["faults"] = args.faults
    if args.sut is not None or args.sut_cmd is not None:
        overrides["sut"] = replace(cfg.sut, kind=args.sut or cfg.sut.kind, command=args.sut_cmd or cfg.sut.command)
    if overrides:
        cfg = PipelineConfig.from_dict({**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__}, **overrides})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        arts = run_pipeline(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    summary = {
        "out": cfg.out,
        "M": arts.oca.M,
        "successful_rows": arts.successful_rows,
        "admitted": len(arts.admitted),
        "ocov": arts.coverage.ocov,
        "eta": arts.coverage.eta,
        "alpha": float(arts.alpha),
        "guarantee": arts.guarantee,
    }
    if arts.fault_report is not None:
        summary["faults_detected"] = f"{arts.fault_report.detected}/{arts.fault_report.total}"
    _emit(summary)
    return 0


def _ledger_from(args):
    space = load_partitions(args.partitions) if args.partitions else None
    oca = read_oca(args.oca, space)
    return oca, CoverageLedger.from_oca(oca)


def cmd_coverage(args):
    oca, ledger = _ledger_from(args)
    _, tests = _load_suite(args.suite, oca.space)
    for _, tup in tests:
        ledger.record(tup)
    report = ledger.report()
    if args.heatmaps:
        report.write_heatmaps(args.heatmaps)
    _emit(report.to_json(), args.out)
    return 0


def cmd_prioritize(args):
    oca, ledger = _ledger_from(args)
    raw, tests = _load_suite(args.suite, oca.space)
    ordered = prioritize([(x, tup, i) for i, (x, tup) in enumerate(tests)], ledger)
    work = ledger.fresh()
    result = []
    for x, tup, i in ordered:
        gain = work.incremental_gain(tup)
        work.record(tup)
        t = Test(raw[i].get("row", -1), x, tup, gain, raw[i].get("success", False))
        result.extend(suite_json(oca.space, [t]))
    _emit(result, args.out)
    return 0


def cmd_drift(args):
    a, b = CoverageReport.load(args.report_v), CoverageReport.load(args.report_v1)
    d = drift(a, b, threshold=args.threshold)
    _emit(d.to_json(a.space), args.out)
    return 0


def cmd_faults(args):
    ref = SyntheticTabularSUT()
    if args.emit_default:
        dump_faults(default_faults(ref), args.emit_default)
    faults = load_faults(args.faults) if args.faults else default_faults(ref)
    out = {}
    if args.suite:
        _, tests = _load_suite(args.suite, ref.space)
        out["suite"] = fdr(faults, [x for x, _ in tests], ref).to_json(ref.space) if tests else None
    if args.baseline:
        out["baseline"] = {
            "n": args.baseline,
            "seed": args.seed,
            **fdr(faults, random_suite(ref.input_domain, args.baseline, args.seed), ref).to_json(ref.space),
        }
    if not out:
        out["faults"] = [f.to_json() for f in faults]
    _emit(out, args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    ap = _Parser(prog="revnwise", description="Reverse n-wise output testing.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("partitions-validate", help="check a partition file")
    p.add_argument("path")
    p.add_argument("--emit", choices=["adult", "quantum"], help="first write a preset partition file to PATH")
    p.set_defaults(func=cmd_partitions_validate)

    p = sub.add_parser("oca-generate", help="build a covering array over output classes")
    p.add_argument("--partitions", required=True)
    p.add_argument("--feasibility")
    p.add_argument("--strength", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--candidates", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oca_generate)

    p = sub.add_parser("oca-verify", help="check that an array covers every feasible tuple")
    p.add_argument("oca")
    p.add_argument("--partitions")
    p.add_argument("--feasibility")
    p.set_defaults(func=cmd_oca_verify)

    p = sub.add_parser("synthesize", help="search inputs for every row of an array")
    p.add_argument("--oca", required=True)
    p.add_argument("--partitions")
    p.add_argument("--sut", choices=SUT_KINDS, default="synthetic")
    p.add_argument("--sut-cmd")
    p.add_argument("--strategy", choices=["metaheuristic", "bayesian", "quantum"], default="metaheuristic")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--config")
    p.add_argument("--partitions")
    p.add_argument("--feasibility")
    p.add_argument("--seed", type=int)
    p.add_argument("--strength", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--sut", choices=SUT_KINDS)
    p.add_argument("--sut-cmd")
    p.add_argument("--theta", type=float)
    p.add_argument("--faults", help="'default' or a fault file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("coverage", help="recompute coverage from a suite file")
    p.add_argument("--suite", required=True)
    p.add_argument("--oca", required=True)
    p.add_argument("--partitions")
    p.add_argument("--heatmaps", help="directory for per-pair CSV matrices")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("prioritize", help="greedy coverage order of a suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--oca", required=True)
    p.add_argument("--partitions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prioritize)

    p = sub.add_parser("drift", help="coverage change between two reports")
    p.add_argument("report_v")
    p.add_argument("report_v1")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("faults", help="fault detection of a suite and a random baseline")
    p.add_argument("--suite")
    p.add_argument("--faults")
    p.add_argument("--baseline", type=int, default=0, help="size of a random baseline suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-default", help="write the calibrated default catalog to this path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_faults)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc.cause, ValidationError) else 2
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
