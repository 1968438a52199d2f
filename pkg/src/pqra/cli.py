"""Command-line front end: check, run, and bound-verify circuit programs.

Examples:
    pqra prog.pqr -g width --check-only
    pqra prog.pqr -g gatecount --verify-bounds n=0..8
    pqra prog.pqr -l depth --eval n=3,i=0 --dump-circuit
    pqra prog.pqr -g width --verify-bounds --report out/

Exit status: 0 on success (all bounds sound), 1 on parse/type errors or bad
usage, 2 when a measured circuit exceeds its derived bound.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import Checker, CheckStrategy, TypeCheckError
from .circuits import random_circuits, serialize
from .indices import LE, Empty, ExportError, NatLit, export_smtlib, pretty_index, simplify
from .profiles import (
    get_profile,
    validate_cmi_sound,
    validate_local_coherence,
    validate_well_behaved,
)
from .runner import (
    BoundReport,
    RunError,
    binder_names,
    check,
    measure,
    run,
    target_binding,
    verify_bounds,
)
from .surface import SurfaceSyntaxError, parse, pretty

_GLOBAL_METRICS = ("width", "gatecount", "gatecount_all", "tcount", "qubits", "bits")
_LOCAL_METRICS = ("depth",)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pqra",
        description="Type-check circuit programs against resource bounds and "
        "validate those bounds by building and measuring the circuits.",
    )
    ap.add_argument("file", help="program to process (.pqr)")
    ap.add_argument(
        "-g",
        "--global-metric",
        dest="global_metric",
        choices=_GLOBAL_METRICS,
        help="global metric to bound (default: width)",
    )
    ap.add_argument(
        "-l",
        "--local-metric",
        dest="local_metric",
        choices=_LOCAL_METRICS,
        help="local (per-wire) metric to bound; overrides -g",
    )
    ap.add_argument(
        "--check-only",
        action="store_true",
        help="stop after type checking",
    )
    ap.add_argument(
        "--eval",
        metavar="VALS",
        help="run once at the given index values, e.g. n=3,i=0",
    )
    ap.add_argument(
        "--verify-bounds",
        metavar="RANGES",
        nargs="?",
        const="",
        default=None,
        help="sweep index values (e.g. n=0..8,i=0..2; default 0..8 each) and "
        "compare measured circuits against derived bounds",
    )
    ap.add_argument(
        "--dump-circuit",
        action="store_true",
        help="print the built circuit (runs --eval's instantiation)",
    )
    ap.add_argument(
        "--emit-smt",
        metavar="PATH",
        help="write the checker's entailment obligations as SMT-LIB scripts",
    )
    ap.add_argument(
        "--entailment-bound",
        metavar="K",
        type=int,
        help="exhaustive grid radius for entailment checking (default 8)",
    )
    ap.add_argument(
        "--validate-metrics",
        action="store_true",
        help="validate the selected metric's composition laws first",
    )
    ap.add_argument(
        "--report",
        metavar="DIR",
        help="write bounds.tsv and bounds.png for the --verify-bounds sweep",
    )
    return ap


def _parse_valuation(text: str) -> dict:
    out: dict = {}
    if not text:
        return out
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name, _, val = piece.partition("=")
        name = name.strip()
        if not name or not val.strip().isdigit():
            raise ValueError(f"bad index assignment '{piece}' (want name=nat)")
        out[name] = int(val.strip())
    return out


def _parse_ranges(text: str) -> dict:
    out: dict = {}
    if not text:
        return out
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name, _, span = piece.partition("=")
        name = name.strip()
        lo, dots, hi = span.partition("..")
        if not name or not dots or not lo.strip().isdigit() or not hi.strip().isdigit():
            raise ValueError(f"bad range '{piece}' (want name=lo..hi)")
        out[name] = (int(lo.strip()), int(hi.strip()))
    return out


def _valuation_str(valuation) -> str:
    return ", ".join(f"{k}={v}" for k, v in valuation) if valuation else "-"


def _write_report(report: BoundReport, directory: str) -> list:
    """Write bounds.tsv and bounds.png under `directory`; returns the paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    tsv = out / "bounds.tsv"
    lines = ["program\tprofile\tvaluation\tmeasured\tbound\tsound\texact"]
    for r in report.rows:
        val = ",".join(f"{k}={v}" for k, v in r.valuation) or "-"
        lines.append(
            f"{r.program}\t{r.profile}\t{val}\t{r.measured}\t{r.bound}"
            f"\t{str(r.sound).lower()}\t{str(r.exact).lower()}"
        )
    tsv.write_text("\n".join(lines) + "\n")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = list(range(len(report.rows)))
    measured = [r.measured for r in report.rows]
    bound = [r.bound for r in report.rows]
    labels = [",".join(f"{k}={v}" for k, v in r.valuation) or "-" for r in report.rows]
    fig, ax = plt.subplots(figsize=(8, 4.5), dpi=100)
    ax.plot(xs, bound, marker="s", linestyle="--", label="derived bound")
    ax.plot(xs, measured, marker="o", linestyle="-", label="measured")
    step = max(1, len(xs) // 16)
    ax.set_xticks(xs[::step])
    ax.set_xticklabels(labels[::step], rotation=45, ha="right", fontsize=8)
    ax.set_xlabel("instantiation")
    ax.set_ylabel(report.profile)
    ax.set_title(f"{report.program}: measured vs bound ({report.profile})")
    ax.legend()
    fig.tight_layout()
    png = out / "bounds.png"
    fig.savefig(png, metadata={"Software": "pqra"})
    plt.close(fig)
    return [tsv, png]


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)

    metric = args.local_metric or args.global_metric or "width"
    profile = get_profile(metric)

    strategy = None
    if args.entailment_bound is not None:
        strategy = CheckStrategy(grid_max=args.entailment_bound)

    if args.validate_metrics:
        corpus = random_circuits(24, seed=7, max_gates=10)
        checks = [
            ("composition laws", validate_well_behaved(profile.rmi, 16)),
            ("append coherence", validate_local_coherence(profile.rmi, profile.cmi, 12)),
            ("bound soundness", validate_cmi_sound(profile, corpus)),
        ]
        failed = False
        for label, rep in checks:
            print(f"metric {profile.name}: {label}: {rep.render()}")
            failed = failed or not rep.ok
        if failed:
            return 1

    try:
        source = Path(args.file).read_text()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        prog = parse(source)
    except SurfaceSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1

    checker = Checker(profile, strategy)
    try:
        reports = check(prog, profile, strategy, checker=checker)
    except TypeCheckError as e:
        print(f"type error: {e}", file=sys.stderr)
        return 1

    try:
        target = target_binding(prog)
    except RunError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    rep = reports[target]

    # Ascribed types are the user's own text; inferred ones are simplified
    # under the active profile.
    if rep.ascribed:
        print(f"Inferred type: {pretty(rep.type)}")
    else:
        print(f"Inferred type: {pretty(rep.type, profile)}")
    effect = simplify(rep.effect, profile)
    if not (isinstance(effect, Empty) or effect == NatLit(0)):
        print(f"Effect: {pretty_index(effect)}")

    if args.emit_smt:
        chunks = []
        obligations = sorted(
            checker._entail_cache.keys(),
            key=lambda k: (pretty_index(k[1]), pretty_index(k[2]), k[3]),
        )
        for n, (vars, lhs, rhs, rel) in enumerate(obligations):
            op = "<=" if rel == LE else "="
            head = f"; obligation {n}: {pretty_index(lhs)} {op} {pretty_index(rhs)}"
            try:
                chunks.append(head + "\n" + export_smtlib(vars, lhs, rhs, rel, profile))
            except ExportError as e:
                chunks.append(head + f"\n; skipped: {e}\n")
        Path(args.emit_smt).write_text("\n".join(chunks))
        print(f"Wrote {len(obligations)} obligations to {args.emit_smt}")

    if args.check_only:
        return 0

    binders = binder_names(rep.type)
    status = 0

    if args.eval is not None or (args.dump_circuit and args.verify_bounds is None):
        try:
            valuation = _parse_valuation(args.eval or "")
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        missing = [b for b in binders if b not in valuation]
        if missing:
            print(
                f"error: --eval needs values for {', '.join(missing)}",
                file=sys.stderr,
            )
            return 1
        try:
            outcome = run(prog, profile, valuation, target=target, reports=reports)
        except RunError as e:
            print(f"run error: {e}", file=sys.stderr)
            return 1
        measured, bound, sound, exact = measure(outcome, profile, valuation)
        shown = _valuation_str(tuple((b, valuation[b]) for b in binders))
        print(f"Run {target or 'main'} at {shown}:")
        qualifier = "exact" if exact else ("sound" if sound else "VIOLATION")
        print(f"  measured {profile.name} = {measured}, bound = {bound} ({qualifier})")
        if args.dump_circuit:
            print(serialize(outcome.circuit))
        if not sound:
            status = 2

    if args.verify_bounds is not None:
        try:
            ranges = _parse_ranges(args.verify_bounds)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        try:
            report = verify_bounds(
                prog, profile, ranges=ranges, target=target, strategy=strategy
            )
        except RunError as e:
            print(f"run error: {e}", file=sys.stderr)
            return 1
        for r in report.rows:
            qualifier = "exact" if r.exact else ("sound" if r.sound else "VIOLATION")
            print(
                f"  {_valuation_str(r.valuation)}: measured={r.measured} "
                f"bound={r.bound} {qualifier}"
            )
        verdict = "Sound" if report.sound else "UNSOUND"
        print(f"VerifyBounds {report.program} ({profile.name}): {verdict} "
              f"({len(report.rows)} runs)")
        if not report.sound:
            status = 2
        if args.report:
            for path in _write_report(report, args.report):
                print(f"Wrote {path}")
    elif args.report:
        print("error: --report needs --verify-bounds", file=sys.stderr)
        return 1

    return status


if __name__ == "__main__":
    sys.exit(main())
