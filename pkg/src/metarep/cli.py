"""Command-line front-end: analyze, adjust, simulate.

Exit codes: 0 success, 2 input validation failure, 3 precondition
failure (e.g. too few studies, non-significant summary for a bound),
4 subset-enumeration cap exceeded.

Relative output paths (plots, JSON, simulation directories) are placed
under the directory named by the METAREP_OUT environment variable when it
is set; absolute paths are used as given.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import EnumerationCapError, InvalidInputError, PreconditionError
from .ingest import load_study_set
from .meta import Measure, MetaModel, MetaResult, StudySet, meta_analysis
from .multiplicity import AdjustMethod, EndpointFamily, declare
from .replicability import (
    DEFAULT_MAX_EVALUATIONS,
    LeaveOneOutReport,
    ReplicabilityBound,
    RValueResult,
    SensitivityInterval,
    leave_one_out_report,
    r_value,
    replicability_bound,
    sensitivity_interval,
)
from .report import (
    format_rvalue,
    render_forest_plot,
    report_sentence,
    serialize_results,
)
from .simulation import (
    DEFAULT_SEED,
    SimConfig,
    desk_config,
    emit_grid,
    run_simulation,
)

OUT_ENV_VAR = "METAREP_OUT"

_MODEL_FLAGS = {
    "fixed": MetaModel.FIXED_Z,
    "random-z": MetaModel.RANDOM_Z,
    "random-t": MetaModel.RANDOM_T,
}


def _resolve_out(path_text: str) -> Path:
    path = Path(path_text)
    base = os.environ.get(OUT_ENV_VAR)
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _display(value: float, measure: Measure) -> float:
    return math.exp(value) if measure is Measure.RATIO else value


def _fmt_effect(value: float, measure: Measure) -> str:
    return f"{_display(value, measure):.4g}"


def _fmt_ci(low: float, high: float, measure: Measure) -> str:
    return f"{_display(low, measure):.4g} to {_display(high, measure):.4g}"


def _print_meta(studies: StudySet, model: MetaModel, result: MetaResult) -> None:
    level = 100.0 * (1.0 - result.alpha)
    null_shown = "1" if studies.measure is Measure.RATIO else "0"
    print(f"Model: {model.description} [{model.value}]")
    print(f"Studies: {studies.n} (measure: {studies.measure.value}, null value {null_shown})")
    print(
        f"Summary effect: {_fmt_effect(result.summary, studies.measure)} "
        f"({level:g}% CI {_fmt_ci(result.ci_low, result.ci_high, studies.measure)})"
    )
    print(
        f"Two-sided p: {result.p_two:.4g}   tau2: {result.tau2:.4g}   "
        f"df: {'inf' if math.isinf(result.df) else f'{result.df:g}'}"
    )


def _print_loo(report: LeaveOneOutReport, measure: Measure) -> None:
    print()
    print("Leave-one-out:")
    label_w = max(len(r.excluded_label) for r in report.rows)
    label_w = max(label_w, len("excluded"))
    print(f"  {'excluded'.ljust(label_w)}  {'summary':>9}  {'interval':>21}  {'p':>9}")
    for row in report.rows:
        ci = _fmt_ci(row.ci_low, row.ci_high, measure)
        print(
            f"  {row.excluded_label.ljust(label_w)}  "
            f"{_fmt_effect(row.summary, measure):>9}  {ci:>21}  {row.p_two:>9.4g}"
        )


def _print_rvalue(rv: RValueResult, interval: SensitivityInterval, measure: Measure) -> None:
    print()
    print(f"r-value (u={rv.u}): {format_rvalue(rv.r_two)}")
    dropped = sorted(set(rv.dropped_left) | set(rv.dropped_right))
    if dropped:
        print(f"Worst-case discounted studies: {', '.join(dropped)}")
    level = 100.0 * (1.0 - interval.alpha)
    print(
        f"Sensitivity interval (u={interval.u}, {level:g}%): "
        f"{_fmt_ci(interval.low, interval.high, measure)}"
    )


def _print_bound(bound: ReplicabilityBound, measure: Measure) -> None:
    print()
    side = "increase" if bound.direction == "right" else "decrease"
    noun = "study" if bound.bound == 1 else "studies"
    print(
        f"Replicability bound (alpha={bound.alpha:g}): at least {bound.bound} "
        f"{noun} with an effect (direction: {side})"
    )
    if not bound.trace:
        return
    excl_w = max([len(", ".join(r.excluded)) for r in bound.trace] + [len("excluded")])
    print(f"  {'u':>2}  {'r-value':>10}  {'excluded'.ljust(excl_w)}  {'effect bound':>12}")
    for row in bound.trace:
        shown = _display(row.effect_bound, measure)
        print(
            f"  {row.u:>2}  {row.r_value:>10.4g}  "
            f"{', '.join(row.excluded).ljust(excl_w)}  {shown:>12.4g}"
        )


def cmd_analyze(args: argparse.Namespace) -> int:
    studies = load_study_set(args.input)
    model = _MODEL_FLAGS[args.model]
    result = meta_analysis(studies, model, args.alpha)
    loo = leave_one_out_report(studies, model, args.alpha, args.max_evaluations)
    if args.u == 2:
        rv, interval = loo.rvalue, loo.interval
    else:
        rv = r_value(studies, args.u, model, args.max_evaluations)
        interval = sensitivity_interval(
            studies, args.u, model, args.alpha, max_evaluations=args.max_evaluations
        )
    sentence = report_sentence(loo.rvalue, args.alpha)
    bound: Optional[ReplicabilityBound] = None
    if args.bound:
        bound = replicability_bound(studies, model, args.alpha, args.max_evaluations)

    _print_meta(studies, model, result)
    _print_loo(loo, studies.measure)
    _print_rvalue(rv, interval, studies.measure)
    print()
    print(sentence)
    if bound is not None:
        _print_bound(bound, studies.measure)

    if args.plot:
        plot_path = _resolve_out(args.plot)
        plot_path.parent.mkdir(parents=True, exist_ok=True)
        plot_path.write_text(
            render_forest_plot(studies, result, rv, title=Path(args.input).stem),
            encoding="utf-8",
        )
        print()
        print(f"Forest plot written to {plot_path}")
    if args.json:
        payload = {
            "input": Path(args.input).name,
            "model": model,
            "alpha": args.alpha,
            "measure": studies.measure,
            "n": studies.n,
            "meta": result,
            "leave_one_out": loo,
            "rvalue": rv,
            "sensitivity_interval": interval,
            "sentence": sentence,
            "bound": bound,
        }
        json_path = _resolve_out(args.json)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        json_path.write_text(serialize_results(payload), encoding="utf-8")
        print(f"JSON written to {json_path}")
    return 0


def cmd_adjust(args: argparse.Namespace) -> int:
    texts = [t.strip() for t in args.rvalues.split(",") if t.strip()]
    if not texts:
        raise InvalidInputError("no r-values given")
    values = []
    for t in texts:
        try:
            values.append(float(t))
        except ValueError:
            raise InvalidInputError(f"not a number: {t!r}") from None
    family = EndpointFamily(
        labels=tuple(str(i) for i in range(1, len(values) + 1)),
        rvalues=tuple(values),
    )
    result = declare(family, AdjustMethod(args.method), args.alpha)
    print(f"Method: {result.method.value}   alpha: {result.alpha:g}")
    print(f"  {'endpoint':>8}  {'r-value':>10}  {'adjusted':>10}")
    for e in result.endpoints:
        print(
            f"  {e.label:>8}  {format_rvalue(e.rvalue):>10}  "
            f"{format_rvalue(e.adjusted):>10}"
        )
    if result.declared:
        print(f"Declared endpoints: {{{', '.join(result.declared)}}}")
    else:
        print("Declared endpoints: none")
    if args.json:
        json_path = _resolve_out(args.json)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        json_path.write_text(serialize_results(result), encoding="utf-8")
        print(f"JSON written to {json_path}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.grid == "desk":
        config = desk_config(seed=args.seed, iterations=args.iterations)
    else:
        config = SimConfig(seed=args.seed, iterations=args.iterations)
    grid = run_simulation(config)
    out_dir = _resolve_out(args.out)
    paths = emit_grid(grid, out_dir)
    for path in paths:
        print(f"Wrote {path}")
    if args.json:
        json_path = _resolve_out(args.json)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        json_path.write_text(serialize_results(grid), encoding="utf-8")
        print(f"JSON written to {json_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metarep",
        description="Replicability analysis of meta-analytic findings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser(
        "analyze", help="meta-analysis with r-value and sensitivity interval"
    )
    analyze.add_argument("--input", required=True, help="study table (CSV)")
    analyze.add_argument(
        "--model",
        choices=sorted(_MODEL_FLAGS),
        default="fixed",
        help="synthesis rule (default: fixed)",
    )
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument(
        "--u", type=int, default=2, help="replicability parameter (default: 2)"
    )
    analyze.add_argument(
        "--bound",
        action="store_true",
        help="also scan for the lower bound on studies with an effect",
    )
    analyze.add_argument("--plot", help="write an annotated forest plot (SVG)")
    analyze.add_argument("--json", help="write full results (JSON)")
    analyze.add_argument(
        "--max-evaluations",
        type=int,
        default=DEFAULT_MAX_EVALUATIONS,
        help="subset enumeration cap (default: %(default)s)",
    )
    analyze.set_defaults(func=cmd_analyze)

    adjust = sub.add_parser("adjust", help="multiplicity-adjust a family of r-values")
    adjust.add_argument(
        "--rvalues", required=True, help="comma-separated r-values, e.g. 0.01,0.2"
    )
    adjust.add_argument(
        "--method", choices=[m.value for m in AdjustMethod], default="bh"
    )
    adjust.add_argument("--alpha", type=float, default=0.05)
    adjust.add_argument("--json", help="write adjusted family (JSON)")
    adjust.set_defaults(func=cmd_adjust)

    simulate = sub.add_parser("simulate", help="type-I-error rejection-rate grid")
    simulate.add_argument("--grid", choices=["full", "desk"], default="desk")
    simulate.add_argument("--seed", type=int, default=DEFAULT_SEED)
    simulate.add_argument("--iterations", type=int, default=10_000)
    simulate.add_argument(
        "--out", default="simulation", help="output directory (default: simulation)"
    )
    simulate.add_argument("--json", help="also write the grid as JSON")
    simulate.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
