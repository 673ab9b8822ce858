"""Command-line entry point.

Subcommands: run {priolq|rplq|pslq|multiunit}, check, decompose, manipulate,
verify-wsp, impossibility, gen. Students and priority orders are 1-based on
the command line; exit codes are 0 (success, axioms hold), 1 (an axiom
violation or strict manipulation was found), 2 (input error).
"""

from __future__ import annotations

import argparse
import json
import sys

from .axioms import (
    is_envy_free,
    is_ml_fair,
    is_mqc_efficient,
    is_ordinally_efficient,
    is_weakly_envy_free,
)
from .decompose import decompose
from .eating import run_pslq, run_pslq_traced
from .marketio import (
    GeneratorConfig,
    PREFERENCE_STYLES,
    QUOTA_STYLES,
    RENDER_FORMATS,
    assignment_to_json,
    generate_market,
    lottery_to_json,
    market_to_json,
    parse_assignment,
    parse_market,
    render,
    serialize_market,
    trace_to_json,
)
from .model import (
    MarketError,
    as_rational,
    feasibility_violations,
    format_rational,
    is_integral,
)
from .priority import (
    clone_market,
    run_priolq,
    run_rplq_exact,
    run_rplq_sampled,
)
from .strategy import (
    STRICT_GAIN,
    impossibility_scenario,
    search_manipulation,
    verify_weak_sp,
)

CHECKABLE_AXIOMS = ("feasible", "ef", "wef", "oe", "ml", "pareto")
DEFAULT_AXIOMS = "feasible,ef,wef,oe"


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _emit(text: str, args) -> None:
    output = getattr(args, "output", None)
    if output and output != "-":
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def _market(args):
    if not getattr(args, "input", None):
        raise MarketError("--input is required for this command")
    return parse_market(_read(args.input))


def _parse_order(text: str, n: int, what: str) -> tuple:
    try:
        values = [int(chunk) for chunk in text.split(",")]
    except ValueError:
        raise MarketError(f"{what} must be comma-separated integers") from None
    order = tuple(v - 1 for v in values)
    if sorted(order) != list(range(n)):
        raise MarketError(f"{what} must be a permutation of 1..{n}")
    return order


def _row_json(row) -> list:
    return [format_rational(value) for value in row]


def _improvement_json(witness, market) -> dict:
    return {
        "kind": witness.kind,
        "projects": [market.projects[p] for p in witness.projects],
        "students": [i + 1 for i in witness.students],
        "delta": format_rational(witness.delta),
        "improved": assignment_to_json(witness.improved)["assignment"],
    }


def _manipulation_json(report, market) -> dict:
    return {
        "student": report.student + 1,
        "relation": report.relation,
        "truthful_row": _row_json(report.truthful_row),
        "misreport": None
        if report.misreport is None
        else [market.projects[p] for p in report.misreport],
        "misreport_row": None
        if report.misreport_row is None
        else _row_json(report.misreport_row),
    }


def cmd_run(args) -> int:
    market = _market(args)
    trace = None
    meta = {"mechanism": args.mechanism}
    if args.mechanism == "priolq":
        if args.order:
            order = _parse_order(args.order, market.n, "--order")
        else:
            order = tuple(range(market.n))
        matrix = run_priolq(market, order)
        meta["order"] = [i + 1 for i in order]
    elif args.mechanism == "rplq":
        if args.samples:
            result = run_rplq_sampled(market, args.samples, args.seed or 0)
            matrix = result.assignment
            meta |= {"mode": result.mode, "samples": result.samples, "seed": result.seed}
        else:
            result = run_rplq_exact(market)
            matrix = result.assignment
            meta["mode"] = result.mode
    elif args.mechanism == "pslq":
        if args.trace:
            matrix, trace = run_pslq_traced(market)
        else:
            matrix = run_pslq(market)
    else:  # multiunit
        if args.q < 1:
            raise MarketError("--q must be at least 1")
        cloned, aggregate = clone_market(market, args.q)
        if args.inner_mechanism == "pslq":
            matrix = aggregate(run_pslq(cloned))
        elif args.samples:
            matrix = aggregate(
                run_rplq_sampled(cloned, args.samples, args.seed or 0).assignment
            )
        else:
            matrix = aggregate(run_rplq_exact(cloned).assignment)
        meta |= {"q": args.q, "inner": args.inner_mechanism}

    if args.format == "json":
        doc = meta | assignment_to_json(matrix)
        if trace is not None:
            doc["trace"] = trace_to_json(trace, market)
        _emit(json.dumps(doc, indent=2), args)
        return 0
    text = render(matrix, market, args.format)
    if trace is not None and args.format == "table":
        lines = [text, ""]
        critical = (
            "none"
            if trace.critical_time is None
            else format_rational(trace.critical_time)
        )
        lines.append(f"critical time: {critical}")
        for phase in trace.phases:
            active = ",".join(market.projects[p] for p in phase.active)
            closed = ",".join(market.projects[p] for p in phase.closed)
            eating = " ".join(
                f"{i + 1}:{market.projects[p]}" for i, p in enumerate(phase.pattern)
            )
            lines.append(
                f"[{format_rational(phase.start)}, {format_rational(phase.end)}]"
                f" {phase.event} active={{{active}}} closed={{{closed}}}"
                f" eating {eating}"
            )
        text = "\n".join(lines)
    _emit(text, args)
    return 0


def cmd_check(args) -> int:
    market = _market(args)
    matrix = parse_assignment(_read(args.assignment), market)
    requested = [name.strip() for name in args.axioms.split(",") if name.strip()]
    for name in requested:
        if name not in CHECKABLE_AXIOMS:
            raise MarketError(
                f"unknown axiom {name!r}; choose from {', '.join(CHECKABLE_AXIOMS)}"
            )
    if not requested:
        raise MarketError("no axioms requested")
    violations = feasibility_violations(matrix, market)
    needs_integral = [name for name in requested if name in ("ml", "pareto")]
    if needs_integral and not is_integral(matrix):
        raise MarketError(
            f"axiom {needs_integral[0]} needs a deterministic (0/1) assignment"
        )
    if args.master_list:
        master = list(_parse_order(args.master_list, market.n, "--master-list"))
    else:
        master = list(range(market.n))

    report = {"axioms": {}}
    for name in requested:
        entry = {}
        if name == "feasible":
            entry["holds"] = not violations
            if violations:
                entry["witness"] = violations
        elif violations:
            # dependent axioms are undefined off the feasible polytope
            entry["holds"] = False
            entry["skipped"] = "assignment is infeasible"
        elif name == "ef":
            holds, pair = is_envy_free(matrix, market.prefs)
            entry["holds"] = holds
            if not holds:
                entry["witness"] = {"student": pair[0] + 1, "envies": pair[1] + 1}
        elif name == "wef":
            holds, pair = is_weakly_envy_free(matrix, market.prefs)
            entry["holds"] = holds
            if not holds:
                entry["witness"] = {"student": pair[0] + 1, "envies": pair[1] + 1}
        elif name == "oe":
            holds, witness = is_ordinally_efficient(matrix, market)
            entry["holds"] = holds
            if not holds:
                entry["witness"] = _improvement_json(witness, market)
        elif name == "ml":
            holds, pair = is_ml_fair(matrix, market.prefs, master)
            entry["holds"] = holds
            if not holds:
                entry["witness"] = {
                    "student": pair[0] + 1,
                    "prefers_assignment_of": pair[1] + 1,
                }
        else:  # pareto
            holds, dominating = is_mqc_efficient(matrix, market)
            entry["holds"] = holds
            if not holds:
                entry["witness"] = {
                    "dominating": assignment_to_json(dominating)["assignment"]
                }
        report["axioms"][name] = entry
    report["all_hold"] = all(entry["holds"] for entry in report["axioms"].values())
    _emit(json.dumps(report, indent=2), args)
    return 0 if report["all_hold"] else 1


def cmd_decompose(args) -> int:
    market = _market(args)
    matrix = parse_assignment(_read(args.assignment), market)
    lottery = decompose(matrix, market)
    doc = lottery_to_json(lottery)
    code = 0
    if args.verify:
        reconstructed = lottery.expectation()
        differences = [
            {
                "student": i + 1,
                "project": market.projects[p],
                "expected": format_rational(matrix[i][p]),
                "actual": format_rational(reconstructed[i][p]),
            }
            for i in range(market.n)
            for p in range(market.k)
            if reconstructed[i][p] != matrix[i][p]
        ]
        doc["verified"] = not differences
        if differences:
            doc["differences"] = differences
            code = 1
    _emit(json.dumps(doc, indent=2), args)
    return code


def cmd_manipulate(args) -> int:
    market = _market(args)
    if not 1 <= args.student <= market.n:
        raise MarketError(f"--student must be in 1..{market.n}")
    report = search_manipulation(args.mechanism, market, args.student - 1)
    _emit(json.dumps(_manipulation_json(report, market), indent=2), args)
    return 1 if report.relation == STRICT_GAIN else 0


def cmd_verify_wsp(args) -> int:
    market = _market(args)
    holds, witness = verify_weak_sp(args.mechanism, market, strong=args.strong)
    doc = {
        "mechanism": args.mechanism,
        "strong": args.strong,
        "holds": holds,
        "counterexample": None if holds else _manipulation_json(witness, market),
    }
    _emit(json.dumps(doc, indent=2), args)
    return 0 if holds else 1


def cmd_impossibility(args) -> int:
    report = impossibility_scenario()
    if args.format == "json":
        doc = {
            "market": market_to_json(report.market),
            "family_parameters": [format_rational(t) for t in report.family_parameters],
            "first_misreport": [
                report.market.projects[p] for p in report.first_misreport
            ],
            "unique_after_first": assignment_to_json(report.unique_after_first)[
                "assignment"
            ],
            "second_misreport": [
                report.market.projects[p] for p in report.second_misreport
            ],
            "unique_after_second": assignment_to_json(report.unique_after_second)[
                "assignment"
            ],
            "parameter_forced_by_first": format_rational(
                report.parameter_forced_by_first
            ),
            "parameter_forced_by_second": format_rational(
                report.parameter_forced_by_second
            ),
            "contradiction": report.contradiction,
            "certificate": report.lines(),
        }
        _emit(json.dumps(doc, indent=2), args)
    else:
        _emit("\n".join(report.lines()), args)
    return 0


def cmd_gen(args) -> int:
    weights = None
    if args.weights:
        weights = tuple(as_rational(chunk) for chunk in args.weights.split(","))
    cfg = GeneratorConfig(
        n=args.n,
        k=args.k,
        seed=args.seed or 0,
        quota_style=args.quota_style,
        denominator=args.denominator,
        pref_style=args.pref_style,
        weights=weights,
    )
    _emit(serialize_market(generate_market(cfg)), args)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="market JSON file, or '-' for stdin")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument(
        "--format", choices=RENDER_FORMATS, default="table", help="output format"
    )
    common.add_argument("--seed", type=int, help="seed for randomized commands")

    parser = argparse.ArgumentParser(
        prog="quotassign",
        description="random assignment mechanisms under lower and upper quotas",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a mechanism")
    run.add_argument("mechanism", choices=("priolq", "rplq", "pslq", "multiunit"))
    run.add_argument("--order", help="priolq: 1-based priority order, e.g. 3,4,1,2")
    sampling = run.add_mutually_exclusive_group()
    sampling.add_argument(
        "--exact", action="store_true", help="rplq: exact enumeration (default)"
    )
    sampling.add_argument("--samples", type=int, help="rplq: Monte Carlo sample count")
    run.add_argument("--trace", action="store_true", help="pslq: emit the eating trace")
    run.add_argument("--q", type=int, default=1, help="multiunit: units per student")
    run.add_argument(
        "--mechanism",
        dest="inner_mechanism",
        choices=("pslq", "rplq"),
        default="pslq",
        help="multiunit: underlying mechanism",
    )
    run.set_defaults(handler=cmd_run)

    check = sub.add_parser("check", parents=[common], help="verify axioms")
    check.add_argument("--assignment", required=True, help="assignment JSON file")
    check.add_argument(
        "--axioms",
        default=DEFAULT_AXIOMS,
        help=f"comma-separated subset of {','.join(CHECKABLE_AXIOMS)}"
        f" (default {DEFAULT_AXIOMS})",
    )
    check.add_argument(
        "--master-list",
        help="ml: 1-based priority list, highest first (default 1,2,...)",
    )
    check.set_defaults(handler=cmd_check)

    dec = sub.add_parser(
        "decompose", parents=[common], help="decompose into a lottery"
    )
    dec.add_argument("--assignment", required=True, help="assignment JSON file")
    dec.add_argument(
        "--verify", action="store_true", help="re-multiply the lottery and diff"
    )
    dec.set_defaults(handler=cmd_decompose)

    man = sub.add_parser(
        "manipulate", parents=[common], help="search misreports for one student"
    )
    man.add_argument(
        "--mechanism", choices=("pslq", "rplq-exact"), default="pslq"
    )
    man.add_argument("--student", type=int, required=True, help="1-based student")
    man.set_defaults(handler=cmd_manipulate)

    wsp = sub.add_parser(
        "verify-wsp", parents=[common], help="verify weak strategy-proofness"
    )
    wsp.add_argument(
        "--mechanism", choices=("pslq", "rplq-exact"), default="pslq"
    )
    wsp.add_argument(
        "--strong",
        action="store_true",
        help="demand the truthful row weakly dominate every misreport row",
    )
    wsp.set_defaults(handler=cmd_verify_wsp)

    imp = sub.add_parser(
        "impossibility",
        parents=[common],
        help="print the built-in impossibility certificate",
    )
    imp.set_defaults(handler=cmd_impossibility)

    gen = sub.add_parser(
        "gen", parents=[common], help="generate a random market"
    )
    gen.add_argument("--n", type=int, required=True, help="number of students")
    gen.add_argument("--k", type=int, required=True, help="number of projects")
    gen.add_argument("--quota-style", choices=QUOTA_STYLES, default="none")
    gen.add_argument(
        "--denominator", type=int, default=4, help="fractional quotas: denominator cap"
    )
    gen.add_argument("--pref-style", choices=PREFERENCE_STYLES, default="uniform")
    gen.add_argument(
        "--weights", help="correlated preferences: comma-separated project weights"
    )
    gen.set_defaults(handler=cmd_gen)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (MarketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
