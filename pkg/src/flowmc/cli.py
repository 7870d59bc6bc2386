"""Command line interface.

Exit status: 0 the property holds, 1 it is violated, 2 usage or input
error, 3 a resource budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import netio, sdn
from .dot import export_dot
from .errors import BudgetExceeded, FlowMCError, InputError, UnsupportedError
from .formulas import parse_flow_ltl, parse_ltl, render
from .ltlmc import DEFAULT_MAX_STATES
from .oracle import brute_force_check
from .pipeline import APPROACHES, SCHEMA, CheckResult, check_ltl, check_pnwt, check_sdn
from .reduction import reduce

EXIT_HOLDS, EXIT_VIOLATED, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formula_text(args) -> str | None:
    if args.formula_file is not None:
        return _read(args.formula_file).strip()
    return args.formula


def _emit(args, payload: dict, text: str) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _emit_result(args, result: CheckResult) -> int:
    _emit(args, result.to_dict(), result.to_text())
    return result.exit_code


def cmd_check_pnwt(args) -> int:
    pnwt = netio.load_pnwt(_read(args.net))
    if args.dot:
        export_dot(pnwt, args.dot)
    phi = parse_flow_ltl(_formula_text(args))
    result = check_pnwt(pnwt, phi, args.max_states, args.approach, {"net": args.net})
    return _emit_result(args, result)


def cmd_check_ltl(args) -> int:
    net = netio.load_net(_read(args.net))
    if args.dot:
        export_dot(net, args.dot)
    phi = parse_ltl(_formula_text(args))
    return _emit_result(args, check_ltl(net, phi, args.max_states, {"net": args.net}))


def cmd_check_sdn(args) -> int:
    spec = sdn.parse_network(_read(args.spec))
    text = _formula_text(args)
    if (args.property is None) == (text is None):
        raise InputError("give exactly one of --property and --formula")
    if args.dot:
        export_dot(sdn.encode_network(spec), args.dot)
    formula = parse_flow_ltl(text) if text is not None else None
    kinds = sdn.PROPERTIES if args.property == "all" else [args.property]
    results = [
        check_sdn(spec, kind, formula, args.assume_fairness, args.max_states, args.approach, {"spec": args.spec})
        for kind in kinds
    ]
    if len(results) == 1:
        return _emit_result(args, results[0])
    _emit(
        args,
        {"schema": SCHEMA, "results": [r.to_dict() for r in results]},
        "\n\n".join(r.to_text() for r in results),
    )
    return max(r.exit_code for r in results)


def cmd_reduce(args) -> int:
    if args.approach != "parallel":
        raise UnsupportedError("the sequential approach is not supported; use --approach parallel")
    pnwt = netio.load_pnwt(_read(args.net))
    reduced = reduce(pnwt, parse_flow_ltl(_formula_text(args)))
    if args.dot:
        export_dot(reduced.net, args.dot)
    net_text = netio.dump_net(reduced.net)
    formula = render(reduced.formula)
    _emit(
        args,
        {"schema": SCHEMA, "net": net_text, "formula": formula, "flow_subformulas": reduced.n},
        net_text + f"# formula: {formula}",
    )
    return EXIT_HOLDS


def cmd_oracle_check(args) -> int:
    pnwt = netio.load_pnwt(_read(args.net))
    phi = parse_flow_ltl(_formula_text(args))
    verdict = brute_force_check(pnwt, phi, args.bound, args.max_states)
    payload = {"schema": SCHEMA, "verdict": verdict.name, "bound": args.bound, "stats": verdict.stats, "lasso": None}
    lines = [f"verdict: {verdict.name} (bound {args.bound})"]
    if verdict.lasso is not None:

        def step(s):
            return {"marking": sorted(s.marking), "fired": s.fired}

        payload["lasso"] = {
            "prefix": [step(s) for s in verdict.lasso.prefix],
            "loop": [step(s) for s in verdict.lasso.loop],
        }
        lines += ["prefix: " + " ".join(s.fired or "(stutter)" for s in verdict.lasso.prefix)]
        lines += ["loop: " + " ".join(s.fired or "(stutter)" for s in verdict.lasso.loop)]
    _emit(args, payload, "\n".join(lines))
    return EXIT_VIOLATED if verdict.violated else EXIT_HOLDS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--approach", choices=APPROACHES, default="parallel")
    common.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES, metavar="N")
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--dot", metavar="PATH", help="write the (input, encoded or reduced) net as Graphviz DOT")

    def formula_args(p, required=True):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--formula", metavar="TEXT")
        g.add_argument("--formula-file", metavar="PATH")

    parser = argparse.ArgumentParser(prog="flowmc", description="Flow-LTL model checking of Petri nets with transits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-pnwt", parents=[common], help="check a net with transits against Flow-LTL")
    p.add_argument("net")
    formula_args(p)
    p.set_defaults(func=cmd_check_pnwt)

    p = sub.add_parser("check-sdn", parents=[common], help="check a network update")
    p.add_argument("spec")
    p.add_argument("--property", choices=sdn.PROPERTIES + ("all",))
    formula_args(p, required=False)
    p.add_argument("--assume-fairness", action="store_true", help="assume weak fairness of every transition")
    p.set_defaults(func=cmd_check_sdn)

    p = sub.add_parser("check-ltl", parents=[common], help="check a safe net against LTL")
    p.add_argument("net")
    formula_args(p)
    p.set_defaults(func=cmd_check_ltl)

    p = sub.add_parser("reduce", parents=[common], help="print the reduced net and formula")
    p.add_argument("net")
    formula_args(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("oracle-check", parents=[common], help="bounded brute-force check by lasso enumeration")
    p.add_argument("net")
    formula_args(p)
    p.add_argument("--bound", type=int, default=8)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"flowmc: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (FlowMCError, OSError) as exc:
        print(f"flowmc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
