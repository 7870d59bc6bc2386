"""End-to-end checks for the three kinds of input and their JSON results.

JSON result document (``CheckResult.to_dict``)::

    {
      "schema": "flowmc.result/1",
      "verdict": "HOLDS" | "VIOLATED",
      "inputs": {"net": ..., "formula": ..., "approach": ..., ...},
      "stats": {"states": ..., "edges": ..., "reduced_places": ..., ...},
      "counterexample": null | {
        "prefix": [{"marking": [place, ...], "fired": transition | null}, ...],
        "loop":   [...same...],
        "flow_chains": [
          {"subformula": i, "formula": text, "born": position | null,
           "chain": [place, transition, place, transition, ...],
           "loop": index into "chain" where the repeated part starts}
        ]
      }
    }

Markings list places in the net's declaration order; a ``null`` transition
is a stutter step at a deadlock.  In ``chain`` a ``null`` transition means
the chain rests at that place forever.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .errors import InputError, UnsupportedError
from .formulas import Formula, flow_subformulas, has_flow, render, resolve_for
from .ltlmc import DEFAULT_MAX_STATES, model_check
from .net import Lasso, PetriNet, PetriNetWithTransits, replay
from .reduction import ReducedProblem, WitnessChain, map_counterexample, reduce
from .sdn import NetworkSpec, encode_network, gen_property, with_fairness

SCHEMA = "flowmc.result/1"
APPROACHES = ("parallel", "sequential")


@dataclass
class CheckResult:
    verdict: str
    counterexample: Lasso | None = None
    chains: list[WitnessChain] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    formulas: list[str] = field(default_factory=list)
    net: PetriNet | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == "HOLDS"

    @property
    def exit_code(self) -> int:
        return 0 if self.holds else 1

    def to_dict(self) -> dict:
        cex = None
        if self.counterexample is not None:
            order = {p: i for i, p in enumerate(self.net.places)} if self.net is not None else {}

            def step(s):
                return {"marking": sorted(s.marking, key=lambda p: (order.get(p, 0), p)), "fired": s.fired}

            cex = {
                "prefix": [step(s) for s in self.counterexample.prefix],
                "loop": [step(s) for s in self.counterexample.loop],
                "flow_chains": [
                    {
                        "subformula": c.index,
                        "formula": self.formulas[c.index - 1] if c.index <= len(self.formulas) else None,
                        "born": c.born,
                        "chain": c.alternating(),
                        "loop": 2 * c.loop_start,
                    }
                    for c in self.chains
                ],
            }
        return {
            "schema": SCHEMA,
            "verdict": self.verdict,
            "inputs": self.inputs,
            "stats": self.stats,
            "counterexample": cex,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for k, v in self.inputs.items():
            lines.append(f"{k}: {v}")
        lines.append("stats: " + ", ".join(f"{k}={v}" for k, v in self.stats.items()))
        if self.counterexample is not None:
            lines.append("counterexample:")

            def show(s):
                return "{" + ", ".join(sorted(s.marking)) + "} " + (s.fired or "(stutter)")

            for s in self.counterexample.prefix:
                lines.append("    " + show(s))
            lines.append("  loop:")
            for s in self.counterexample.loop:
                lines.append("    " + show(s))
            for c in self.chains:
                if c.born is None:
                    lines.append(f"  flow {c.index}: no chain tracked")
                    continue
                parts = []
                for k, (p, t) in enumerate(c.letters):
                    if k == c.loop_start:
                        parts.append("(")
                    parts.append(p if t is None else f"{p} -{t}->")
                lines.append(f"  flow {c.index} (born at {c.born}): " + " ".join(parts) + " )^w")
        return "\n".join(lines)


def _check_chain(pnwt: PetriNetWithTransits, chain: WitnessChain) -> None:
    if chain.born is None:
        return
    letters = chain.letters
    for k, (p, t) in enumerate(letters):
        if t is None:
            continue
        nxt = letters[k + 1][0] if k + 1 < len(letters) else letters[chain.loop_start][0]
        if (p, nxt) not in pnwt.transits[t]:
            raise AssertionError(f"witness chain {chain.index}: {t} has no transit {p} -> {nxt}")


def _validated(lasso: Lasso, chains, pnwt: PetriNetWithTransits) -> None:
    # every counterexample we report must replay on the original net
    replay(pnwt.net, lasso)
    for c in chains:
        _check_chain(pnwt, c)


def check_pnwt(
    pnwt: PetriNetWithTransits,
    phi: Formula,
    max_states: int = DEFAULT_MAX_STATES,
    approach: str = "parallel",
    inputs: dict | None = None,
) -> CheckResult:
    """Check a Flow-LTL formula on a net with transits via the parallel reduction."""
    if approach != "parallel":
        if approach == "sequential":
            raise UnsupportedError("the sequential approach is not supported; use --approach parallel")
        raise InputError(f"unknown approach {approach!r}")
    t0 = time.perf_counter()
    phi = resolve_for(phi, pnwt.net)
    reduced: ReducedProblem = reduce(pnwt, phi)
    t1 = time.perf_counter()
    verdict = model_check(reduced.net, reduced.formula, max_states)
    stats = {
        "flow_subformulas": reduced.n,
        "reduced_places": len(reduced.net.places),
        "reduced_transitions": len(reduced.net.transitions),
        "time_reduction": round(t1 - t0, 6),
        **verdict.stats,
    }
    result = CheckResult(
        verdict.name,
        stats=stats,
        inputs={"formula": render(phi), "approach": approach, **(inputs or {})},
        formulas=[render(f) for f in flow_subformulas(phi)],
        net=pnwt.net,
    )
    if not verdict.holds:
        lasso, chains = map_counterexample(verdict.counterexample, reduced)
        _validated(lasso, chains, pnwt)
        result.counterexample = lasso
        result.chains = chains
    result.stats["time_total"] = round(time.perf_counter() - t0, 6)
    return result


def check_ltl(
    net: PetriNet,
    phi: Formula,
    max_states: int = DEFAULT_MAX_STATES,
    inputs: dict | None = None,
) -> CheckResult:
    """Check an LTL formula on a safe net (possibly with inhibitor arcs)."""
    if has_flow(phi):
        raise InputError("LTL checking of plain nets does not accept the A operator")
    t0 = time.perf_counter()
    phi = resolve_for(phi, net)
    verdict = model_check(net, phi, max_states)
    result = CheckResult(verdict.name, stats=dict(verdict.stats), inputs={"formula": render(phi), **(inputs or {})}, net=net)
    if not verdict.holds:
        replay(net, verdict.counterexample)
        result.counterexample = verdict.counterexample
    result.stats["time_total"] = round(time.perf_counter() - t0, 6)
    return result


def sdn_formula(spec: NetworkSpec, pnwt: PetriNetWithTransits, kind: str | None, formula: Formula | None, assume_fairness: bool) -> Formula:
    if (kind is None) == (formula is None):
        raise InputError("give exactly one of a property kind and a formula")
    req = gen_property(spec, kind, pnwt) if kind is not None else resolve_for(formula, pnwt.net)
    return with_fairness(pnwt, req) if assume_fairness else req


def check_sdn(
    spec: NetworkSpec,
    kind: str | None = None,
    formula: Formula | None = None,
    assume_fairness: bool = False,
    max_states: int = DEFAULT_MAX_STATES,
    approach: str = "parallel",
    inputs: dict | None = None,
) -> CheckResult:
    """Encode a network update and check a generated property or a formula on it."""
    pnwt = encode_network(spec)
    phi = sdn_formula(spec, pnwt, kind, formula, assume_fairness)
    extra = {"assume_fairness": assume_fairness}
    if kind is not None:
        extra["property"] = kind
    return check_pnwt(pnwt, phi, max_states, approach, {**extra, **(inputs or {})})


__all__ = ["CheckResult", "SCHEMA", "APPROACHES", "check_pnwt", "check_ltl", "check_sdn", "sdn_formula"]
