"""Parallel reduction of Flow-LTL model checking on nets with transits to
LTL model checking on safe nets with inhibitor arcs.

For ``n`` flow subformulas the reduced net runs ``n`` copies of the place
set ("subnets") next to the original net.  Each subnet holds at most one
token that guesses and follows one flow chain.  Every reduced transition
fires an original transition and, at the same time, tells each subnet
which transit (or none) its chain takes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InputError, NetStructureError
from .formulas import (
    PLACE,
    TRANSITION,
    Always,
    And,
    Atom,
    FlowSub,
    Formula,
    Next,
    Not,
    Or,
    Until,
    WeakUntil,
    disj,
    flow_subformulas,
    replace_flow_subformulas,
    resolve_for,
    transform,
)
from .net import START, Lasso, PetriNet, PetriNetWithTransits, Step

#: Choice entry of a subnet whose chain is not moved by the transition.
NO_TRANSIT = None


def subnet_place(p: str, i: int) -> str:
    return f"{p}__sub{i}"


def init_place(i: int) -> str:
    return f"init__sub{i}"


def transit_choices(pnwt: PetriNetWithTransits, t: str, n: int) -> list[tuple]:
    """Choice tuples for ``t`` in canonical order.

    Transits are sorted by (source, target) text and NO_TRANSIT comes last;
    tuples are ordered lexicographically over that per-entry order.
    """
    options = sorted(pnwt.transits[t]) + [NO_TRANSIT]
    return list(itertools.product(options, repeat=n))


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """A reduced net together with the bookkeeping needed to map back."""

    original: PetriNetWithTransits
    net: PetriNet
    n: int
    subnet_place: dict = field(repr=False)
    init_place: dict = field(repr=False)
    choice: dict = field(repr=False)
    formula: Formula | None = None

    def preimage(self, t: str) -> list[str]:
        return [u for u in self.net.transitions if self.net.labels[u] == t]

    def tracking(self, i: int) -> list[str]:
        """Reduced transitions with an arc touching a place of subnet ``i``."""
        sub = {self.subnet_place[(i, p)] for p in self.original.net.places}
        net = self.net
        return [u for u in net.transitions if (net.pre[u] | net.post[u]) & sub]

    def with_formula(self, formula: Formula) -> "ReducedProblem":
        return ReducedProblem(self.original, self.net, self.n, self.subnet_place, self.init_place, self.choice, formula)


def reduce_net(pnwt: PetriNetWithTransits, n: int) -> ReducedProblem:
    """The net part of the reduction for ``n`` flow subformulas."""
    if n < 0:
        raise InputError("the number of flow subformulas must be non-negative")
    net = pnwt.net
    sub = {(i, p): subnet_place(p, i) for i in range(1, n + 1) for p in net.places}
    init = {i: init_place(i) for i in range(1, n + 1)}
    places = list(net.places) + [init[i] for i in range(1, n + 1)]
    for i in range(1, n + 1):
        places += [sub[(i, p)] for p in net.places]
    clash = set(places[len(net.places):]) & (set(net.places) | set(net.transitions))
    if clash:
        raise NetStructureError("reduction names clash with existing nodes: " + ", ".join(sorted(clash)))

    transitions, arcs, inhibitors, labels, choice = [], [], [], {}, {}
    for t in net.transitions:
        for k, combo in enumerate(transit_choices(pnwt, t, n)):
            u = f"{t}__c{k}"
            transitions.append(u)
            labels[u] = t
            choice[u] = (t, combo)
            arcs += [(p, u) for p in sorted(net.pre[t])]
            arcs += [(u, p) for p in sorted(net.post[t])]
            for i, entry in enumerate(combo, start=1):
                if entry is NO_TRANSIT:
                    inhibitors += [(sub[(i, p)], u) for p in sorted(net.pre[t])]
                    continue
                src, tgt = entry
                arcs.append((init[i] if src == START else sub[(i, src)], u))
                arcs.append((u, sub[(i, tgt)]))
    all_nodes = set(places) | set(transitions)
    if len(all_nodes) != len(places) + len(transitions):
        raise NetStructureError("reduction names clash with existing nodes")
    reduced = PetriNet.build(
        places,
        transitions,
        arcs,
        inhibitors,
        initial=set(net.initial) | set(init.values()),
        labels=labels,
        name=f"{net.name}__reduced{n}",
    )
    return ReducedProblem(pnwt, reduced, n, sub, init, choice)


def reduce_formula(pnwt: PetriNetWithTransits, phi: Formula, reduced: ReducedProblem) -> Formula:
    """Rewrite a Flow-LTL formula into an LTL formula over the reduced net."""
    phi = resolve_for(phi, pnwt.net)
    n = len(flow_subformulas(phi))
    if n != reduced.n:
        raise InputError(f"formula has {n} flow subformulas but the net was reduced for {reduced.n}")
    pre_image = {t: disj(Atom(u, TRANSITION) for u in reduced.preimage(t)) for t in pnwt.net.transitions}

    def flow_sub(i, arg):
        tracking = set(reduced.tracking(i))
        T = [u for u in reduced.net.transitions if u in tracking]
        O = [u for u in reduced.net.transitions if u not in tracking]
        any_t = disj(Atom(u, TRANSITION) for u in T)
        any_o = disj(Atom(u, TRANSITION) for u in O)
        moves = {
            t: disj(Atom(u, TRANSITION) for u in reduced.preimage(t) if u in tracking) for t in pnwt.net.transitions
        }
        idle_forever = Always(Not(any_t))

        def flow_part(node, kids):
            if isinstance(node, Atom):
                if node.kind == PLACE:
                    return Atom(reduced.subnet_place[(i, node.name)], PLACE)
                return Until(any_o, moves[node.name])
            if isinstance(node, Next):
                (inner,) = kids
                return Or((Until(any_o, And((any_t, Next(inner)))), And((idle_forever, inner))))
            return None

        body = transform(arg, flow_part)
        started = Atom(reduced.init_place[i], PLACE)
        return WeakUntil(started, And((Not(started), body)))

    def run_part(node, kids):
        if isinstance(node, FlowSub):
            return node
        if isinstance(node, Atom) and node.kind == TRANSITION:
            return pre_image[node.name]
        return None

    args = flow_subformulas(phi)
    run = transform(phi, run_part)
    return replace_flow_subformulas(run, lambda i, _: flow_sub(i, args[i - 1]))


def reduce(pnwt: PetriNetWithTransits, phi: Formula) -> ReducedProblem:
    """Reduced net and formula for a Flow-LTL model checking problem."""
    n = len(flow_subformulas(phi))
    reduced = reduce_net(pnwt, n)
    return reduced.with_formula(reduce_formula(pnwt, phi, reduced))


# -- mapping counterexamples back ---------------------------------------------


@dataclass(frozen=True)
class WitnessChain:
    """The chain followed by one subnet along a counterexample.

    ``letters`` are (place, moving transition) pairs in lasso form; a chain
    that stops moving ends with ``(place, None)`` as its loop.  ``born`` is
    the position of the creating step in the mapped lasso, or None when
    the subnet never started tracking.
    """

    index: int
    born: int | None
    letters: tuple[tuple[str, str | None], ...] = ()
    loop_start: int = 0

    def alternating(self) -> list:
        out: list = []
        for p, t in self.letters:
            out += [p, t]
        return out


def _subnet_place_at(marking, reduced: ReducedProblem, i: int, back: dict) -> str | None:
    for q in marking:
        hit = back.get(q)
        if hit is not None and hit[0] == i:
            return hit[1]
    return None


def map_counterexample(lasso: Lasso, reduced: ReducedProblem) -> tuple[Lasso, list[WitnessChain]]:
    """Project a lasso of the reduced net to the original net and read off
    the chain tracked by every subnet."""
    orig = reduced.original.net
    places = orig.place_set
    labels = reduced.net.labels

    def project(step):
        fired = None if step.fired is None else labels[step.fired]
        return Step(frozenset(step.marking & places), fired)

    mapped = Lasso(tuple(project(s) for s in lasso.prefix), tuple(project(s) for s in lasso.loop))
    back = {v: k for k, v in reduced.subnet_place.items()}
    steps = lasso.steps
    P = len(lasso.prefix)
    chains = []
    for i in range(1, reduced.n + 1):
        born = None
        for j, st in enumerate(steps):
            if st.fired is not None:
                entry = reduced.choice[st.fired][1][i - 1]
                if entry is not NO_TRANSIT and entry[0] == START:
                    born = j
                    break
        if born is None:
            chains.append(WitnessChain(i, None))
            continue
        letters = []
        loop_start = None
        for j in range(born + 1, len(steps)):
            if j == P and loop_start is None:
                loop_start = len(letters)
            st = steps[j]
            if st.fired is None:
                continue
            entry = reduced.choice[st.fired][1][i - 1]
            if entry is not NO_TRANSIT:
                letters.append((entry[0], labels[st.fired]))
        if loop_start is None:
            # born in the last prefix step or inside the loop
            loop_start = 0 if born >= P else len(letters)
        if loop_start == len(letters):
            # no move inside the loop: the chain rests where it is
            here = _subnet_place_at(steps[P].marking if P < len(steps) else steps[-1].marking, reduced, i, back)
            letters.append((here, None))
        chains.append(WitnessChain(i, born, tuple(letters), loop_start))
    return mapped, chains
