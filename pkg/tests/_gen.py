"""Seeded random instances shared by the test modules."""

from __future__ import annotations

import itertools
import random

from flowmc.formulas import (
    FALSE,
    PLACE,
    TRANSITION,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    FlowSub,
    Implies,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakUntil,
)
from flowmc.net import START, PetriNet, PetriNetWithTransits
from flowmc.sdn import parse_network


def random_pnwt(rng: random.Random, max_places=6, max_trans=5, max_transits=3, complete=False) -> PetriNetWithTransits:
    """A random net with transits; ``complete`` makes every preset place
    the source of some transit."""
    n_p = rng.randint(1, max_places)
    n_t = rng.randint(1, max_trans)
    places = [f"p{i}" for i in range(n_p)]
    trans = [f"t{i}" for i in range(n_t)]
    arcs, transits = [], []
    for t in trans:
        pre = rng.sample(places, rng.randint(0, min(2, n_p)))
        post = rng.sample(places, rng.randint(1 if (complete or pre) else 0, min(2, n_p)))
        arcs += [(p, t) for p in pre] + [(t, p) for p in post]
        candidates = [(s, q) for s in pre + [START] for q in post]
        chosen = []
        if complete:
            for s in pre:
                chosen.append((s, rng.choice(post)))
        room = max_transits - len(chosen)
        extra = [c for c in candidates if c not in chosen]
        chosen += rng.sample(extra, rng.randint(0, min(room, len(extra)))) if room > 0 else []
        transits += [(t, s, q) for s, q in chosen[:max_transits] if (s, q) in candidates]
    initial = rng.sample(places, rng.randint(0, n_p))
    net = PetriNet.build(places, trans, arcs, initial=initial, name="rand")
    return PetriNetWithTransits.build(net, transits)


def random_safe_pnwt(rng: random.Random, max_places=6, max_trans=5, max_transits=3, complete=False) -> PetriNetWithTransits:
    """A net made of one-token state machines, safe by construction.

    Places are split into components holding one token each; a transition
    moves the token of one component, or synchronises two components.
    Without ``complete`` a transition may also swallow a token.
    """
    n_p = rng.randint(2, max_places)
    places = [f"p{i}" for i in range(n_p)]
    n_c = rng.randint(1, min(3, n_p))
    cuts = sorted(rng.sample(range(1, n_p), n_c - 1))
    comps = [places[a:b] for a, b in zip([0] + cuts, cuts + [n_p])]
    initial = [rng.choice(c) for c in comps]
    # presets are drawn from places the component's token can already reach
    reach = [[p] for p in initial]
    trans = [f"t{i}" for i in range(rng.randint(1, max_trans))]
    arcs, transits = [], []
    for t in trans:
        touched = rng.sample(range(n_c), 2 if n_c > 1 and rng.random() < 0.3 else 1)
        pre = [rng.choice(reach[k]) for k in touched]
        post = [rng.choice(comps[k]) for k in touched]
        for k, q in zip(touched, post):
            if q not in reach[k]:
                reach[k].append(q)
        if not complete and rng.random() < 0.1:
            post = post[1:]
        arcs += [(p, t) for p in pre] + [(t, q) for q in post]
        chosen = []
        if complete:
            chosen = [(p, rng.choice(post)) for p in pre]
        extra = [(s, q) for s in pre + [START] for q in post if (s, q) not in chosen]
        room = max_transits - len(chosen)
        if room > 0 and extra:
            chosen += rng.sample(extra, rng.randint(0, min(room, len(extra))))
        transits += [(t, s, q) for s, q in chosen]
    net = PetriNet.build(places, trans, arcs, initial=initial, name="rand")
    return PetriNetWithTransits.build(net, transits)


# -- formulas -----------------------------------------------------------------

_UNARY = (Not, Next, Always, Eventually)
_BINARY = (Until, WeakUntil, Release)


def random_ltl(rng: random.Random, atoms, depth: int):
    """Random LTL tree of height at most ``depth`` over resolved atoms."""
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.06:
            return TRUE
        if r < 0.1:
            return FALSE
        return rng.choice(atoms)
    r = rng.random()
    if r < 0.35:
        return rng.choice(_UNARY)(random_ltl(rng, atoms, depth - 1))
    if r < 0.65:
        return rng.choice(_BINARY)(random_ltl(rng, atoms, depth - 1), random_ltl(rng, atoms, depth - 1))
    if r < 0.85:
        k = rng.randint(2, 3)
        return rng.choice((And, Or))(tuple(random_ltl(rng, atoms, depth - 1) for _ in range(k)))
    return Implies(random_ltl(rng, atoms, depth - 1), random_ltl(rng, atoms, depth - 1))


def net_atoms(net):
    return [Atom(p, PLACE) for p in net.places] + [Atom(t, TRANSITION) for t in net.transitions]


def random_flow_ltl(rng: random.Random, net, depth=4):
    """A formula with one A operator in a position where it is read universally."""
    atoms = net_atoms(net)
    flow = FlowSub(random_ltl(rng, atoms, depth))
    shape = rng.randrange(4)
    if shape == 0:
        return flow
    run = random_ltl(rng, atoms, depth - 1)
    return (Implies(run, flow), Or((run, flow)), And((run, flow)))[shape - 1]


def differential_instance(rng: random.Random, bound=8, max_lassos=100_000):
    """A transit-complete net small enough to enumerate every lasso up to
    ``bound``, and a formula with one universally read A."""
    from flowmc.errors import BudgetExceeded
    from flowmc.ltlmc import build_state_graph
    from flowmc.oracle import enumerate_lassos

    while True:
        pnwt = random_safe_pnwt(rng, complete=True)
        try:
            for _ in enumerate_lassos(build_state_graph(pnwt.net), bound, max_lassos):
                pass
        except BudgetExceeded:
            continue
        return pnwt, random_flow_ltl(rng, pnwt.net, depth=rng.randint(1, 4))


def random_formula_tree(rng: random.Random, depth=5):
    """Random Flow-LTL tree for printer round trips (unresolved atom kinds)."""
    names = ["a", "b", "cp1", "s1.fwd(s2)", "(s1,s2)", "x_y"]
    atoms = [Atom(n) for n in names]

    def run(d, allow_flow):
        if allow_flow and rng.random() < 0.2:
            return FlowSub(random_ltl(rng, atoms, d - 1))
        if d <= 0 or rng.random() < 0.2:
            return rng.choice(atoms + [TRUE, FALSE])
        r = rng.random()
        if r < 0.3:
            return rng.choice(_UNARY)(run(d - 1, allow_flow))
        if r < 0.55:
            return rng.choice(_BINARY)(run(d - 1, allow_flow), run(d - 1, allow_flow))
        if r < 0.85:
            return rng.choice((And, Or))(tuple(run(d - 1, allow_flow) for _ in range(rng.randint(2, 3))))
        return Implies(run(d - 1, allow_flow), run(d - 1, allow_flow))

    return run(depth, True)


# -- networks -------------------------------------------------------------------


def cycle_network(n: int, rng: random.Random, names=None):
    """A ring of ``n`` switches with random ingress and egress; the initial
    route goes one way round, the final route the other way.

    The update installs the new rules from the egress backwards and then
    flips the ingress rule, never removing a rule a packet might need.
    Returns ``(spec, ingress, egress, initial_route, final_route)``.
    """
    sw = names or [f"s{i}" for i in range(1, n + 1)]
    ring = list(sw)
    i, e = rng.sample(range(n), 2)
    direction = rng.choice((1, -1))

    def route(d):
        path = [ring[i]]
        k = i
        while ring[k] != ring[e]:
            k = (k + d) % n
            path.append(ring[k])
        return path

    init, fin = route(direction), route(-direction)
    rules = [f"{a}.fwd({b})" for a, b in zip(init, init[1:])]
    ups = [f"upd({a}.fwd({b}/-))" for a, b in reversed(list(zip(fin[1:], fin[2:])))]
    ups.append(f"upd({fin[0]}.fwd({fin[1]}/{init[1]}))")
    update = ups[0] if len(ups) == 1 else "(" + " >> ".join(ups) + ")"
    cons = "\n".join(f"{ring[k]} - {ring[(k + 1) % n]}" for k in range(n))
    text = (
        f"[switches] {' '.join(sw)}\n[connections]\n{cons}\n[ingress] {ring[i]}\n[egress] {ring[e]}\n"
        "[forwarding]\n" + "\n".join(rules) + f"\n[update] {update}\n"
    )
    return parse_network(text), ring[i], ring[e], init, fin


def diamond_network(rng: random.Random):
    """The 4-switch diamond s1-s2-s4-s3-s1 as a ring."""
    return cycle_network(4, rng, names=["s1", "s2", "s4", "s3"])


def all_lassos(alphabet_size: int, max_len: int):
    """Yield ``(length, loop_start, words)`` with every word of that shape."""
    import numpy as np

    for L in range(1, max_len + 1):
        words = np.array(list(itertools.product(range(alphabet_size), repeat=L)), dtype=np.int64)
        for k in range(L):
            yield L, k, words
