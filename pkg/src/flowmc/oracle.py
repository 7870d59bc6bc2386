"""Brute-force evaluators used as differential oracles.

Nothing here goes through automata: LTL is evaluated on lassos by fixpoint
iteration over positions, and the A operator by enumerating flow chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import BudgetExceeded
from .formulas import (
    Always,
    And,
    Atom,
    Const,
    Eventually,
    FlowSub,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakUntil,
    eval_prop,
    resolve_for,
)
from .net import Lasso, PetriNetWithTransits, Step

MAX_CHAINS = 10_000
MAX_LASSOS = 2_000_000
_BATCH = 8192


# -- LTL on lassos -----------------------------------------------------------


def successor_index(length: int, loop_start: int) -> np.ndarray:
    succ = np.arange(1, length + 1)
    succ[-1] = loop_start
    return succ


def eval_ltl_batch(phi: Formula, leaf: Callable[[Formula], np.ndarray], length: int, loop_start: int) -> np.ndarray:
    """Truth of ``phi`` at every position of ``K`` lassos of equal shape.

    ``leaf(f)`` returns a ``[K, length]`` bool array for a propositional
    (or ``A``) subformula ``f``.  Position ``length - 1`` is followed by
    ``loop_start``.  Returns a ``[K, length]`` bool array.
    """
    succ = successor_index(length, loop_start)
    memo: dict[int, np.ndarray] = {}

    def fix(init, step):
        # iterate to the fixpoint; at most length + 1 rounds are needed
        x = init
        for _ in range(length + 1):
            y = step(x)
            if np.array_equal(x, y):
                break
            x = y
        return x

    def ev(f):
        hit = memo.get(id(f))
        if hit is not None:
            return hit
        if isinstance(f, (Atom, Const, FlowSub)):
            r = leaf(f)
        elif isinstance(f, Not):
            r = ~ev(f.arg)
        elif isinstance(f, And):
            r = np.logical_and.reduce([ev(a) for a in f.args])
        elif isinstance(f, Or):
            r = np.logical_or.reduce([ev(a) for a in f.args])
        elif isinstance(f, Implies):
            r = ~ev(f.left) | ev(f.right)
        elif isinstance(f, Next):
            r = ev(f.arg)[:, succ]
        else:
            r = _temporal(f, ev, fix, succ)
        memo[id(f)] = r
        return r

    return ev(phi)


def _temporal(f, ev, fix, succ):
    if isinstance(f, Eventually):
        a = ev(f.arg)
        return fix(np.zeros_like(a), lambda x: a | x[:, succ])
    if isinstance(f, Always):
        a = ev(f.arg)
        return fix(np.ones_like(a), lambda x: a & x[:, succ])
    a, b = ev(f.left), ev(f.right)
    if isinstance(f, Until):
        return fix(np.zeros_like(a), lambda x: b | (a & x[:, succ]))
    if isinstance(f, WeakUntil):
        return fix(np.ones_like(a), lambda x: b | (a & x[:, succ]))
    if isinstance(f, Release):
        return fix(np.ones_like(a), lambda x: b & (a | x[:, succ]))
    raise TypeError(f"unexpected node {type(f).__name__}")


def _step_leaf(steps):
    def leaf(f):
        return np.array([[eval_prop(f, s.marking, s.fired) for s in steps]], dtype=bool)

    return leaf


def eval_ltl_on_lasso(phi: Formula, lasso: Lasso) -> bool:
    """Truth of an LTL formula at position 0 of ``lasso``."""
    steps = lasso.steps
    return bool(eval_ltl_batch(phi, _step_leaf(steps), len(steps), len(lasso.prefix))[0, 0])


# -- flow chains on a lasso --------------------------------------------------


@dataclass(frozen=True)
class ChainTrace:
    """A flow chain as a lasso of (place, moving transition) letters.

    The last letter of a chain that stops moving is ``(place, None)`` and
    forms the loop.
    """

    letters: tuple[tuple[str, str | None], ...]
    loop_start: int

    def as_lasso(self) -> Lasso:
        steps = [Step(frozenset((p,)), t) for p, t in self.letters]
        return Lasso(tuple(steps[: self.loop_start]), tuple(steps[self.loop_start:]))


class _ChainGraph:
    def __init__(self, pnwt: PetriNetWithTransits, lasso: Lasso):
        self.pnwt = pnwt
        self.steps = lasso.steps
        self.L = len(self.steps)
        self.P = len(lasso.prefix)
        self.succ = successor_index(self.L, self.P).tolist()
        self._next_move: dict[tuple[str, int], int | None] = {}

    def next_move(self, p: str, j: int) -> int | None:
        """First position at or after ``j`` whose transition consumes ``p``."""
        key = (p, j)
        if key in self._next_move:
            return self._next_move[key]
        pre = self.pnwt.net.pre
        seen = set()
        k = j
        found = None
        while k not in seen:
            seen.add(k)
            t = self.steps[k].fired
            if t is not None and p in pre[t]:
                found = k
                break
            k = self.succ[k]
        self._next_move[key] = found
        return found

    def moves(self, p: str, j: int):
        """``(t, [next nodes])`` leaving node ``(p, j)``, or None if the chain rests."""
        k = self.next_move(p, j)
        if k is None:
            return None
        t = self.steps[k].fired
        targets = [q for s, q in self.pnwt.transits[t] if s == p]
        return t, [(q, self.succ[k]) for q in sorted(targets)]

    def births(self, j0: int) -> list[tuple[str, int]]:
        """Start nodes of chains created at or after position ``j0``."""
        positions = range(self.P, self.L) if j0 >= self.P else range(j0, self.L)
        out = []
        for b in positions:
            t = self.steps[b].fired
            if t is None:
                continue
            for s, q in self.pnwt.transits[t]:
                if s == ">":
                    out.append((q, self.succ[b]))
        return out

    def occupied(self) -> list[set[str]]:
        """Places carrying some flow chain at the first visit of each position.

        A run starts without chains, so position 0 is empty; the rest follows
        the lasso once from there.
        """
        occ: list[set[str]] = [set()]
        for j in range(self.L - 1):
            t = self.steps[j].fired
            if t is None:
                occ.append(set(occ[j]))
                continue
            pre = self.pnwt.net.pre[t]
            nxt = {p for p in occ[j] if p not in pre}
            for s, q in self.pnwt.transits[t]:
                if s == ">" or s in occ[j]:
                    nxt.add(q)
            occ.append(nxt)
        return occ

    def traces_from(self, start: tuple[str, int], budget: list[int]) -> list[ChainTrace]:
        """All chain traces from a node, closing each path at its first repeated node."""
        out = []
        path: list[tuple[str, int]] = []
        letters: list[tuple[str, str | None]] = []
        index: dict[tuple[str, int], int] = {}

        def charge():
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExceeded(f"more than {MAX_CHAINS} flow chains on one lasso")

        # explicit DFS: frames of (node, iterator over successors)
        stack = []

        def enter(node):
            if node in index:
                charge()
                out.append(ChainTrace(tuple(letters), index[node]))
                return False
            mv = self.moves(*node)
            index[node] = len(path)
            path.append(node)
            if mv is None:
                letters.append((node[0], None))
                charge()
                out.append(ChainTrace(tuple(letters), len(letters) - 1))
                letters.pop()
                path.pop()
                del index[node]
                return False
            t, targets = mv
            if not targets:
                # consumed without a transit: the chain ends and rests here
                letters.append((node[0], None))
                charge()
                out.append(ChainTrace(tuple(letters), len(letters) - 1))
                letters.pop()
                path.pop()
                del index[node]
                return False
            letters.append((node[0], t))
            stack.append((node, iter(targets)))
            return True

        enter(start)
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                letters.pop()
                del index[node]
                continue
            enter(nxt)
        return out


def flow_chain_traces(pnwt: PetriNetWithTransits, lasso: Lasso, at: int = 0) -> list[ChainTrace]:
    """Traces of the chains alive at position ``at`` (from there on) and of
    every chain created at or after it."""
    g = _ChainGraph(pnwt, lasso)
    budget = [MAX_CHAINS]
    starts = [(p, at) for p in sorted(g.occupied()[at])] + g.births(at)
    out: list[ChainTrace] = []
    for s in dict.fromkeys(starts):
        out += g.traces_from(s, budget)
    return out


@lru_cache(maxsize=1 << 18)
def _trace_holds(phi_i: Formula, trace: ChainTrace) -> bool:
    return eval_ltl_on_lasso(phi_i, trace.as_lasso())


def eval_flow_on_lasso(pnwt: PetriNetWithTransits, lasso: Lasso, phi_i: Formula, at: int = 0) -> bool:
    """``A phi_i`` at position ``at``: ``phi_i`` holds on every relevant chain."""
    return violating_chain(pnwt, lasso, phi_i, at) is None


def violating_chain(pnwt: PetriNetWithTransits, lasso: Lasso, phi_i: Formula, at: int = 0) -> ChainTrace | None:
    if isinstance(phi_i, FlowSub):
        phi_i = phi_i.arg
    for tr in dict.fromkeys(flow_chain_traces(pnwt, lasso, at)):
        if not _trace_holds(phi_i, tr):
            return tr
    return None


def _flow_outside_temporal(phi: Formula) -> bool:
    """True iff no A occurs below a temporal operator, so only position 0 matters."""
    stack = [(phi, False)]
    while stack:
        f, under = stack.pop()
        if isinstance(f, FlowSub):
            if under:
                return False
            continue
        temporal = under or isinstance(f, (Next, Always, Eventually, Until, WeakUntil, Release))
        stack.extend((c, temporal) for c in f.children())
    return True


def eval_flow_ltl_on_lasso(pnwt: PetriNetWithTransits, phi: Formula, lasso: Lasso) -> bool:
    """Truth of a Flow-LTL formula on a run of ``pnwt`` given as a lasso."""
    steps = lasso.steps
    step_leaf = _step_leaf(steps)
    # positions other than 0 are only read through temporal operators
    positions = [0] if _flow_outside_temporal(phi) else range(len(steps))

    def leaf(f):
        if isinstance(f, FlowSub):
            vals = np.zeros((1, len(steps)), dtype=bool)
            for j in positions:
                vals[0, j] = eval_flow_on_lasso(pnwt, lasso, f.arg, j)
            return vals
        return step_leaf(f)

    return bool(eval_ltl_batch(phi, leaf, len(steps), len(lasso.prefix))[0, 0])


# -- bounded exhaustive check -------------------------------------------------


@dataclass
class BoundedVerdict:
    """Result of :func:`brute_force_check`; never claims unbounded truth."""

    violated: bool
    lasso: Lasso | None = None
    stats: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return "VIOLATED" if self.violated else "BOUNDED-HOLDS"


def enumerate_lassos(graph, bound: int, max_lassos: int = MAX_LASSOS):
    """Every lasso of a state graph with ``len(prefix) + len(loop) <= bound``.

    Yields ``(edges, loop_start)`` where ``edges`` is the list of state-graph
    edge ids along the lasso.
    """
    out_edges = [graph.edges_from(s).tolist() for s in range(graph.num_states)]
    dst = graph.dst.tolist()
    count = 0
    states = [graph.initial]
    edges: list[int] = []
    stack = [iter(out_edges[graph.initial])]
    while stack:
        e = next(stack[-1], None)
        if e is None:
            stack.pop()
            states.pop()
            if edges:
                edges.pop()
            continue
        d = dst[e]
        edges.append(e)
        for k, s in enumerate(states):
            if s == d:
                count += 1
                if count > max_lassos:
                    raise BudgetExceeded(f"more than {max_lassos} lassos within bound {bound}")
                yield list(edges), k
        if len(edges) < bound:
            states.append(d)
            stack.append(iter(out_edges[d]))
        else:
            edges.pop()


def _canonical(prefix, loop) -> tuple[tuple, tuple]:
    """Normalized form of the lasso word ``prefix loop^w`` over edge ids."""
    prefix, loop = list(prefix), list(loop)
    while prefix and prefix[-1] == loop[-1]:
        prefix.pop()
        loop.insert(0, loop.pop())
    n = len(loop)
    for d in range(1, n):
        if n % d == 0 and loop == loop[d:] + loop[:d]:
            loop = loop[:d]
            break
    return tuple(prefix), tuple(loop)


class _LassoBatches:
    """Evaluates a Flow-LTL formula on many lassos of one state graph.

    Lassos are grouped by shape so the run part is evaluated with numpy over
    whole groups.  When the formula has a single A that sits outside every
    temporal operator, the run part is evaluated once with A true and once
    with A false; chains are only enumerated for lassos on which the two
    disagree, and their verdicts are memoized per normalized word.
    """

    def __init__(self, pnwt: PetriNetWithTransits, phi: Formula, graph):
        self.pnwt, self.phi, self.graph = pnwt, phi, graph
        self.markings = [graph.marking(s) for s in range(graph.num_states)]
        self.src = graph.src.tolist()
        self.fired = [graph.transition(e) for e in range(graph.num_edges)]
        self._edge_vals: dict[Formula, np.ndarray] = {}
        flows = set()
        stack = [phi]
        while stack:
            f = stack.pop()
            if isinstance(f, FlowSub):
                flows.add(f)
            else:
                stack.extend(f.children())
        self.flow = next(iter(flows)) if len(flows) == 1 and _flow_outside_temporal(phi) else None
        self.split = not flows or self.flow is not None
        self._memo: dict = {}
        self._loops: dict = {}
        self._prefixes: dict = {}
        self.births = {
            t: [q for src, q in pnwt.transits.get(t, ()) if src == ">"] for t in pnwt.net.transitions
        }

    def lasso(self, edges, k: int) -> Lasso:
        steps = [Step(self.markings[self.src[e]], self.fired[e]) for e in edges]
        return Lasso(tuple(steps[:k]), tuple(steps[k:]))

    def _on_edges(self, f: Formula) -> np.ndarray:
        hit = self._edge_vals.get(f)
        if hit is None:
            hit = np.array(
                [eval_prop(f, self.markings[s], t) for s, t in zip(self.src, self.fired)], dtype=bool
            )
            self._edge_vals[f] = hit
        return hit

    def _flow_value(self, edges, k: int) -> bool:
        if self.flow is None:
            lasso = self.lasso(edges, k)
            key = lasso.normalized()
            hit = self._memo.get(key)
            if hit is None:
                hit = self._memo[key] = eval_flow_ltl_on_lasso(self.pnwt, self.phi, lasso)
            return hit
        # A at position 0 quantifies over every chain of the run; none exists
        # before the first step.  A chain's future depends only on the word from
        # its start on, so the loop and each prefix suffix are memoized.
        loop = tuple(edges[k:])
        ok, used = self._loop_ok(loop)
        if ok:
            ok, n = self._prefix_ok(tuple(edges[:k]), loop)
            used += n
        if used > MAX_CHAINS:
            raise BudgetExceeded(f"more than {MAX_CHAINS} flow chains on one lasso")
        return ok

    def _remember(self, memo: dict, key, value):
        if len(memo) > 1_000_000:
            memo.clear()
        memo[key] = value
        return value

    def _loop_ok(self, loop: tuple) -> tuple[bool, int]:
        hit = self._loops.get(loop)
        if hit is not None:
            return hit
        L = len(loop)
        starts = []
        for b, e in enumerate(loop):
            t = self.fired[e]
            if t is not None:
                starts += [(q, (b + 1) % L) for q in self.births[t]]
        ok, used = True, 0
        for p, j in dict.fromkeys(starts):
            ok, n = self._start_ok(p, (), loop[j:] + loop[:j])
            used += n
            if not ok:
                break
        return self._remember(self._loops, loop, (ok, used))

    def _prefix_ok(self, prefix: tuple, loop: tuple) -> tuple[bool, int]:
        if not prefix:
            return True, 0
        hit = self._prefixes.get((prefix, loop))
        if hit is not None:
            return hit
        t = self.fired[prefix[0]]
        ok, used = True, 0
        for q in self.births[t] if t is not None else ():
            ok, n = self._start_ok(q, prefix[1:], loop)
            used += n
            if not ok:
                break
        if ok:
            ok, n = self._prefix_ok(prefix[1:], loop)
            used += n
        return self._remember(self._prefixes, (prefix, loop), (ok, used))

    def _start_ok(self, place: str, prefix: tuple, loop: tuple) -> tuple[bool, int]:
        """Do all chains from ``place`` on the word ``prefix loop^w`` satisfy the flow formula?"""
        pre = self.pnwt.net.pre
        # steps that do not consume the place leave the chain's trace unchanged
        while prefix:
            t = self.fired[prefix[0]]
            if t is not None and place in pre[t]:
                break
            prefix = prefix[1:]
        else:
            for j, e in enumerate(loop):
                t = self.fired[e]
                if t is not None and place in pre[t]:
                    loop = loop[j:] + loop[:j]
                    break
            else:
                loop = ()
        if not prefix and not loop:
            key = (place, None)
        else:
            key = (place,) + _canonical(prefix, loop)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        phi_i = self.flow.arg
        if not loop:
            return self._remember(self._memo, key, (_trace_holds(phi_i, ChainTrace(((place, None),), 0)), 1))
        g = _ChainGraph(self.pnwt, self.lasso(key[1] + key[2], len(key[1])))
        traces = g.traces_from((place, 0), [MAX_CHAINS])
        ok = all(_trace_holds(phi_i, tr) for tr in dict.fromkeys(traces))
        return self._remember(self._memo, key, (ok, len(traces)))

    def holds(self, batch) -> list[bool]:
        """Truth of the formula on each ``(edges, loop_start)`` of ``batch``."""
        out = [True] * len(batch)
        groups: dict[tuple[int, int], list[int]] = {}
        for i, (edges, k) in enumerate(batch):
            groups.setdefault((len(edges), k), []).append(i)
        for (length, k), idx in groups.items():
            if not self.split:
                for i in idx:
                    out[i] = self._flow_value(*batch[i])
                continue
            E = np.array([batch[i][0] for i in idx], dtype=np.int64)

            def run_part(flow_value: bool) -> np.ndarray:
                def leaf(f):
                    if isinstance(f, FlowSub):
                        return np.full(E.shape, flow_value, dtype=bool)
                    return self._on_edges(f)[E]

                return eval_ltl_batch(self.phi, leaf, length, k)[:, 0]

            if self.flow is None:
                vals = run_part(True)
                for j, i in enumerate(idx):
                    out[i] = bool(vals[j])
                continue
            if_true, if_false = run_part(True), run_part(False)
            for j, i in enumerate(idx):
                a, b = bool(if_true[j]), bool(if_false[j])
                if a == b:
                    out[i] = a
                else:
                    out[i] = a if self._flow_value(*batch[i]) else b
        return out


def brute_force_check(
    pnwt: PetriNetWithTransits,
    phi: Formula,
    bound: int,
    max_states: int = 100_000,
    max_lassos: int = MAX_LASSOS,
) -> BoundedVerdict:
    """Search all lassos up to ``bound`` steps for a violation of ``phi``."""
    from .ltlmc.stategraph import build_state_graph

    net = pnwt.net
    phi = resolve_for(phi, net)
    graph = build_state_graph(net, max_states)
    ev = _LassoBatches(pnwt, phi, graph)
    checked = 0
    batch: list = []

    def flush():
        # the first violating lasso in enumeration order, if any
        for i, ok in enumerate(ev.holds(batch)):
            if not ok:
                return ev.lasso(*batch[i]), checked - len(batch) + i + 1
        batch.clear()
        return None, checked

    for edges, k in enumerate_lassos(graph, bound, max_lassos):
        batch.append((edges, k))
        checked += 1
        if len(batch) >= _BATCH:
            lasso, n = flush()
            if lasso is not None:
                return BoundedVerdict(True, lasso, {"lassos": n, "states": graph.num_states})
    lasso, n = flush()
    if lasso is not None:
        return BoundedVerdict(True, lasso, {"lassos": n, "states": graph.num_states})
    return BoundedVerdict(False, None, {"lassos": checked, "states": graph.num_states})


__all__ = [
    "eval_ltl_batch",
    "eval_ltl_on_lasso",
    "eval_flow_on_lasso",
    "eval_flow_ltl_on_lasso",
    "flow_chain_traces",
    "violating_chain",
    "ChainTrace",
    "BoundedVerdict",
    "brute_force_check",
    "enumerate_lassos",
]
