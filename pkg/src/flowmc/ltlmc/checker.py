"""Product of a state graph with the automaton of the negated property, and
nested depth-first emptiness checking on its degeneralization."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ResolutionError
from ..formulas import (
    PLACE,
    TRANSITION,
    And,
    Atom,
    Const,
    Formula,
    Implies,
    Not,
    Or,
    render,
    resolve_for,
)
from ..net import Lasso, PetriNet, Step
from .buchi import Tableau
from .stategraph import DEFAULT_MAX_STATES, StateGraph, build_state_graph


@dataclass
class Verdict:
    """Outcome of a check.  ``counterexample`` is set iff the property fails."""

    holds: bool
    counterexample: Lasso | None = None
    stats: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return "HOLDS" if self.holds else "VIOLATED"


class EdgeLabeler:
    """Evaluates propositional formulas on every edge of a state graph at once.

    The letter of edge ``e`` is (marking of ``src[e]``, ``trans[e]``).
    """

    def __init__(self, graph: StateGraph):
        self.graph = graph
        self.pidx = {p: i for i, p in enumerate(graph.net.places)}
        self.tidx = {t: i for i, t in enumerate(graph.net.transitions)}
        self._src_words = graph.words[graph.src] if graph.num_edges else np.zeros((0, graph.words.shape[1]), np.uint64)
        self._cache: dict[Formula, np.ndarray] = {}

    def atom(self, a: Atom) -> np.ndarray:
        E = self.graph.num_edges
        name = a.name
        if a.kind == PLACE or (a.kind is None and name in self.pidx):
            i = self.pidx.get(name)
            if i is None:
                raise ResolutionError([name])
            word = self._src_words[:, i // 64]
            return ((word >> np.uint64(i % 64)) & np.uint64(1)).astype(bool)
        if a.kind == TRANSITION or (a.kind is None and name in self.tidx):
            k = self.tidx.get(name)
            if k is None:
                raise ResolutionError([name])
            return self.graph.trans == k
        raise ResolutionError([name])

    def __call__(self, f: Formula) -> np.ndarray:
        hit = self._cache.get(f)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            r = self.atom(f)
        elif isinstance(f, Const):
            r = np.full(self.graph.num_edges, f.value, dtype=bool)
        elif isinstance(f, Not):
            r = ~self(f.arg)
        elif isinstance(f, And):
            r = np.logical_and.reduce([self(a) for a in f.args])
        elif isinstance(f, Or):
            r = np.logical_or.reduce([self(a) for a in f.args])
        elif isinstance(f, Implies):
            r = ~self(f.left) | self(f.right)
        else:
            raise TypeError(f"not propositional: {render(f)}")
        self._cache[f] = r
        return r


class _Product:
    """Degeneralized product; nodes are (state, tableau state, level).

    Tableau states are expanded on demand, so only the part of the
    automaton that meets the state graph is ever built.
    """

    def __init__(self, graph: StateGraph, tab: Tableau):
        self.graph = graph
        self.tab = tab
        self.lab = EdgeLabeler(graph)
        E = graph.num_edges
        n_state_sets = tab.num_state_sets
        self.n_sets = max(1, n_state_sets + len(tab.letter_sets))
        edge_mask = np.zeros(E, dtype=np.int64)
        for j, f in enumerate(tab.letter_sets):
            edge_mask |= self.lab(f).astype(np.int64) << (n_state_sets + j)
        if n_state_sets + len(tab.letter_sets) == 0:
            edge_mask[:] = 1
        self.edge_mask = edge_mask.tolist()
        self._allowed: dict[int, list] = {}
        self.out = [graph.edges_from(s).tolist() for s in range(graph.num_states)]
        self.dst = graph.dst.tolist()
        self.root = (graph.initial, -1, 0)

    def allowed(self, q: int) -> list:
        # allowed(q)[e]: tableau state q may read the letter of edge e
        hit = self._allowed.get(q)
        if hit is None:
            hit = self._allowed[q] = self.lab(self.tab.labels[q]).tolist()
        return hit

    def post(self, node):
        s, q, c = node
        K = self.n_sets
        base = 0 if c == K else c
        tab = self.tab
        qs = tab.initial() if q < 0 else tab.successors(q)
        out = []
        for q2 in qs:
            ok = self.allowed(q2)
            qm = tab.acc[q2]
            for e in self.out[s]:
                if ok[e]:
                    mask = self.edge_mask[e] | qm
                    c2 = base
                    while c2 < K and (mask >> c2) & 1:
                        c2 += 1
                    out.append(((self.dst[e], q2, c2), e))
        return out

    def accepting(self, node) -> bool:
        return node[1] >= 0 and node[2] == self.n_sets


def _nested_dfs(prod: _Product):
    """Nested DFS with cyan/blue/red colours.

    Returns ``(prefix_edges, loop_edges, visited)``; the edge lists are None
    when no accepting cycle exists.
    """
    CYAN, BLUE, RED = 1, 2, 3
    color: dict = {}
    root = prod.root
    color[root] = CYAN
    # blue stack entries: [node, successor list, next index, edge used to enter]
    blue = [[root, prod.post(root), 0, None]]

    def lasso_from_blue(target, extra):
        k = next(i for i, fr in enumerate(blue) if fr[0] == target)
        prefix = [fr[3] for fr in blue[1:k + 1]]
        loop = [fr[3] for fr in blue[k + 1:]] + extra
        return prefix, loop

    while blue:
        frame = blue[-1]
        node, succs, i = frame[0], frame[1], frame[2]
        if i < len(succs):
            frame[2] = i + 1
            nxt, e = succs[i]
            col = color.get(nxt)
            if col == CYAN and (prod.accepting(node) or prod.accepting(nxt)):
                pre, loop = lasso_from_blue(nxt, [e])
                return pre, loop, len(color)
            if col is None:
                color[nxt] = CYAN
                blue.append([nxt, prod.post(nxt), 0, e])
            continue
        # all successors explored: red search from accepting seeds
        if prod.accepting(node):
            red = [[node, succs, 0, None]]
            while red:
                rf = red[-1]
                rnode, rsuccs, j = rf[0], rf[1], rf[2]
                if j >= len(rsuccs):
                    red.pop()
                    continue
                rf[2] = j + 1
                nxt, e = rsuccs[j]
                col = color.get(nxt)
                if col == CYAN:
                    path = [fr[3] for fr in red[1:]] + [e]
                    pre, loop = lasso_from_blue(nxt, [])
                    # the blue stack ends at the seed, which is ``node``
                    return pre, loop + path, len(color)
                if col == BLUE:
                    color[nxt] = RED
                    red.append([nxt, prod.post(nxt), 0, e])
        color[node] = RED if prod.accepting(node) else BLUE
        blue.pop()
    return None, None, len(color)


def _steps(graph: StateGraph, edges) -> list[Step]:
    return [Step(graph.marking(int(graph.src[e])), graph.transition(e)) for e in edges]


def model_check(
    net: PetriNet,
    phi: Formula,
    max_states: int = DEFAULT_MAX_STATES,
    graph: StateGraph | None = None,
) -> Verdict:
    """Does every interleaving-maximal run of ``net`` satisfy ``phi``?"""
    t0 = time.perf_counter()
    phi = resolve_for(phi, net)
    if graph is None:
        graph = build_state_graph(net, max_states)
    t1 = time.perf_counter()
    tab = Tableau(Not(phi))
    prod = _Product(graph, tab)
    prefix, loop, visited = _nested_dfs(prod)
    t2 = time.perf_counter()
    stats = {
        "states": graph.num_states,
        "edges": graph.num_edges,
        "buchi_states": len(tab.labels),
        "acceptance_sets": prod.n_sets,
        "product_states": visited,
        "time_state_graph": round(t1 - t0, 6),
        "time_emptiness": round(t2 - t1, 6),
    }
    if prefix is None:
        return Verdict(True, None, stats)
    return Verdict(False, Lasso(_steps(graph, prefix), _steps(graph, loop)).normalized(), stats)
