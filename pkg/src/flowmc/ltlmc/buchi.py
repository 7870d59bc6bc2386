"""LTL to generalized Büchi automata by on-the-fly tableau expansion.

Automata are state-labelled: a run ``q0 q1 ...`` reads word ``a0 a1 ...``
when the label of ``q_i`` holds at ``a_i``.  Every maximal propositional
subformula is a single literal of the tableau, so large disjunctions over
transitions cost nothing extra.

Acceptance is generalized and comes in two flavours: state sets (one per
until-subformula) and letter sets.  A top-level conjunct ``G F p`` with
propositional ``p``, or a disjunction of such conjuncts, is a property of
the word alone; it is kept out of the tableau and becomes the letter set
"``p`` holds infinitely often".  Fairness assumptions have exactly this
shape after negation, which keeps their translation linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..formulas import (
    FALSE,
    TRUE,
    Always,
    And,
    Const,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Release,
    Until,
    WeakUntil,
    conj,
    disj,
    eval_prop,
    has_flow,
    is_propositional,
    render,
)

# node kinds of the negation normal form
_LIT, _TRUE, _FALSE, _AND, _OR, _NEXT, _UNTIL, _RELEASE = range(8)


@dataclass
class BuchiAutomaton:
    """Generalized Büchi automaton with state labels.

    ``acc_states[j]`` is a set of states to be visited infinitely often;
    ``acc_letters[j]`` a propositional formula to hold infinitely often.
    No acceptance sets means every infinite run is accepting.
    """

    labels: list[Formula]
    initial: list[int]
    succ: list[list[int]]
    acc_states: list[frozenset] = field(default_factory=list)
    acc_letters: list[Formula] = field(default_factory=list)

    @property
    def num_states(self) -> int:
        return len(self.labels)

    @property
    def num_sets(self) -> int:
        return len(self.acc_states) + len(self.acc_letters)

    def state_masks(self) -> np.ndarray:
        """Bit mask of the state acceptance sets containing each state."""
        masks = np.zeros(self.num_states, dtype=np.int64)
        for j, s in enumerate(self.acc_states):
            for q in s:
                masks[q] |= 1 << j
        return masks

    def arrays(self):
        """CSR successor arrays and initial states as int64 arrays."""
        ptr = np.zeros(self.num_states + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(s) for s in self.succ])
        idx = np.array([q for s in self.succ for q in s], dtype=np.int64)
        return ptr, idx, np.array(self.initial, dtype=np.int64)

    def accepts(self, steps, loop_start: int) -> bool:
        """Acceptance of the lasso word given as a sequence of steps."""
        L = len(steps)
        if not 0 <= loop_start < L:
            raise ValueError("loop start out of range")
        ok = np.zeros((self.num_states, L), dtype=np.bool_)
        for q, lab in enumerate(self.labels):
            for i, st in enumerate(steps):
                ok[q, i] = eval_prop(lab, st.marking, st.fired)
        off = len(self.acc_states)
        acc_pos = np.zeros(L, dtype=np.int64)
        for j, f in enumerate(self.acc_letters):
            for i, st in enumerate(steps):
                if eval_prop(f, st.marking, st.fired):
                    acc_pos[i] |= 1 << (off + j)
        ptr, idx, init = self.arrays()
        return bool(
            kernels.lasso_accepts(ok, self.state_masks(), acc_pos, self.num_sets, ptr, idx, init, loop_start)
        )


    def letter_tables(self, letters):
        """Label truth ``allowed[q, a]`` and acceptance masks ``acc[a]`` for an
        alphabet of ``(marking, fired)`` letters."""
        A = len(letters)
        allowed = np.zeros((self.num_states, A), dtype=np.bool_)
        for q, lab in enumerate(self.labels):
            for a, (m, t) in enumerate(letters):
                allowed[q, a] = eval_prop(lab, m, t)
        off = len(self.acc_states)
        acc = np.zeros(A, dtype=np.int64)
        for j, f in enumerate(self.acc_letters):
            for a, (m, t) in enumerate(letters):
                if eval_prop(f, m, t):
                    acc[a] |= 1 << (off + j)
        return allowed, acc

    def accepts_batch(self, words: np.ndarray, loop_start: int, letters) -> np.ndarray:
        """Acceptance of many lassos of one shape; ``words[k, i]`` indexes ``letters``."""
        if not 0 <= loop_start < words.shape[1]:
            raise ValueError("loop start out of range")
        allowed, acc = self.letter_tables(letters)
        ptr, idx, init = self.arrays()
        return kernels.lasso_accepts_batch(
            np.ascontiguousarray(words, dtype=np.int64), loop_start, allowed, self.state_masks(), acc,
            self.num_sets, ptr, idx, init,
        )


class _Nnf:
    """Hash-consed negation normal form with propositional leaves."""

    def __init__(self):
        self.nodes: list[tuple] = []
        self.ids: dict[tuple, int] = {}
        self.memo: dict[tuple[int, bool], int] = {}
        self.keep: list[Formula] = []

    def make(self, key: tuple) -> int:
        i = self.ids.get(key)
        if i is None:
            i = self.ids[key] = len(self.nodes)
            self.nodes.append(key)
        return i

    def leaf(self, f: Formula, neg: bool) -> int:
        if isinstance(f, Const):
            return self.make((_TRUE,) if f.value != neg else (_FALSE,))
        if neg:
            f = f.arg if isinstance(f, Not) else Not(f)
        return self.make((_LIT, f))

    def complement(self, i: int) -> int | None:
        f = self.nodes[i][1]
        g = f.arg if isinstance(f, Not) else Not(f)
        return self.ids.get((_LIT, g))

    def _assoc(self, kind, kids):
        # flatten nested n-ary nodes of the same kind and drop units
        unit, zero = ((_TRUE,), (_FALSE,)) if kind == _AND else ((_FALSE,), (_TRUE,))
        flat: list[int] = []
        for k in kids:
            node = self.nodes[k]
            if node == zero:
                return self.make(zero)
            if node == unit:
                continue
            flat.extend(node[1] if node[0] == kind else (k,))
        flat = list(dict.fromkeys(flat))
        # (a U b) || (a U c) == a U (b || c) and (a R b) && (a R c) == a R (b && c);
        # without this, disjunctions of flow transition atoms blow up the tableau
        # ``G F p`` conjuncts stay apart so they can become letter sets
        merge = _UNTIL if kind == _OR else _RELEASE

        def mergeable(k):
            node = self.nodes[k]
            return node[0] == merge and (kind == _OR or self.infinitely_often(k) is None)

        groups: dict[int, list[int]] = {}
        for k in flat:
            if mergeable(k):
                groups.setdefault(self.nodes[k][1], []).append(self.nodes[k][2])
        if any(len(g) > 1 for g in groups.values()):
            out, done = [], set()
            for k in flat:
                node = self.nodes[k]
                if mergeable(k) and len(groups[node[1]]) > 1:
                    if node[1] not in done:
                        done.add(node[1])
                        out.append(self.make((merge, node[1], self._assoc(kind, groups[node[1]]))))
                else:
                    out.append(k)
            return self._assoc(kind, out)
        if not flat:
            return self.make(unit)
        if len(flat) == 1:
            return flat[0]
        return self.make((kind, tuple(flat)))

    def build(self, f: Formula, neg: bool = False) -> int:
        key = (id(f), neg)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.keep.append(f)
        r = self._build(f, neg)
        self.memo[key] = r
        return r

    def _build(self, f, neg):
        b = self.build
        if is_propositional(f):
            return self.leaf(f, neg)
        if isinstance(f, Not):
            return b(f.arg, not neg)
        if isinstance(f, (And, Or)):
            kind = _AND if isinstance(f, And) != neg else _OR
            return self._assoc(kind, [b(a, neg) for a in f.args])
        if isinstance(f, Implies):
            if neg:
                return self._assoc(_AND, [b(f.left, False), b(f.right, True)])
            return self._assoc(_OR, [b(f.left, True), b(f.right, False)])
        if isinstance(f, Next):
            return self.make((_NEXT, b(f.arg, neg)))
        true, false = self.make((_TRUE,)), self.make((_FALSE,))
        if isinstance(f, Always):
            return self.make((_UNTIL, true, b(f.arg, True)) if neg else (_RELEASE, false, b(f.arg, False)))
        if isinstance(f, Eventually):
            return self.make((_RELEASE, false, b(f.arg, True)) if neg else (_UNTIL, true, b(f.arg, False)))
        if isinstance(f, Until):
            kind = _RELEASE if neg else _UNTIL
            return self.make((kind, b(f.left, neg), b(f.right, neg)))
        if isinstance(f, Release):
            kind = _UNTIL if neg else _RELEASE
            return self.make((kind, b(f.left, neg), b(f.right, neg)))
        if isinstance(f, WeakUntil):
            # a W b  ==  b R (a || b)  ==  (a U b) || G a
            lhs, rhs = b(f.left, neg), b(f.right, neg)
            if neg:
                return self.make((_UNTIL, rhs, self._assoc(_AND, [lhs, rhs])))
            return self.make((_RELEASE, rhs, self._assoc(_OR, [lhs, rhs])))
        raise TypeError(f"unexpected node {type(f).__name__}")

    def infinitely_often(self, i: int) -> Formula | None:
        """``p`` if node ``i`` is ``G F p`` (or a disjunction of such), else None."""
        node = self.nodes[i]
        if node[0] == _OR:
            props = [self.infinitely_often(k) for k in node[1]]
            return None if any(p is None for p in props) else disj(props)
        if node[0] == _RELEASE and self.nodes[node[1]] == (_FALSE,):
            inner = self.nodes[node[2]]
            if inner[0] == _UNTIL and self.nodes[inner[1]] == (_TRUE,):
                leaf = self.nodes[inner[2]]
                if leaf[0] == _LIT:
                    return leaf[1]
                if leaf[0] in (_TRUE, _FALSE):
                    return Const(leaf[0] == _TRUE)
        return None

    def conjuncts(self, i: int) -> list[int]:
        node = self.nodes[i]
        return list(node[1]) if node[0] == _AND else [i]


class Tableau:
    """Lazily expanded tableau automaton (Gerth, Peled, Vardi, Wolper).

    A state is a pair (old, next) of formula sets.  Its label is the
    conjunction of the literals in ``old``; its successors are the
    expansions of ``next``.  States are created on demand, so a product
    construction only pays for the states it reaches.
    """

    def __init__(self, phi: Formula, extract_fairness: bool = True):
        if has_flow(phi):
            raise ValueError("the tableau expects an LTL formula without the A operator")
        nnf = self.nnf = _Nnf()
        root = nnf.build(phi)
        letter_sets: list[Formula] = []
        if extract_fairness:
            rest = []
            for k in nnf.conjuncts(root):
                p = nnf.infinitely_often(k)
                if p is None:
                    rest.append(k)
                elif p != TRUE:
                    letter_sets.append(p)
            root = nnf._assoc(_AND, rest)
        self.root = root
        self.letter_sets = letter_sets
        self.untils = self._closure_untils(root)
        self.keys: list[tuple[frozenset, frozenset]] = []
        self.ids: dict[tuple[frozenset, frozenset], int] = {}
        self.labels: list[Formula] = []
        self.acc: list[int] = []
        self._succ: dict[frozenset, list[int]] = {}
        self._initial: list[int] | None = None

    def _closure_untils(self, root):
        seen, stack, out = {root}, [root], []
        while stack:
            k = stack.pop()
            node = self.nnf.nodes[k]
            if node[0] == _UNTIL:
                out.append(k)
            kids = node[1] if node[0] in (_AND, _OR) else node[1:] if node[0] in (_NEXT, _UNTIL, _RELEASE) else ()
            for c in kids:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return sorted(out)

    @property
    def num_state_sets(self) -> int:
        return len(self.untils)

    def _state(self, old: frozenset, nxt: frozenset) -> int:
        key = (old, nxt)
        j = self.ids.get(key)
        if j is None:
            j = self.ids[key] = len(self.keys)
            self.keys.append(key)
            nodes = self.nnf.nodes
            self.labels.append(conj(nodes[k][1] for k in sorted(old) if nodes[k][0] == _LIT))
            mask = 0
            for b, u in enumerate(self.untils):
                if u not in old or nodes[u][2] in old:
                    mask |= 1 << b
            self.acc.append(mask)
        return j

    def expand(self, formulas: frozenset) -> list[int]:
        """States whose ``old`` set fulfils all of ``formulas`` now."""
        hit = self._succ.get(formulas)
        if hit is not None:
            return hit
        nodes = self.nnf.nodes
        out: list[int] = []
        work = [(set(formulas), frozenset(), frozenset())]
        while work:
            new, old, nxt = work.pop()
            if not new:
                out.append(self._state(old, nxt))
                continue
            eta = new.pop()
            if eta in old:
                work.append((new, old, nxt))
                continue
            node = nodes[eta]
            kind = node[0]
            old2 = old | {eta}
            if kind == _FALSE:
                continue
            if kind == _TRUE:
                work.append((new, old2, nxt))
            elif kind == _LIT:
                c = self.nnf.complement(eta)
                if c is not None and c in old:
                    continue
                work.append((new, old2, nxt))
            elif kind == _AND:
                work.append((new | (set(node[1]) - old2), old2, nxt))
            elif kind == _OR:
                for k in node[1]:
                    work.append((new | ({k} - old2), old2, nxt))
            elif kind == _NEXT:
                work.append((new, old2, nxt | {node[1]}))
            elif kind == _UNTIL:
                a, b = node[1], node[2]
                work.append((new | ({a} - old2), old2, nxt | {eta}))
                work.append((new | ({b} - old2), old2, nxt))
            elif kind == _RELEASE:
                a, b = node[1], node[2]
                work.append((new | ({b} - old2), old2, nxt | {eta}))
                work.append((new | ({a, b} - old2), old2, nxt))
        out = sorted(set(out))
        self._succ[formulas] = out
        return out

    def initial(self) -> list[int]:
        if self._initial is None:
            self._initial = self.expand(frozenset((self.root,)))
        return self._initial

    def successors(self, q: int) -> list[int]:
        return self.expand(self.keys[q][1])

    def automaton(self) -> BuchiAutomaton:
        """Eager closure of all reachable tableau states."""
        initial = self.initial()
        seen = set(initial)
        stack = list(initial)
        while stack:
            q = stack.pop()
            for r in self.successors(q):
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
        order = sorted(seen)
        index = {q: i for i, q in enumerate(order)}
        succ = [[index[r] for r in self.successors(q)] for q in order]
        acc_states = [
            frozenset(index[q] for q in order if self.acc[q] >> b & 1) for b in range(len(self.untils))
        ]
        if not initial:
            # unsatisfiable: one label-false state keeps the invariants simple
            return BuchiAutomaton([FALSE], [0], [[]], [], [])
        return BuchiAutomaton(
            [self.labels[q] for q in order], [index[q] for q in initial], succ, acc_states, list(self.letter_sets)
        )


def ltl_to_buchi(phi: Formula, extract_fairness: bool = True) -> BuchiAutomaton:
    """Generalized Büchi automaton accepting exactly the models of ``phi``."""
    return Tableau(phi, extract_fairness).automaton()


def describe(aut: BuchiAutomaton) -> str:
    lines = [f"states: {aut.num_states}, initial: {aut.initial}"]
    for q, lab in enumerate(aut.labels):
        lines.append(f"  {q}: [{render(lab)}] -> {aut.succ[q]}")
    for j, s in enumerate(aut.acc_states):
        lines.append(f"  F{j} = {sorted(s)}")
    for f in aut.acc_letters:
        lines.append(f"  GF {render(f)}")
    return "\n".join(lines)
