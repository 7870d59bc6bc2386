"""Reachability graphs of safe nets, with stutter self-loops at deadlocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import BudgetExceeded, SafenessError
from ..net import PetriNet

DEFAULT_MAX_STATES = 1_000_000
_BATCH = 4096


@dataclass(frozen=True, eq=False)
class StateGraph:
    """Explicit state space of a net.

    States are rows of ``words`` (bit-packed markings, place ``i`` of
    ``net.places`` is bit ``i``); state 0 is the initial marking.  Edge ``e``
    goes from ``src[e]`` to ``dst[e]`` firing ``net.transitions[trans[e]]``,
    or stutters when ``trans[e] == -1``.  ``out_ptr``/``out_edges`` list
    edges by source in CSR form.
    """

    net: PetriNet
    words: np.ndarray
    src: np.ndarray
    trans: np.ndarray
    dst: np.ndarray
    out_ptr: np.ndarray
    out_edges: np.ndarray

    initial: int = 0

    @property
    def num_states(self) -> int:
        return self.words.shape[0]

    @property
    def num_edges(self) -> int:
        return self.src.shape[0]

    def marking(self, s: int) -> frozenset:
        places = self.net.places
        return frozenset(places[i] for i in kernels.unpack(self.words[s]))

    def transition(self, e: int) -> str | None:
        t = int(self.trans[e])
        return None if t < 0 else self.net.transitions[t]

    def edges_from(self, s: int) -> np.ndarray:
        return self.out_edges[self.out_ptr[s]:self.out_ptr[s + 1]]

    def deadlocks(self) -> list[int]:
        return sorted(int(s) for s in self.src[self.trans < 0])


def transition_masks(net: PetriNet):
    """Bit masks ``(pre, post, inh)`` of shape ``[T, W]``."""
    pidx = {p: i for i, p in enumerate(net.places)}
    W = kernels.n_words(len(net.places))
    T = len(net.transitions)
    pre = np.zeros((T, W), dtype=np.uint64)
    post = np.zeros((T, W), dtype=np.uint64)
    inh = np.zeros((T, W), dtype=np.uint64)
    for k, t in enumerate(net.transitions):
        pre[k] = kernels.pack((pidx[p] for p in net.pre[t]), W)
        post[k] = kernels.pack((pidx[p] for p in net.post[t]), W)
        inh[k] = kernels.pack((pidx[p] for p in net.inhibitors[t]), W)
    return pre, post, inh


def _witness(parent, state, net):
    trace = []
    while state > 0:
        state, t = parent[state]
        trace.append(net.transitions[t])
    return trace[::-1]


def build_state_graph(net: PetriNet, max_states: int = DEFAULT_MAX_STATES) -> StateGraph:
    """Breadth-first closure of the firing rule from the initial marking.

    Raises :class:`SafenessError` (with a firing sequence) when some firing
    would double-mark a place, and :class:`BudgetExceeded` past
    ``max_states`` reachable markings.
    """
    pidx = {p: i for i, p in enumerate(net.places)}
    W = kernels.n_words(len(net.places))
    pre, post, inh = transition_masks(net)
    if pre.shape[0] == 0:
        pre = np.zeros((0, W), dtype=np.uint64)

    store = np.zeros((1024, W), dtype=np.uint64)
    store[0] = kernels.pack((pidx[p] for p in net.initial), W)
    index = {store[0].tobytes(): 0}
    parent = [(-1, -1)]
    n = 1
    src_parts, trans_parts, dst_parts = [], [], []
    lo = 0
    while lo < n:
        hi = min(n, lo + _BATCH)
        batch = store[lo:hi]
        src, trans, succ, bad = kernels.successors(batch, pre, post, inh)
        if bad >= 0:
            s = lo + int(src[bad])
            t = int(trans[bad])
            clash = (batch[src[bad]] & ~pre[t]) & post[t]
            place = net.places[kernels.unpack(clash)[0]]
            raise SafenessError(place, net.transitions[t], _witness(parent, s, net) + [net.transitions[t]])
        dst = np.empty(len(src), dtype=np.int64)
        for e in range(len(src)):
            key = succ[e].tobytes()
            d = index.get(key)
            if d is None:
                if n >= max_states:
                    raise BudgetExceeded(f"more than {max_states} reachable markings")
                if n == store.shape[0]:
                    store = np.concatenate([store, np.zeros_like(store)])
                store[n] = succ[e]
                d = index[key] = n
                parent.append((lo + int(src[e]), int(trans[e])))
                n += 1
            dst[e] = d
        src = src + lo
        # deadlocks stutter forever
        has_succ = np.zeros(hi - lo, dtype=bool)
        has_succ[src - lo] = True
        dead = np.nonzero(~has_succ)[0] + lo
        src_parts += [src, dead]
        trans_parts += [trans, np.full(len(dead), -1, dtype=np.int64)]
        dst_parts += [dst, dead]
        lo = hi

    src = np.concatenate(src_parts).astype(np.int64)
    trans = np.concatenate(trans_parts).astype(np.int64)
    dst = np.concatenate(dst_parts).astype(np.int64)
    order = np.lexsort((trans, src))
    src, trans, dst = src[order], trans[order], dst[order]
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
    return StateGraph(
        net=net,
        words=store[:n].copy(),
        src=src,
        trans=trans,
        dst=dst,
        out_ptr=out_ptr,
        out_edges=np.arange(len(src), dtype=np.int64),
    )
