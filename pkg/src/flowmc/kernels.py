"""Numeric kernels: successor generation on bit-packed markings and lasso
membership for Büchi automata.

Each kernel has a numba version and a fallback.  Which one runs is fixed at
import time by ``FLOWMC_DISABLE_NUMBA`` (see :mod:`flowmc._jit`); both are
importable under explicit names so they can be compared.
"""

from __future__ import annotations

import numpy as np

from . import _jit

WORD = 64


def n_words(n_places: int) -> int:
    return max(1, (n_places + WORD - 1) // WORD)


def pack(indices, n_w: int) -> np.ndarray:
    row = np.zeros(n_w, dtype=np.uint64)
    for i in indices:
        row[i // WORD] |= np.uint64(1) << np.uint64(i % WORD)
    return row


def unpack(row: np.ndarray) -> list[int]:
    out = []
    for w, word in enumerate(row.tolist()):
        while word:
            low = word & -word
            out.append(w * WORD + low.bit_length() - 1)
            word ^= low
    return out


# -- successor generation ----------------------------------------------------


def successors_numpy(M, pre, post, inh):
    """All (state, transition) firings of a batch of markings.

    Returns ``(src, trans, succ, bad)`` where ``src`` indexes rows of ``M``,
    ``succ`` holds the successor markings and ``bad`` is the index into
    ``src``/``trans`` of the first firing that violates safeness, or -1.
    """
    en = np.all((M[:, None, :] & pre[None, :, :]) == pre[None, :, :], axis=2)
    en &= np.all((M[:, None, :] & inh[None, :, :]) == 0, axis=2)
    src, trans = np.nonzero(en)
    rest = M[src] & ~pre[trans]
    post_t = post[trans]
    clash = np.any((rest & post_t) != 0, axis=1)
    bad = int(np.argmax(clash)) if clash.any() else -1
    return src.astype(np.int64), trans.astype(np.int64), rest | post_t, bad


def _successors_loops(M, pre, post, inh):
    K, W = M.shape
    T = pre.shape[0]
    count = 0
    for k in range(K):
        for t in range(T):
            ok = True
            for w in range(W):
                m = M[k, w]
                if (m & pre[t, w]) != pre[t, w] or (m & inh[t, w]) != 0:
                    ok = False
                    break
            if ok:
                count += 1
    src = np.empty(count, dtype=np.int64)
    trans = np.empty(count, dtype=np.int64)
    succ = np.empty((count, W), dtype=np.uint64)
    bad = -1
    e = 0
    for k in range(K):
        for t in range(T):
            ok = True
            for w in range(W):
                m = M[k, w]
                if (m & pre[t, w]) != pre[t, w] or (m & inh[t, w]) != 0:
                    ok = False
                    break
            if not ok:
                continue
            src[e] = k
            trans[e] = t
            for w in range(W):
                rest = M[k, w] & ~pre[t, w]
                if bad < 0 and (rest & post[t, w]) != 0:
                    bad = e
                succ[e, w] = rest | post[t, w]
            e += 1
    return src, trans, succ, bad


successors_jit = _jit.njit(_successors_loops)
successors = successors_jit if _jit.USE_NUMBA else successors_numpy


# -- lasso membership --------------------------------------------------------


def _lasso_accepts(ok, acc_state, acc_pos, n_sets, succ_ptr, succ_idx, init, loop_start):
    """Does a generalized Büchi automaton accept a lasso word?

    ``ok[q, i]``: the label of state ``q`` holds at position ``i``.
    ``acc_state[q]`` / ``acc_pos[i]``: bit masks of the acceptance sets
    containing state ``q`` / satisfied by the letter at position ``i``.
    Product node ``i*Q + q`` means "state q reads letter i".
    """
    Q = ok.shape[0]
    L = ok.shape[1]
    N = L * Q
    full = (1 << n_sets) - 1
    # reachable product nodes
    seen = np.zeros(N, dtype=np.bool_)
    stack = np.empty(N, dtype=np.int64)
    top = 0
    for k in range(init.shape[0]):
        q = init[k]
        if ok[q, 0] and not seen[q]:
            seen[q] = True
            stack[top] = q
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        i = v // Q
        q = v % Q
        ni = i + 1 if i + 1 < L else loop_start
        for k in range(succ_ptr[q], succ_ptr[q + 1]):
            q2 = succ_idx[k]
            w = ni * Q + q2
            if ok[q2, ni] and not seen[w]:
                seen[w] = True
                stack[top] = w
                top += 1
    # Tarjan SCCs restricted to reachable nodes
    index = np.full(N, -1, dtype=np.int64)
    low = np.zeros(N, dtype=np.int64)
    onstack = np.zeros(N, dtype=np.bool_)
    scc_stack = np.empty(N, dtype=np.int64)
    call_node = np.empty(N, dtype=np.int64)
    call_it = np.empty(N, dtype=np.int64)
    sp = 0
    counter = 0
    for root in range(N):
        if not seen[root] or index[root] >= 0:
            continue
        depth = 0
        call_node[0] = root
        call_it[0] = 0
        index[root] = counter
        low[root] = counter
        counter += 1
        scc_stack[sp] = root
        sp += 1
        onstack[root] = True
        while depth >= 0:
            v = call_node[depth]
            i = v // Q
            q = v % Q
            ni = i + 1 if i + 1 < L else loop_start
            k = succ_ptr[q] + call_it[depth]
            descended = False
            while k < succ_ptr[q + 1]:
                q2 = succ_idx[k]
                k += 1
                if not ok[q2, ni]:
                    continue
                w = ni * Q + q2
                if index[w] < 0:
                    call_it[depth] = k - succ_ptr[q]
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    scc_stack[sp] = w
                    sp += 1
                    onstack[w] = True
                    depth += 1
                    call_node[depth] = w
                    call_it[depth] = 0
                    descended = True
                    break
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            if low[v] == index[v]:
                # pop the component; accept if it is cyclic and covers all sets
                mask = 0
                size = 0
                self_loop = False
                while True:
                    sp -= 1
                    w = scc_stack[sp]
                    onstack[w] = False
                    size += 1
                    wi = w // Q
                    wq = w % Q
                    mask |= acc_state[wq] | acc_pos[wi]
                    wni = wi + 1 if wi + 1 < L else loop_start
                    if wni == wi:
                        for kk in range(succ_ptr[wq], succ_ptr[wq + 1]):
                            if succ_idx[kk] == wq and ok[wq, wi]:
                                self_loop = True
                    if w == v:
                        break
                if (size > 1 or self_loop) and (mask & full) == full:
                    return True
            depth -= 1
            if depth >= 0:
                u = call_node[depth]
                if low[v] < low[u]:
                    low[u] = low[v]
    return False


def _lasso_accepts_batch(words, loop_start, allowed, acc_state, acc_letter, n_sets, succ_ptr, succ_idx, init):
    """Vector of verdicts for many lassos over a finite alphabet.

    ``words[k, i]`` is a letter code; ``allowed[q, a]`` and ``acc_letter[a]``
    give label truth and letter acceptance masks per letter code.
    """
    K = words.shape[0]
    L = words.shape[1]
    Q = allowed.shape[0]
    out = np.zeros(K, dtype=np.bool_)
    ok = np.zeros((Q, L), dtype=np.bool_)
    acc_pos = np.zeros(L, dtype=np.int64)
    for k in range(K):
        for i in range(L):
            a = words[k, i]
            acc_pos[i] = acc_letter[a]
            for q in range(Q):
                ok[q, i] = allowed[q, a]
        out[k] = lasso_accepts(ok, acc_state, acc_pos, n_sets, succ_ptr, succ_idx, init, loop_start)
    return out


lasso_accepts_py = _lasso_accepts
lasso_accepts = _jit.njit(_lasso_accepts)
lasso_accepts_batch = _jit.njit(_lasso_accepts_batch)
