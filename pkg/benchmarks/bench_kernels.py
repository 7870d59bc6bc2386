"""Compare the numba kernels with the numpy fallback.

Each path runs in its own interpreter because the choice is made at import
time from ``FLOWMC_DISABLE_NUMBA``.  Usage::

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _workload(repeat: int) -> dict:
    import itertools

    import numpy as np

    from flowmc import _jit
    from flowmc.formulas import parse_ltl, resolve_for
    from flowmc.ltlmc import build_state_graph, ltl_to_buchi
    from flowmc.net import PetriNet

    # k independent two-place cycles: 2**k reachable markings
    k = 12
    places = [f"{c}{i}" for i in range(k) for c in "ab"]
    trans = [f"{c}{i}" for i in range(k) for c in ("go", "back")]
    arcs = []
    for i in range(k):
        arcs += [(f"a{i}", f"go{i}"), (f"go{i}", f"b{i}"), (f"b{i}", f"back{i}"), (f"back{i}", f"a{i}")]
    net = PetriNet.build(places, trans, arcs, initial=[f"a{i}" for i in range(k)])

    build_state_graph(net)  # warm-up (compilation)
    t0 = time.perf_counter()
    for _ in range(repeat):
        g = build_state_graph(net)
    t_graph = (time.perf_counter() - t0) / repeat

    small = PetriNet.build(["p", "q"], ["t"])
    phi = resolve_for(parse_ltl("G F t -> (p U (q && X !t)) || G F (p && q)"), small)
    aut = ltl_to_buchi(phi)
    letters = [(frozenset(m), f) for m in ((), ("p",), ("q",), ("p", "q")) for f in ("t", None)]
    words = np.array(list(itertools.product(range(8), repeat=5)), dtype=np.int64)
    aut.accepts_batch(words[:10], 2, letters)
    t0 = time.perf_counter()
    for _ in range(repeat):
        for loop in range(5):
            aut.accepts_batch(words, loop, letters)
    t_lasso = (time.perf_counter() - t0) / repeat
    return {
        "numba": _jit.USE_NUMBA,
        "states": g.num_states,
        "edges": g.num_edges,
        "state_graph_s": t_graph,
        "lassos": 5 * len(words),
        "lasso_batch_s": t_lasso,
    }


def _run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["FLOWMC_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FLOWMC_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, __file__, "--child", "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    ).stdout
    return json.loads(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(_workload(args.repeat)))
        return
    fast, slow = _run(False, args.repeat), _run(True, args.repeat)
    print(f"state graph: {fast['states']} states, {fast['edges']} edges")
    print(f"lasso batch: {fast['lassos']} lassos")
    print(f"{'kernel':<14}{'numba' if fast['numba'] else 'numba (n/a)':>14}{'numpy':>14}{'speedup':>10}")
    for key, name in (("state_graph_s", "state graph"), ("lasso_batch_s", "lasso batch")):
        a, b = fast[key], slow[key]
        print(f"{name:<14}{a:>13.4f}s{b:>13.4f}s{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
