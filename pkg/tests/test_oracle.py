import random

import pytest
from _gen import differential_instance

from flowmc.errors import BudgetExceeded
from flowmc.formulas import TRUE, parse_flow_ltl, parse_ltl
from flowmc.ltlmc import build_state_graph
from flowmc.net import Lasso, PetriNet, PetriNetWithTransits, Step
from flowmc.oracle import (
    brute_force_check,
    enumerate_lassos,
    eval_flow_ltl_on_lasso,
    eval_flow_on_lasso,
    eval_ltl_on_lasso,
    flow_chain_traces,
)


@pytest.fixture
def start_loop(airport):
    return Lasso((), (Step(airport.net.initial, "start"),))


def single_net():
    net = PetriNet.build(["p", "q"], ["t"], [("p", "t"), ("t", "q")], initial=["p"])
    return PetriNetWithTransits.build(net, {"t": [("p", "q")]})


def born_net():
    # t starts a chain in q, which u then moves to r
    net = PetriNet.build(["p", "q", "r"], ["t", "u"], [("p", "t"), ("t", "q"), ("q", "u"), ("u", "r")], initial=["p"])
    return PetriNetWithTransits.build(net, {"t": [(">", "q")], "u": [("q", "r")]})


def test_ltl_on_start_loop(start_loop):
    assert eval_ltl_on_lasso(parse_ltl("G airport"), start_loop)
    assert not eval_ltl_on_lasso(parse_ltl("F cp1"), start_loop)
    assert eval_ltl_on_lasso(TRUE, start_loop)


def test_ltl_positions_and_loop():
    a, b = Step(frozenset({"p"}), None), Step(frozenset(), None)
    lasso = Lasso((a,), (b, a))
    assert eval_ltl_on_lasso(parse_ltl("p && X !p && X X p"), lasso)
    assert eval_ltl_on_lasso(parse_ltl("G F p && G F !p"), lasso)
    assert not eval_ltl_on_lasso(parse_ltl("F G p"), lasso)
    assert eval_ltl_on_lasso(parse_ltl("!p R true"), lasso)
    assert eval_ltl_on_lasso(parse_ltl("(p || !p) W false"), lasso)


def test_flow_on_start_loop(airport, start_loop):
    phi = parse_flow_ltl("A (airport -> F terminal)")
    assert not eval_flow_on_lasso(airport, start_loop, phi)


def test_no_transits_is_vacuous():
    pnwt = PetriNetWithTransits.build(single_net().net, {})
    lasso = Lasso((Step(frozenset({"p"}), "t"),), (Step(frozenset({"q"}), None),))
    assert eval_flow_on_lasso(pnwt, lasso, parse_flow_ltl("A false"))


def test_chain_p_q_reaches_q():
    lasso = Lasso((Step(frozenset({"p"}), "t"),), (Step(frozenset({"q"}), None),))
    assert eval_flow_on_lasso(single_net(), lasso, parse_flow_ltl("A F q"))


def test_born_chain_trace():
    pnwt = born_net()
    lasso = Lasso((Step(frozenset({"p"}), "t"), Step(frozenset({"q"}), "u")), (Step(frozenset({"r"}), None),))
    traces = flow_chain_traces(pnwt, lasso)
    assert [tr.letters for tr in traces] == [(("q", "u"), ("r", None))]
    assert eval_flow_on_lasso(pnwt, lasso, parse_flow_ltl("A (q && X G r)"))
    assert not eval_flow_on_lasso(pnwt, lasso, parse_flow_ltl("A G q"))
    # chains do not exist before they are born
    assert eval_flow_on_lasso(pnwt, lasso, parse_flow_ltl("A !p"))


def test_run_part_and_flow_part():
    pnwt = born_net()
    lasso = Lasso((Step(frozenset({"p"}), "t"), Step(frozenset({"q"}), "u")), (Step(frozenset({"r"}), None),))
    assert eval_flow_ltl_on_lasso(pnwt, parse_flow_ltl("F r && A F r"), lasso)
    assert not eval_flow_ltl_on_lasso(pnwt, parse_flow_ltl("F r -> A G q"), lasso)
    assert eval_flow_ltl_on_lasso(pnwt, parse_flow_ltl("p || A G q"), lasso)


def test_brute_force_examples(airport):
    v = brute_force_check(airport, parse_flow_ltl("A (airport -> F terminal)"), 4)
    assert v.violated and v.name == "VIOLATED"
    assert not eval_flow_ltl_on_lasso(airport, parse_flow_ltl("A (airport -> F terminal)"), v.lasso)
    assert brute_force_check(airport, TRUE, 4).name == "BOUNDED-HOLDS"
    assert brute_force_check(single_net(), parse_flow_ltl("A F q"), 3).name == "BOUNDED-HOLDS"


def test_enumerate_lassos_counts():
    # one state with one self-loop: a lasso per (length, loop start)
    net = PetriNet.build(["p"], ["t"], [("p", "t"), ("t", "p")], initial=["p"])
    g = build_state_graph(net)
    assert sum(1 for _ in enumerate_lassos(g, 4)) == 1 + 2 + 3 + 4
    with pytest.raises(BudgetExceeded):
        list(enumerate_lassos(g, 4, max_lassos=5))


def test_batched_check_matches_direct_evaluation():
    # brute_force_check groups and memoizes; the direct evaluator does neither
    rng = random.Random(99)
    for _ in range(25):
        pnwt, phi = differential_instance(rng, bound=5, max_lassos=3000)
        g = build_state_graph(pnwt.net)
        first = None
        for edges, k in enumerate_lassos(g, 5):
            steps = [Step(g.marking(int(g.src[e])), g.transition(e)) for e in edges]
            lasso = Lasso(tuple(steps[:k]), tuple(steps[k:]))
            if not eval_flow_ltl_on_lasso(pnwt, phi, lasso):
                first = lasso
                break
        v = brute_force_check(pnwt, phi, 5)
        assert v.violated == (first is not None)
        assert v.lasso == first
