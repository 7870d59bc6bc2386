import random

import pytest
from _gen import cycle_network

from flowmc.errors import InputError, ParseError
from flowmc.formulas import (
    PLACE,
    TRANSITION,
    TRUE,
    Always,
    Atom,
    Eventually,
    FlowSub,
    Implies,
    conj,
    render,
)
from flowmc.ltlmc import build_state_graph
from flowmc.net import START, PetriNet
from flowmc.netio import dump_net
from flowmc.sdn import (
    PROPERTIES,
    Parallel,
    Sequential,
    SwitchUpdate,
    dump_network,
    encode_network,
    final_forwarding,
    gen_fairness,
    gen_property,
    parse_network,
    parse_update,
    reachable_switches,
)

DIAMOND = """[switches] s1 s2 s3 s4
[connections]
s1 - s2
s2 - s4
s1 - s3
s3 - s4
[ingress] s1
[egress] s4
[forwarding]
s1.fwd(s2)
s2.fwd(s4)
[update] {update}
"""
THREE_STEP = "(upd(s3.fwd(s4/-)) >> upd(s1.fwd(s3/s2)) >> upd(s2.fwd(-/s4)))"


def diamond(update=THREE_STEP):
    return parse_network(DIAMOND.format(update=update))


def test_parse_switch_update():
    assert parse_update("upd(s1.fwd(s3/s2))") == SwitchUpdate("s1", "s3", "s2")
    assert parse_update("upd(s3.fwd(s4/-))") == SwitchUpdate("s3", "s4", None)


def test_parse_nested_update():
    u1, u2, u3 = (SwitchUpdate(f"s{k}", "x", None) for k in (1, 2, 3))
    got = parse_update("(upd(s1.fwd(x/-)) >> (upd(s2.fwd(x/-)) || upd(s3.fwd(x/-))))")
    assert got == Sequential((u1, Parallel((u2, u3))))


def test_parse_none_update():
    assert parse_update("none") is None
    assert diamond("none").update is None


@pytest.mark.parametrize(
    "update",
    ["upd(s1.fwd(-/-))", "upd(s9.fwd(s2/-))", "upd(s1.fwd(s4/-))", "(upd(s1.fwd(s3/s2)) >> ", "upd(s1.fwd(s3/s2)) || x"],
)
def test_bad_updates(update):
    with pytest.raises(InputError):
        diamond(update)


@pytest.mark.parametrize(
    "text",
    [
        "[switches] a b\n[connections]\na - c\n",
        "[switches] a b\n[connections]\na - b\n[forwarding]\nb.fwd(c)\n",
        "[switches] a b\n[connections]\na b\n",
        "[switches] a b\n[ingress] z\n",
        "[switches] a b c\n[connections]\na - b\na - c\n[forwarding]\na.fwd(b)\na.fwd(c)\n",
        "[bogus] x\n",
    ],
)
def test_bad_networks(text):
    with pytest.raises(InputError):
        parse_network(text)


def test_parse_error_location():
    with pytest.raises(ParseError) as exc:
        parse_network("[switches] a b\n[connections]\na b\n")
    assert exc.value.line == 3


def test_diamond_data_plane_counts():
    pnwt = encode_network(diamond("none"))
    net = pnwt.net
    assert [p for p in net.places if ".fwd(" not in p] == ["s1", "s2", "s3", "s4"]
    fwd = [p for p in net.places if ".fwd(" in p]
    assert len(fwd) == 8 and sorted(p for p in fwd if p in net.initial) == ["s1.fwd(s2)", "s2.fwd(s4)"]
    assert [t for t in net.transitions if t.startswith("i_")] == ["i_s1"]
    assert len([t for t in net.transitions if t.startswith("(")]) == 8
    assert pnwt.transits["i_s1"] == ((START, "s1"), ("s1", "s1"))
    assert pnwt.transits["(s1,s2)"] == (("s1", "s2"), ("s2", "s2"))
    assert net.pre["(s1,s2)"] == net.post["(s1,s2)"] == {"s1", "s2", "s1.fwd(s2)"}


def test_diamond_control_plane_counts():
    full = encode_network(diamond()).net
    data = encode_network(diamond("none")).net
    extra_p = [p for p in full.places if p not in data.places]
    extra_t = [t for t in full.transitions if t not in data.transitions]
    assert len(extra_p) == 3 * 2 + 2
    assert len([t for t in extra_t if t.startswith("u")]) == 3
    assert len([t for t in extra_t if t.startswith("seq")]) == 4
    assert "seq1_s" in full.initial


def test_update_arcs():
    net = encode_network(diamond()).net
    assert net.pre["u2"] == {"u2_s", "s1.fwd(s2)"} and net.post["u2"] == {"u2_f", "s1.fwd(s3)"}
    assert net.pre["u3"] == {"u3_s", "s2.fwd(s4)"} and net.post["u3"] == {"u3_f"}
    assert net.pre["seq1_0"] == {"seq1_s"} and net.post["seq1_0"] == {"u1_s"}
    assert net.pre["seq1_3"] == {"u3_f"} and net.post["seq1_3"] == {"seq1_f"}


def test_parallel_fork_join_and_token_count():
    spec = diamond("(upd(s3.fwd(s4/-)) || upd(s1.fwd(s3/s2)))")
    net = encode_network(spec).net
    assert net.post["par1_open"] == {"u1_s", "u2_s"}
    assert net.pre["par1_close"] == {"u1_f", "u2_f"}
    graph = build_state_graph(net)
    control = {p for p in net.places if p.startswith(("u", "par"))}
    finished = [graph.marking(s) for s in range(graph.num_states) if "par1_f" in graph.marking(s)]
    assert finished and all(len(m & control) == 1 for m in finished)


def test_data_plane_never_moves_tokens():
    net = encode_network(diamond()).net
    for t in net.transitions:
        if t.startswith(("i_", "(")):
            assert net.pre[t] == net.post[t]


def test_switches_always_marked():
    net = encode_network(diamond()).net
    graph = build_state_graph(net)
    for s in range(graph.num_states):
        assert {"s1", "s2", "s3", "s4"} <= graph.marking(s)


def test_encoding_is_byte_stable():
    assert dump_net(encode_network(diamond())) == dump_net(encode_network(diamond()))


def test_final_forwarding():
    assert final_forwarding(diamond()) == {("s3", "s4"), ("s1", "s3")}
    assert final_forwarding(diamond("none")) == {("s1", "s2"), ("s2", "s4")}
    with pytest.raises(InputError):
        final_forwarding(diamond("upd(s3.fwd(s4/s1))"))
    with pytest.raises(InputError):
        final_forwarding(diamond("(upd(s1.fwd(s3/s2)) || upd(s1.fwd(-/s2)))"))


def test_fairness_formula():
    spec = diamond()
    pnwt = encode_network(spec)
    f = gen_fairness(pnwt)
    assert len(f.args) == len(pnwt.net.transitions)
    pre = conj(Atom(p, PLACE) for p in sorted({"s1", "s2", "s1.fwd(s2)"}))
    assert Implies(Eventually(Always(pre)), Always(Eventually(Atom("(s1,s2)", TRANSITION)))) in f.args


def test_fairness_empty_preset():
    net = PetriNet.build(["p"], ["t"], [("t", "p")])
    assert gen_fairness(net) == Implies(Eventually(Always(TRUE)), Always(Eventually(Atom("t", TRANSITION))))


def test_properties():
    spec = diamond()
    assert render(gen_property(spec, "connectivity")) == "A (F s4)"
    drop = gen_property(spec, "drop")
    assert isinstance(drop, FlowSub)
    assert render(drop).startswith('A (G (!s4 -> "(s1,s2)" || "(s2,s1)" ||')
    assert render(drop).count('"(') == 8
    coh = render(gen_property(spec, "coherence"))
    assert coh == "A (G (s1 || s2 || s4) || G (s1 || s3 || s4))"
    with pytest.raises(InputError):
        gen_property(spec, "latency")


def test_loop_property_with_only_egress():
    spec = parse_network("[switches] a\n[egress] a\n")
    assert gen_property(spec, "loop") == FlowSub(Always(TRUE))


def test_reachable_switches():
    spec = diamond()
    assert reachable_switches(spec, spec.forwarding) == ["s1", "s2", "s4"]


def test_round_trip():
    for text in (DIAMOND.format(update=THREE_STEP), DIAMOND.format(update="none")):
        spec = parse_network(text)
        out = dump_network(spec)
        assert parse_network(out) == spec and dump_network(parse_network(out)) == out
    rng = random.Random(2)
    for _ in range(20):
        spec = cycle_network(rng.randint(3, 8), rng)[0]
        assert parse_network(dump_network(spec)) == spec


def test_properties_listed():
    assert PROPERTIES == ("connectivity", "coherence", "drop", "loop")
