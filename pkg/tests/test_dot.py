import re

from flowmc.dot import export_dot, graph_to_dot, net_to_dot
from flowmc.ltlmc import build_state_graph
from flowmc.net import PetriNet


def nodes(dot, shape):
    return re.findall(rf'^  "([^"]+)" \[shape={shape}', dot, re.M)


def test_airport_node_counts(airport):
    dot = net_to_dot(airport)
    assert dot.startswith("digraph ") and dot.rstrip().endswith("}")
    assert len(nodes(dot, "circle")) == 7
    assert len(nodes(dot, "box")) == 7


def test_marked_places_and_transits(airport):
    dot = net_to_dot(airport)
    for p in airport.net.places:
        line = next(l for l in dot.splitlines() if l.startswith(f'  "p:{p}" [shape=circle'))
        assert ("style=bold" in line) == (p in airport.net.initial)
    assert 'label=">"' in dot
    assert dot.count("style=dashed") == airport.transit_count()


def test_empty_net():
    dot = net_to_dot(PetriNet.build([], []))
    assert dot.splitlines()[0].startswith("digraph") and dot.rstrip().endswith("}")
    assert "->" not in dot


def test_deterministic(airport, tmp_path):
    a, b = tmp_path / "a.dot", tmp_path / "b.dot"
    text = export_dot(airport, str(a))
    export_dot(airport, str(b))
    assert a.read_bytes() == b.read_bytes() == text.encode()


def test_inhibitor_arcs_and_quoting():
    net = PetriNet.build(['p"x', "q"], ["t"], [("q", "t")], inhibitor_arcs=[('p"x', "t")], initial=["q"])
    dot = net_to_dot(net)
    assert "arrowhead=odot" in dot
    assert '"p:p\\"x"' in dot


def test_state_graph(airport):
    g = build_state_graph(airport.net)
    dot = graph_to_dot(g)
    assert dot.count(" -> ") == g.num_edges
