import json
import random

import pytest
from _gen import differential_instance

from flowmc.errors import InputError, UnsupportedError
from flowmc.formulas import Implies, parse_flow_ltl, parse_ltl, resolve_for
from flowmc.net import replay
from flowmc.oracle import eval_flow_ltl_on_lasso
from flowmc.pipeline import check_ltl, check_pnwt, check_sdn, sdn_formula
from flowmc.sdn import encode_network, gen_fairness


def test_violated_result_document(airport):
    res = check_pnwt(airport, parse_flow_ltl("A (airport -> F terminal)"))
    assert not res.holds and res.exit_code == 1
    doc = json.loads(res.to_json())
    assert set(doc) == {"schema", "verdict", "inputs", "stats", "counterexample"}
    assert doc["inputs"]["approach"] == "parallel"
    stats = doc["stats"]
    assert stats["reduced_places"] == 2 * 7 + 1 and stats["flow_subformulas"] == 1
    cex = doc["counterexample"]
    assert cex["loop"] and all(set(s) == {"marking", "fired"} for s in cex["prefix"] + cex["loop"])
    order = list(airport.net.places)
    for s in cex["prefix"] + cex["loop"]:
        assert s["marking"] == sorted(s["marking"], key=order.index)
    (chain,) = cex["flow_chains"]
    assert chain["subformula"] == 1 and chain["formula"] == "airport -> F terminal"
    # the chain never leaves the airport: start keeps moving it in place
    assert chain["chain"] == ["airport", "start"] and chain["loop"] == 0


def test_text_output(airport):
    text = check_pnwt(airport, parse_flow_ltl("A (airport -> F terminal)")).to_text()
    assert text.startswith("verdict: VIOLATED") and "loop:" in text and "flow 1" in text


def test_holds_has_no_counterexample(airport):
    res = check_pnwt(airport, parse_flow_ltl("A (airport -> G airport || F queue)"))
    doc = res.to_dict()
    assert res.exit_code == (0 if res.holds else 1)
    if res.holds:
        assert doc["counterexample"] is None


def test_approaches(airport):
    phi = parse_flow_ltl("A F terminal")
    with pytest.raises(UnsupportedError):
        check_pnwt(airport, phi, approach="sequential")
    with pytest.raises(InputError):
        check_pnwt(airport, phi, approach="quantum")


def test_check_ltl(airport):
    assert check_ltl(airport.net, parse_ltl("G !(cp1 && cp2)")).holds
    res = check_ltl(airport.net, parse_ltl("F cp1"))
    replay(airport.net, res.counterexample)
    with pytest.raises(InputError):
        check_ltl(airport.net, parse_flow_ltl("A F terminal"))


def test_sdn_formula(diamond_spec):
    pnwt = encode_network(diamond_spec)
    req = resolve_for(parse_flow_ltl("A F s4"), pnwt.net)
    assert sdn_formula(diamond_spec, pnwt, None, req, True) == Implies(gen_fairness(pnwt), req)
    with pytest.raises(InputError):
        sdn_formula(diamond_spec, pnwt, "connectivity", req, False)
    with pytest.raises(InputError):
        sdn_formula(diamond_spec, pnwt, None, None, False)


def test_sdn_checks(diamond_spec):
    assert check_sdn(diamond_spec, "connectivity", assume_fairness=True).holds
    res = check_sdn(diamond_spec, "connectivity")
    # without fairness the data plane may idle forever
    assert not res.holds and res.inputs["property"] == "connectivity"


def test_counterexamples_are_confirmed():
    rng = random.Random(8)
    seen = 0
    for _ in range(30):
        pnwt, phi = differential_instance(rng, bound=6, max_lassos=20_000)
        res = check_pnwt(pnwt, phi)
        if not res.holds:
            seen += 1
            assert not eval_flow_ltl_on_lasso(pnwt, phi, res.counterexample)
    assert seen >= 5
