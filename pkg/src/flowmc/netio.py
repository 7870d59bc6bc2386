"""Line-based text format for nets, nets with inhibitor arcs and nets with transits.

::

    [net] airport
    [places] airport queue terminal
    [initial] airport
    [transitions] start en
    [arcs]
    airport -> start
    start -> airport
    [inhibitors]
    queue -o start
    [transits]
    start: > -> airport
    start: airport -> airport
    [labels]
    start__c0 = start

Everything after ``#`` on a line is a comment.  List sections accept
their items on the header line and on any following lines.
"""

from __future__ import annotations

from .errors import InputError, NetStructureError, ParseError
from .net import START, PetriNet, PetriNetWithTransits

_SECTIONS = ("net", "places", "initial", "transitions", "arcs", "inhibitors", "transits", "labels")
_LIST_SECTIONS = ("net", "places", "initial", "transitions")


def _sections(text: str) -> dict[str, list[tuple[int, str]]]:
    found: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            if close < 0:
                raise ParseError("unterminated section header", lineno, 1)
            name = line[1:close].strip().lower()
            if name not in _SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, 1)
            if name in found:
                raise ParseError(f"section [{name}] appears twice", lineno, 1)
            current = name
            found[name] = []
            rest = line[close + 1:].strip()
            if rest:
                found[name].append((lineno, rest))
            continue
        if current is None:
            raise ParseError("content before the first section header", lineno, 1)
        found[current].append((lineno, line))
    return found


def _words(entries):
    return [w for _, line in entries for w in line.split()]


def _parse_pair(line, lineno, sep):
    parts = line.split()
    if len(parts) != 3 or parts[1] != sep:
        raise ParseError(f"expected '<a> {sep} <b>', got {line!r}", lineno, 1)
    return parts[0], parts[2]


def _parse(text: str):
    sec = _sections(text)
    names = _words(sec.get("net", []))
    if len(names) > 1:
        raise ParseError("[net] takes exactly one name", sec["net"][0][0], 1)
    name = names[0] if names else "net"
    places = _words(sec.get("places", []))
    transitions = _words(sec.get("transitions", []))
    initial = _words(sec.get("initial", []))
    if len(set(initial)) != len(initial):
        raise InputError("a place is listed twice in [initial] (nets are safe)")
    arcs = [_parse_pair(line, n, "->") for n, line in sec.get("arcs", [])]
    inhibitors = [_parse_pair(line, n, "-o") for n, line in sec.get("inhibitors", [])]
    transits = []
    for n, line in sec.get("transits", []):
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"expected '<t>: <p> -> <q>', got {line!r}", n, 1)
        src, tgt = _parse_pair(rest.strip(), n, "->")
        transits.append((head.strip(), src, tgt))
    labels = None
    if "labels" in sec:
        labels = {}
        for n, line in sec["labels"]:
            t, lab = _parse_pair(line, n, "=")
            if t in labels:
                raise ParseError(f"transition {t!r} labelled twice", n, 1)
            labels[t] = lab
    net = PetriNet.build(places, transitions, arcs, inhibitors, initial, labels=labels, name=name)
    return net, transits, "transits" in sec


def load_net(text: str) -> PetriNet:
    """Parse a net, ignoring any transit section."""
    net, _, _ = _parse(text)
    return net


def load_pnwt(text: str) -> PetriNetWithTransits:
    net, transits, _ = _parse(text)
    return PetriNetWithTransits.build(net, transits)


def load_any(text: str) -> PetriNet | PetriNetWithTransits:
    """A net with transits if the text has a transit section, else a plain net."""
    net, transits, has_transits = _parse(text)
    if has_transits:
        return PetriNetWithTransits.build(net, transits)
    return net


def _header(name, items):
    return f"[{name}] " + " ".join(items) if items else f"[{name}]"


def dump_net(obj: PetriNet | PetriNetWithTransits) -> str:
    """Canonical text of a net; ``load`` followed by ``dump`` is byte-stable."""
    pnwt = obj if isinstance(obj, PetriNetWithTransits) else None
    net = pnwt.net if pnwt is not None else obj
    if not isinstance(net, PetriNet):
        raise NetStructureError(f"cannot serialise {type(obj).__name__}")
    pidx = {p: i for i, p in enumerate(net.places)}
    lines = [
        f"[net] {net.name}",
        _header("places", net.places),
        _header("initial", sorted(net.initial, key=pidx.__getitem__)),
        _header("transitions", net.transitions),
        "[arcs]",
    ]
    lines += [f"{a} -> {b}" for a, b in net.arcs()]
    inh = net.inhibitor_arcs()
    if inh:
        lines.append("[inhibitors]")
        lines += [f"{p} -o {t}" for p, t in inh]
    if pnwt is not None:
        lines.append("[transits]")
        for t in net.transitions:
            lines += [f"{t}: {src} -> {tgt}" for src, tgt in pnwt.transits[t]]
    if net.labels is not None:
        lines.append("[labels]")
        lines += [f"{t} = {net.labels[t]}" for t in net.transitions]
    return "\n".join(lines) + "\n"


__all__ = ["load_net", "load_pnwt", "load_any", "dump_net", "START"]
