"""Software-defined network updates as Petri nets with transits.

A network file lists the topology, the ingress and egress switches, the
initial forwarding table and a concurrent update::

    [switches] s1 s2 s3 s4
    [connections]
    s1 - s2
    s2 - s4
    [ingress] s1
    [egress] s4
    [forwarding]
    s1.fwd(s2)
    [update]
    (upd(s3.fwd(s4/-)) >> (upd(s1.fwd(s3/s2)) || upd(s2.fwd(-/s4))))

``>>`` composes updates sequentially, ``||`` in parallel; ``-`` stands for
no rule.  The word ``none`` denotes the empty update.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError, ParseError
from .formulas import (
    PLACE,
    TRANSITION,
    Always,
    Atom,
    Eventually,
    FlowSub,
    Formula,
    Implies,
    Not,
    Or,
    Until,
    conj,
    disj,
)
from .net import START, PetriNet, PetriNetWithTransits

_SWITCH = re.compile(r"[A-Za-z0-9_]+")
_SECTIONS = ("switches", "connections", "ingress", "egress", "forwarding", "update")
_RULE = re.compile(r"\s*([A-Za-z0-9_]+)\s*\.\s*fwd\s*\(\s*([A-Za-z0-9_]+)\s*\)\s*")

PROPERTIES = ("connectivity", "coherence", "drop", "loop")


# -- data --------------------------------------------------------------------


@dataclass(frozen=True)
class SwitchUpdate:
    """Replace rule ``switch.fwd(old)`` by ``switch.fwd(new)``; either may be None."""

    switch: str
    new: str | None
    old: str | None


@dataclass(frozen=True)
class Sequential:
    parts: tuple


@dataclass(frozen=True)
class Parallel:
    parts: tuple


UpdateExpr = SwitchUpdate | Sequential | Parallel


@dataclass(frozen=True)
class NetworkSpec:
    switches: tuple[str, ...]
    connections: tuple[tuple[str, str], ...]
    ingress: tuple[str, ...]
    egress: tuple[str, ...]
    forwarding: tuple[tuple[str, str], ...]
    update: UpdateExpr | None = None

    def directed_connections(self) -> list[tuple[str, str]]:
        out = []
        for a, b in self.connections:
            out += [(a, b), (b, a)]
        return out

    def is_connected(self, a: str, b: str) -> bool:
        return (a, b) in self.connections or (b, a) in self.connections


def fwd_place(x: str, y: str) -> str:
    return f"{x}.fwd({y})"


def connection_transition(x: str, y: str) -> str:
    return f"({x},{y})"


def ingress_transition(s: str) -> str:
    return f"i_{s}"


# -- parsing -----------------------------------------------------------------


class _UpdateParser:
    def __init__(self, text: str, line: int):
        self.text = text
        self.pos = 0
        self.line = line

    def error(self, msg):
        raise ParseError(msg, self.line, self.pos + 1)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eat(self, tok):
        self.skip()
        if self.text.startswith(tok, self.pos):
            self.pos += len(tok)
            return True
        return False

    def expect(self, tok):
        if not self.eat(tok):
            self.error(f"expected {tok!r}")

    def name(self):
        self.skip()
        m = _SWITCH.match(self.text, self.pos)
        if not m:
            self.error("expected a switch name")
        self.pos = m.end()
        return m.group()

    def target(self):
        if self.eat("-"):
            return None
        return self.name()

    def parse(self):
        e = self.expr()
        self.skip()
        if self.pos != len(self.text):
            self.error("unexpected text after the update")
        return e

    def expr(self):
        self.skip()
        if self.eat("upd"):
            self.expect("(")
            x = self.name()
            self.expect(".")
            self.expect("fwd")
            self.expect("(")
            new = self.target()
            self.expect("/")
            old = self.target()
            self.expect(")")
            self.expect(")")
            if new is None and old is None:
                self.error("a switch update needs a new or an old rule")
            return SwitchUpdate(x, new, old)
        if self.eat("("):
            parts = [self.expr()]
            op = None
            while True:
                if self.eat(")"):
                    break
                if self.eat(">>"):
                    this = ">>"
                elif self.eat("||"):
                    this = "||"
                else:
                    self.error("expected '>>', '||' or ')'")
                if op is not None and this != op:
                    self.error("mixing '>>' and '||' needs parentheses")
                op = this
                parts.append(self.expr())
            if op is None:
                return parts[0]
            return (Sequential if op == ">>" else Parallel)(tuple(parts))
        self.error("expected 'upd(...)' or '('")


def parse_update(text: str, line: int = 1) -> UpdateExpr | None:
    if text.strip() == "none":
        return None
    return _UpdateParser(text, line).parse()


def _sections(text):
    found = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            close = line.find("]")
            name = line[1:close].strip().lower() if close > 0 else ""
            if name not in _SECTIONS:
                raise ParseError(f"unknown section {line[:close + 1]!r}", lineno, 1)
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


def _switch_list(entries):
    out = []
    for lineno, line in entries:
        for w in line.split():
            if not _SWITCH.fullmatch(w):
                raise ParseError(f"invalid switch name {w!r}", lineno, 1)
            out.append(w)
    return out


def parse_network(text: str) -> NetworkSpec:
    sec = _sections(text)
    switches = _switch_list(sec.get("switches", []))
    connections = []
    for lineno, line in sec.get("connections", []):
        parts = line.split()
        if len(parts) != 3 or parts[1] != "-":
            raise ParseError(f"expected '<a> - <b>', got {line!r}", lineno, 1)
        connections.append((parts[0], parts[2]))
    forwarding = []
    for lineno, line in sec.get("forwarding", []):
        for chunk in line.split():
            m = _RULE.fullmatch(chunk)
            if not m:
                raise ParseError(f"expected '<x>.fwd(<y>)', got {chunk!r}", lineno, 1)
            forwarding.append((m.group(1), m.group(2)))
    upd_entries = sec.get("update", [])
    update = None
    if upd_entries:
        update = parse_update(" ".join(line for _, line in upd_entries), upd_entries[0][0])
    spec = NetworkSpec(
        switches=tuple(switches),
        connections=tuple(connections),
        ingress=tuple(_switch_list(sec.get("ingress", []))),
        egress=tuple(_switch_list(sec.get("egress", []))),
        forwarding=tuple(forwarding),
        update=update,
    )
    validate(spec)
    return spec


def _walk_updates(u):
    if u is None:
        return
    stack = [u]
    while stack:
        node = stack.pop()
        yield node
        if not isinstance(node, SwitchUpdate):
            stack.extend(reversed(node.parts))


def validate(spec: NetworkSpec) -> None:
    sw = set(spec.switches)
    if len(sw) != len(spec.switches):
        raise InputError("a switch is declared twice")

    def known(s, what):
        if s not in sw:
            raise InputError(f"unknown switch {s!r} in {what}")

    seen = set()
    for a, b in spec.connections:
        known(a, "connections")
        known(b, "connections")
        if a == b:
            raise InputError(f"self-connection {a} - {b}")
        key = frozenset((a, b))
        if key in seen:
            raise InputError(f"connection {a} - {b} listed twice")
        seen.add(key)
    for s in spec.ingress:
        known(s, "[ingress]")
    for s in spec.egress:
        known(s, "[egress]")
    sources = set()
    for x, y in spec.forwarding:
        known(x, "[forwarding]")
        known(y, "[forwarding]")
        if not spec.is_connected(x, y):
            raise InputError(f"rule {fwd_place(x, y)} has no matching connection")
        if x in sources:
            raise InputError(f"switch {x!r} has more than one forwarding rule")
        sources.add(x)
    for node in _walk_updates(spec.update):
        if isinstance(node, SwitchUpdate):
            known(node.switch, "[update]")
            for y in (node.new, node.old):
                if y is not None:
                    known(y, "[update]")
                    if not spec.is_connected(node.switch, y):
                        raise InputError(f"update rule {fwd_place(node.switch, y)} has no matching connection")


def render_update(u: UpdateExpr | None) -> str:
    if u is None:
        return "none"
    if isinstance(u, SwitchUpdate):
        return f"upd({u.switch}.fwd({u.new or '-'}/{u.old or '-'}))"
    sep = " >> " if isinstance(u, Sequential) else " || "
    return "(" + sep.join(render_update(p) for p in u.parts) + ")"


def dump_network(spec: NetworkSpec) -> str:
    """Canonical text; parsing it gives back ``spec``."""
    lines = ["[switches] " + " ".join(spec.switches), "[connections]"]
    lines += [f"{a} - {b}" for a, b in spec.connections]
    lines.append(("[ingress] " + " ".join(spec.ingress)).rstrip())
    lines.append(("[egress] " + " ".join(spec.egress)).rstrip())
    lines.append("[forwarding]")
    lines += [fwd_place(x, y) for x, y in spec.forwarding]
    lines.append("[update] " + render_update(spec.update))
    return "\n".join(lines) + "\n"


# -- encoding ----------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.places: list[str] = []
        self.transitions: list[str] = []
        self.arcs: list[tuple[str, str]] = []
        self.transits: list[tuple[str, str, str]] = []
        self.initial: set[str] = set()
        self.counters = {"u": 0, "seq": 0, "par": 0}

    def place(self, p, marked=False):
        self.places.append(p)
        if marked:
            self.initial.add(p)
        return p

    def transition(self, t, pre, post):
        self.transitions.append(t)
        self.arcs += [(p, t) for p in pre]
        self.arcs += [(t, p) for p in post]
        return t

    def fresh(self, kind):
        self.counters[kind] += 1
        return f"{kind}{self.counters[kind]}"

    def update(self, u) -> tuple[str, str]:
        """Encode an update subtree; returns its (start, finish) places."""
        if isinstance(u, SwitchUpdate):
            name = self.fresh("u")
            s, f = self.place(f"{name}_s"), self.place(f"{name}_f")
            pre = [s] + ([fwd_place(u.switch, u.old)] if u.old else [])
            post = [f] + ([fwd_place(u.switch, u.new)] if u.new else [])
            self.transition(name, pre, post)
            return s, f
        kind = "seq" if isinstance(u, Sequential) else "par"
        name = self.fresh(kind)
        s, f = self.place(f"{name}_s"), self.place(f"{name}_f")
        children = [self.update(p) for p in u.parts]
        if kind == "seq":
            chain = [s] + [p for c in children for p in c] + [f]
            for k in range(len(children) + 1):
                self.transition(f"{name}_{k}", [chain[2 * k]], [chain[2 * k + 1]])
        else:
            self.transition(f"{name}_open", [s], [c[0] for c in children])
            self.transition(f"{name}_close", [c[1] for c in children], [f])
        return s, f


def encode_network(spec: NetworkSpec) -> PetriNetWithTransits:
    """Data plane (switches, rules, packet flow) plus control plane (update)."""
    b = _Builder()
    rules = set(spec.forwarding)
    for s in spec.switches:
        b.place(s, marked=True)
    for s in spec.ingress:
        t = b.transition(ingress_transition(s), [s], [s])
        b.transits += [(t, START, s), (t, s, s)]
    for x, y in spec.directed_connections():
        fp = b.place(fwd_place(x, y), marked=(x, y) in rules)
        t = b.transition(connection_transition(x, y), [x, y, fp], [x, y, fp])
        b.transits += [(t, x, y), (t, y, y)]
    if spec.update is not None:
        start, _ = b.update(spec.update)
        b.initial.add(start)
    net = PetriNet.build(b.places, b.transitions, b.arcs, (), b.initial, name="sdn")
    return PetriNetWithTransits.build(net, b.transits)


def final_forwarding(spec: NetworkSpec) -> set[tuple[str, str]]:
    """The forwarding table after the whole update has been applied."""
    table = set(spec.forwarding)

    def touched(u):
        out = set()
        for node in _walk_updates(u):
            if isinstance(node, SwitchUpdate):
                out |= {(node.switch, y) for y in (node.new, node.old) if y}
        return out

    def apply(u):
        if isinstance(u, SwitchUpdate):
            if u.old is not None:
                if (u.switch, u.old) not in table:
                    raise InputError(f"update removes {fwd_place(u.switch, u.old)}, which is not installed")
                table.discard((u.switch, u.old))
            if u.new is not None:
                table.add((u.switch, u.new))
            return
        if isinstance(u, Parallel):
            seen = set()
            for p in u.parts:
                t = touched(p)
                if t & seen:
                    raise InputError("parallel updates write the same rule: " + ", ".join(fwd_place(*r) for r in sorted(t & seen)))
                seen |= t
        for p in u.parts:
            apply(p)

    if spec.update is not None:
        apply(spec.update)
    return table


# -- formulas ----------------------------------------------------------------


def gen_fairness(pnwt: PetriNetWithTransits | PetriNet) -> Formula:
    """Weak fairness for every transition: F G pre(t) -> G F t."""
    net = pnwt.net if isinstance(pnwt, PetriNetWithTransits) else pnwt
    parts = []
    for t in net.transitions:
        pre = conj(Atom(p, PLACE) for p in sorted(net.pre[t]))
        parts.append(Implies(Eventually(Always(pre)), Always(Eventually(Atom(t, TRANSITION)))))
    return conj(parts)


def reachable_switches(spec: NetworkSpec, table) -> list[str]:
    """Ingress switches plus every switch reached by following ``table``."""
    nxt: dict[str, list[str]] = {}
    for x, y in sorted(table):
        nxt.setdefault(x, []).append(y)
    seen = list(dict.fromkeys(spec.ingress))
    k = 0
    while k < len(seen):
        for y in nxt.get(seen[k], []):
            if y not in seen:
                seen.append(y)
        k += 1
    order = {s: i for i, s in enumerate(spec.switches)}
    return sorted(seen, key=order.__getitem__)


def gen_property(spec: NetworkSpec, kind: str, pnwt: PetriNetWithTransits | None = None) -> Formula:
    """The flow formula of a standard network property."""
    sw = lambda s: Atom(s, PLACE)  # noqa: E731
    if kind == "connectivity":
        return FlowSub(Eventually(disj(sw(s) for s in spec.egress)))
    if kind == "coherence":
        init = reachable_switches(spec, spec.forwarding)
        fin = reachable_switches(spec, final_forwarding(spec))
        return FlowSub(Or((Always(disj(sw(s) for s in init)), Always(disj(sw(s) for s in fin)))))
    if kind == "drop":
        moving = disj(Atom(connection_transition(x, y), TRANSITION) for x, y in spec.directed_connections())
        return FlowSub(Always(Implies(conj(Not(sw(e)) for e in spec.egress), moving)))
    if kind == "loop":
        inner = [Implies(sw(s), Until(sw(s), Always(Not(sw(s))))) for s in spec.switches if s not in spec.egress]
        return FlowSub(Always(conj(inner)))
    raise InputError(f"unknown property {kind!r}; expected one of {', '.join(PROPERTIES)}")


def with_fairness(pnwt: PetriNetWithTransits, requirement: Formula) -> Formula:
    return Implies(gen_fairness(pnwt), requirement)
