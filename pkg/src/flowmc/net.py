"""Safe Petri nets (with inhibitor arcs), Petri nets with transits, and
their token game.

Markings are frozensets of place names.  Nets are immutable; every
operation here is a pure function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import (
    NetStructureError,
    NotEnabledError,
    SafenessError,
    UnknownTransitionError,
)

#: Source of a transit that creates a new flow chain.
START = ">"
#: ``fired`` value of a step taken in a deadlock.
STUTTER = None
#: Transition slot of a flow-chain history entry whose chain has ended.
END = "<end>"

Marking = frozenset

_NAME_RE = re.compile(r"[^\s#:]+")
_RESERVED = {"->", "-o", START}


def check_name(name: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.fullmatch(name) or name in _RESERVED:
        raise NetStructureError(f"invalid identifier {name!r}")
    return name


def _frozen(mapping):
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True, eq=False)
class PetriNet:
    """A safe P/T net with unit arc weights and optional inhibitor arcs.

    ``labels`` maps every transition to the name of the transition it
    simulates in some other net (used by the reduction); it is ``None`` for
    ordinary nets.
    """

    name: str
    places: tuple[str, ...]
    transitions: tuple[str, ...]
    pre: Mapping[str, frozenset]
    post: Mapping[str, frozenset]
    inhibitors: Mapping[str, frozenset]
    initial: frozenset
    labels: Mapping[str, str] | None = None
    _place_set: frozenset = field(default=frozenset(), repr=False)

    @classmethod
    def build(
        cls,
        places: Iterable[str],
        transitions: Iterable[str],
        arcs: Iterable[tuple[str, str]] = (),
        inhibitor_arcs: Iterable[tuple[str, str]] = (),
        initial: Iterable[str] = (),
        labels: Mapping[str, str] | None = None,
        name: str = "net",
    ) -> "PetriNet":
        places = tuple(places)
        transitions = tuple(transitions)
        for n in places + transitions:
            check_name(n)
        place_set = frozenset(places)
        trans_set = frozenset(transitions)
        if len(place_set) != len(places) or len(trans_set) != len(transitions):
            raise NetStructureError("duplicate node identifier")
        clash = place_set & trans_set
        if clash:
            raise NetStructureError(
                "identifiers used for both a place and a transition: " + ", ".join(sorted(clash))
            )

        pre = {t: set() for t in transitions}
        post = {t: set() for t in transitions}
        seen = set()
        for src, dst in arcs:
            if (src, dst) in seen:
                raise NetStructureError(f"duplicate arc {src} -> {dst} (arc weights are fixed at 1)")
            seen.add((src, dst))
            if src in place_set and dst in trans_set:
                pre[dst].add(src)
            elif src in trans_set and dst in place_set:
                post[src].add(dst)
            else:
                raise NetStructureError(f"arc {src} -> {dst} does not connect a declared place and transition")

        inh = {t: set() for t in transitions}
        seen = set()
        for p, t in inhibitor_arcs:
            if (p, t) in seen:
                raise NetStructureError(f"duplicate inhibitor arc {p} -o {t}")
            seen.add((p, t))
            if p not in place_set or t not in trans_set:
                raise NetStructureError(f"inhibitor arc {p} -o {t} references an undeclared node")
            inh[t].add(p)

        initial = frozenset(initial)
        if not initial <= place_set:
            raise NetStructureError("initial marking names undeclared places: " + ", ".join(sorted(initial - place_set)))

        if labels is not None:
            missing = trans_set - set(labels)
            if missing:
                raise NetStructureError("labelling is not total; unlabelled: " + ", ".join(sorted(missing)))
            labels = _frozen((t, labels[t]) for t in transitions)

        return cls(
            name=check_name(name) if name else "net",
            places=places,
            transitions=transitions,
            pre=_frozen((t, frozenset(v)) for t, v in pre.items()),
            post=_frozen((t, frozenset(v)) for t, v in post.items()),
            inhibitors=_frozen((t, frozenset(v)) for t, v in inh.items()),
            initial=initial,
            labels=labels,
            _place_set=place_set,
        )

    # -- structure ---------------------------------------------------------

    @property
    def place_set(self) -> frozenset:
        return self._place_set

    def arcs(self) -> list[tuple[str, str]]:
        """All flow arcs in a deterministic order (by transition, then place)."""
        pidx = {p: i for i, p in enumerate(self.places)}
        out = []
        for t in self.transitions:
            out.extend((p, t) for p in sorted(self.pre[t], key=pidx.__getitem__))
            out.extend((t, p) for p in sorted(self.post[t], key=pidx.__getitem__))
        return out

    def inhibitor_arcs(self) -> list[tuple[str, str]]:
        pidx = {p: i for i, p in enumerate(self.places)}
        return [
            (p, t) for t in self.transitions for p in sorted(self.inhibitors[t], key=pidx.__getitem__)
        ]

    def has_inhibitors(self) -> bool:
        return any(self.inhibitors[t] for t in self.transitions)

    def is_node(self, name: str) -> bool:
        return name in self._place_set or name in self.pre

    def __eq__(self, other):
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self.name == other.name
            and self.places == other.places
            and self.transitions == other.transitions
            and dict(self.pre) == dict(other.pre)
            and dict(self.post) == dict(other.post)
            and dict(self.inhibitors) == dict(other.inhibitors)
            and self.initial == other.initial
            and (dict(self.labels) if self.labels is not None else None)
            == (dict(other.labels) if other.labels is not None else None)
        )

    __hash__ = None

    # -- token game --------------------------------------------------------

    def _check(self, t):
        if t not in self.pre:
            raise UnknownTransitionError(f"unknown transition {t!r}")

    def enabled(self, marking: frozenset, t: str) -> bool:
        self._check(t)
        return self.pre[t] <= marking and not (self.inhibitors[t] & marking)

    def enabled_transitions(self, marking: frozenset) -> list[str]:
        return [t for t in self.transitions if self.pre[t] <= marking and not (self.inhibitors[t] & marking)]

    def fire(self, marking: frozenset, t: str) -> frozenset:
        if not self.enabled(marking, t):
            raise NotEnabledError(f"transition {t!r} is not enabled")
        rest = marking - self.pre[t]
        clash = rest & self.post[t]
        if clash:
            raise SafenessError(min(clash), t)
        return frozenset(rest | self.post[t])


def enabled(net: PetriNet, m: frozenset, t: str) -> bool:
    return net.enabled(m, t)


def fire(net: PetriNet, m: frozenset, t: str) -> frozenset:
    return net.fire(m, t)


# -- nets with transits ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PetriNetWithTransits:
    """A safe net plus, for every transition, its transit relation.

    ``transits[t]`` is a tuple of ``(source, target)`` pairs where source is
    a place of the preset or :data:`START`, and target is in the postset.
    """

    net: PetriNet
    transits: Mapping[str, tuple[tuple[str, str], ...]]

    @classmethod
    def build(cls, net: PetriNet, transits: Mapping[str, Iterable[tuple[str, str]]] | Iterable) -> "PetriNetWithTransits":
        if net.has_inhibitors() or net.labels is not None:
            raise NetStructureError("the net underlying a net with transits has no inhibitor arcs or labels")
        if not isinstance(transits, Mapping):
            grouped: dict[str, list] = {}
            for t, src, tgt in transits:
                grouped.setdefault(t, []).append((src, tgt))
            transits = grouped
        table = {t: [] for t in net.transitions}
        for t, pairs in transits.items():
            if t not in table:
                raise NetStructureError(f"transit for unknown transition {t!r}")
            for src, tgt in pairs:
                if (src, tgt) in table[t]:
                    raise NetStructureError(f"duplicate transit {t}: {src} -> {tgt}")
                if src != START and src not in net.pre[t]:
                    raise NetStructureError(f"transit {t}: {src} -> {tgt}: source is not in the preset of {t}")
                if tgt not in net.post[t]:
                    raise NetStructureError(f"transit {t}: {src} -> {tgt}: target is not in the postset of {t}")
                table[t].append((src, tgt))
        return cls(net=net, transits=_frozen((t, tuple(v)) for t, v in table.items()))

    def __eq__(self, other):
        if not isinstance(other, PetriNetWithTransits):
            return NotImplemented
        return self.net == other.net and dict(self.transits) == dict(other.transits)

    __hash__ = None

    def transit_count(self) -> int:
        return sum(len(v) for v in self.transits.values())

    def is_transit_complete(self) -> bool:
        """True iff every preset place of every transition has an outgoing transit."""
        for t in self.net.transitions:
            sources = {s for s, _ in self.transits[t]}
            if not self.net.pre[t] <= sources:
                return False
        return True


# -- runs and flow chains ----------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One position of a run: the marking before the step and what fired."""

    marking: frozenset
    fired: str | None

    @property
    def is_stutter(self) -> bool:
        return self.fired is STUTTER


@dataclass(frozen=True)
class Lasso:
    """An ultimately periodic run ``prefix . loop^omega``."""

    prefix: tuple[Step, ...]
    loop: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("the loop of a lasso must not be empty")

    @property
    def steps(self) -> tuple[Step, ...]:
        return self.prefix + self.loop

    def __len__(self):
        return len(self.prefix) + len(self.loop)

    def successor(self, i: int) -> int:
        return i + 1 if i + 1 < len(self) else len(self.prefix)

    def normalized(self) -> "Lasso":
        """The same word with the prefix rolled into the loop where possible
        and the loop reduced to its primitive period."""
        prefix, loop = list(self.prefix), list(self.loop)
        while prefix and prefix[-1] == loop[-1]:
            prefix.pop()
            loop.insert(0, loop.pop())
        n = len(loop)
        for d in range(1, n):
            if n % d == 0 and loop == loop[d:] + loop[:d]:
                loop = loop[:d]
                break
        return Lasso(tuple(prefix), tuple(loop))


def replay(net: PetriNet, lasso: Lasso, from_initial: bool = True) -> None:
    """Check that ``lasso`` is an interleaving-maximal run of ``net``.

    Raises ``ValueError`` describing the first mismatch.
    """
    steps = lasso.steps
    if from_initial and steps[0].marking != net.initial:
        raise ValueError("run does not start in the initial marking")
    for i, step in enumerate(steps):
        nxt = steps[lasso.successor(i)].marking
        if step.fired is STUTTER:
            if net.enabled_transitions(step.marking):
                raise ValueError(f"position {i}: stutter step although a transition is enabled")
            if nxt != step.marking:
                raise ValueError(f"position {i}: stutter step changes the marking")
            continue
        if not net.enabled(step.marking, step.fired):
            raise ValueError(f"position {i}: {step.fired!r} is not enabled")
        if net.fire(step.marking, step.fired) != nxt:
            raise ValueError(f"position {i}: firing {step.fired!r} does not reach the recorded marking")


@dataclass(frozen=True)
class FlowChain:
    """A flow chain: visited places and the transitions that moved it.

    ``len(transitions) == len(places) - 1``.  An ended chain was consumed
    by a transition without a transit out of its last place.
    """

    places: tuple[str, ...]
    transitions: tuple[str, ...] = ()
    ended: bool = False

    @property
    def place(self) -> str:
        return self.places[-1]

    @property
    def history(self) -> tuple[tuple[str, str | None], ...]:
        pairs = list(zip(self.places, self.transitions))
        pairs.append((self.places[-1], END if self.ended else None))
        return tuple(pairs)

    def extended(self, t: str, q: str) -> "FlowChain":
        return FlowChain(self.places + (q,), self.transitions + (t,))


def extend_chains(pnwt: PetriNetWithTransits, chains: Iterable[FlowChain], t: str) -> set[FlowChain]:
    """Flow chains after firing ``t``.

    Chains at a preset place follow every transit out of it (a split yields
    several chains) or end if there is none; chains elsewhere are kept;
    every ``START`` transit creates a fresh one-element chain.
    """
    net = pnwt.net
    if t not in net.pre:
        raise UnknownTransitionError(f"unknown transition {t!r}")
    out: set[FlowChain] = set()
    moves: dict[str, list[str]] = {}
    for src, tgt in pnwt.transits[t]:
        moves.setdefault(src, []).append(tgt)
    for c in chains:
        if c.ended or c.place not in net.pre[t]:
            out.add(c)
            continue
        targets = moves.get(c.place)
        if not targets:
            out.add(FlowChain(c.places, c.transitions, ended=True))
        else:
            out.update(c.extended(t, q) for q in targets)
    for q in moves.get(START, ()):
        out.add(FlowChain((q,)))
    return out
