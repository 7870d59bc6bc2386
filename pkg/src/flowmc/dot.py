"""Graphviz export of nets and state graphs."""

from __future__ import annotations

from .net import START, PetriNet, PetriNetWithTransits

_PALETTE = ("blue", "darkgreen", "orange", "red", "purple", "brown", "magenta", "cyan4")


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def net_to_dot(obj: PetriNet | PetriNetWithTransits) -> str:
    pnwt = obj if isinstance(obj, PetriNetWithTransits) else None
    net = pnwt.net if pnwt is not None else obj
    lines = [f"digraph {_q(net.name)} {{", "  rankdir=LR;"]
    for p in net.places:
        if p in net.initial:
            lines.append(f'  {_q("p:" + p)} [shape=circle, label={_q(p + chr(10) + "*")}, style=bold];')
        else:
            lines.append(f'  {_q("p:" + p)} [shape=circle, label={_q(p)}];')
    for t in net.transitions:
        label = t if net.labels is None else f"{t}\n[{net.labels[t]}]"
        lines.append(f'  {_q("t:" + t)} [shape=box, label={_q(label)}];')
    for a, b in net.arcs():
        if a in net.place_set:
            lines.append(f'  {_q("p:" + a)} -> {_q("t:" + b)};')
        else:
            lines.append(f'  {_q("t:" + a)} -> {_q("p:" + b)};')
    for p, t in net.inhibitor_arcs():
        lines.append(f'  {_q("p:" + p)} -> {_q("t:" + t)} [arrowhead=odot];')
    if pnwt is not None:
        for k, t in enumerate(net.transitions):
            color = _PALETTE[k % len(_PALETTE)]
            for src, tgt in pnwt.transits[t]:
                if src == START:
                    lines.append(
                        f'  {_q("t:" + t)} -> {_q("p:" + tgt)} [style=dashed, color={color}, label=">"];'
                    )
                else:
                    lines.append(
                        f'  {_q("p:" + src)} -> {_q("p:" + tgt)} '
                        f'[style=dashed, color={color}, label={_q(t)}, constraint=false];'
                    )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dot(graph) -> str:
    places = graph.net.places
    lines = ["digraph states {"]
    for s in range(graph.num_states):
        m = graph.marking(s)
        label = ", ".join(p for p in places if p in m) or "{}"
        shape = "doublecircle" if s == graph.initial else "ellipse"
        lines.append(f"  s{s} [shape={shape}, label={_q(label)}];")
    for e in range(graph.num_edges):
        t = graph.transition(e)
        style = ", style=dotted" if t is None else ""
        lines.append(f"  s{int(graph.src[e])} -> s{int(graph.dst[e])} [label={_q(t or 'stutter')}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj, path=None) -> str:
    """DOT text for a net, a net with transits or a state graph.

    Marked places carry a ``*`` under their name; inhibitor arcs end in a
    circle; transits are dashed, one colour per transition.  The text is
    written to ``path`` when given.
    """
    if isinstance(obj, (PetriNet, PetriNetWithTransits)):
        text = net_to_dot(obj)
    else:
        text = graph_to_dot(obj)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
