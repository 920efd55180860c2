"""DOT export of fault graphs: node labels carry the occurrence
probability, edge labels the impact factor, and edge pen width scales with
the edge weight."""
from __future__ import annotations

from .model import FaultGraph

MIN_PENWIDTH = 0.5
PENWIDTH_SCALE = 4.0


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: FaultGraph, name: str = "faultgraph") -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for fid in sorted(graph.node_weights):
        # \n inside the label is a DOT line break
        label = _quote(fid)[:-1] + f'\\np={graph.node_weights[fid]:g}"'
        lines.append(f"  {_quote(fid)} [label={label}];")
    for (u, v) in sorted(graph.edges):
        w = graph.edges[(u, v)]
        penwidth = MIN_PENWIDTH + PENWIDTH_SCALE * w
        lines.append(
            f"  {_quote(u)} -> {_quote(v)} "
            f"[label={_quote(f'ifv={w:g}')}, penwidth={penwidth:.3f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
