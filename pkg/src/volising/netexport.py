"""Top-interaction networks and their export to JSON and Graphviz DOT."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .infer import CouplingModel


@dataclass
class EdgeList:
    directed: bool
    edges: list  # (source, target, weight)
    nodes: list
    truncated: bool = False  # fewer pairs available than requested
    params: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, EdgeList):
            return NotImplemented
        return (self.directed == other.directed and self.nodes == other.nodes
                and [tuple(e) for e in self.edges] == [tuple(e) for e in other.edges])


def top_edges(model: CouplingModel, k: int, mode: str = "signed") -> EdgeList:
    """The ``k`` strongest off-diagonal couplings.

    Parameters
    ----------
    k : int
        Number of edges. If fewer pairs exist all of them are returned and
        ``truncated`` is set.
    mode : {"signed", "absolute"}
        Rank by ``J_ij`` or by ``|J_ij|``.

    Notes
    -----
    Ties are broken by the (source, target) ticker pair so that the result
    does not depend on the order of stocks in the model. For undirected
    models each unordered pair appears once, with the tickers in sorted order.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if mode not in ("signed", "absolute"):
        raise ValidationError(f"unknown ranking mode {mode!r}")
    j = np.asarray(model.j, dtype=float)
    stocks = model.stocks
    n = len(stocks)
    cands = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            src, dst = stocks[a], stocks[b]
            if not model.directed:
                if src > dst:
                    continue
            w = float(j[a, b])
            cands.append((src, dst, w))
    key_of = (lambda e: -e[2]) if mode == "signed" else (lambda e: -abs(e[2]))
    cands.sort(key=lambda e: (key_of(e), e[0], e[1]))
    truncated = k > len(cands)
    chosen = cands[:k]
    nodes = sorted({e[0] for e in chosen} | {e[1] for e in chosen})
    return EdgeList(bool(model.directed), chosen, nodes, truncated,
                    params={"method": model.method, "k": k, "mode": mode, **model.params})


def to_edge_list_json(el: EdgeList) -> str:
    doc = {
        "directed": el.directed,
        "nodes": list(el.nodes),
        "edges": [{"source": s, "target": t, "weight": float(w)} for s, t, w in el.edges],
        "truncated": el.truncated,
        "params": el.params,
    }
    # json writes floats with repr, i.e. shortest round-tripping (up to 17 digits)
    return json.dumps(doc, indent=1)


def from_edge_list_json(text: str) -> EdgeList:
    doc = json.loads(text)
    return EdgeList(
        directed=bool(doc["directed"]),
        edges=[(e["source"], e["target"], float(e["weight"])) for e in doc["edges"]],
        nodes=list(doc["nodes"]),
        truncated=bool(doc.get("truncated", False)),
        params=doc.get("params", {}),
    )


_BARE_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_id(name: str) -> str:
    if _BARE_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def pen_widths(weights, lo: float = 1.0, hi: float = 8.0) -> list[float]:
    """Map ``|w|`` linearly onto ``[lo, hi]``; all-equal weights get ``hi``."""
    a = np.abs(np.asarray(weights, dtype=float))
    if a.size == 0:
        return []
    span = a.max() - a.min()
    if span == 0:
        return [hi] * a.size
    return (lo + (hi - lo) * (a - a.min()) / span).tolist()


def to_dot(el: EdgeList, name: str = "couplings") -> str:
    """Graphviz text; edge ``penwidth`` grows with ``|weight|`` from 1 to 8.

    The signed coupling goes into a ``coupling`` attribute; ``weight`` holds
    its absolute value because layout and community tools reject negatives.
    """
    kind, arrow = ("digraph", "->") if el.directed else ("graph", "--")
    lines = [f"{kind} {_dot_id(name)} {{"]
    for node in el.nodes:
        lines.append(f"  {_dot_id(node)};")
    for (s, t, w), pw in zip(el.edges, pen_widths([e[2] for e in el.edges])):
        lines.append(
            f"  {_dot_id(s)} {arrow} {_dot_id(t)} "
            f"[coupling={float(w)!r}, weight={abs(float(w))!r}, penwidth={pw:.3f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
