import json
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volising.errors import ValidationError
from volising.infer import CouplingModel
from volising.netexport import (
    EdgeList,
    from_edge_list_json,
    pen_widths,
    to_dot,
    to_edge_list_json,
    top_edges,
)


def model(j, stocks=None, method="synchronous"):
    j = np.asarray(j, float)
    stocks = stocks or [f"S{i}" for i in range(len(j))]
    return CouplingModel(method, j, np.zeros(len(j)), stocks)


def test_directed_max_edge():
    el = top_edges(model([[0, 3], [1, 0]], ["stock1", "stock2"]), 1)
    assert el.directed
    assert el.edges == [("stock1", "stock2", 3.0)]


def test_undirected_max_pair():
    j = np.zeros((3, 3))
    j[0, 1] = j[1, 0] = 0.5
    j[0, 2] = j[2, 0] = 0.2
    el = top_edges(model(j, ["A", "B", "C"], "equilibrium"), 1)
    assert not el.directed
    assert el.edges == [("A", "B", 0.5)]


def test_k_zero_rejected():
    with pytest.raises(ValidationError):
        top_edges(model(np.zeros((2, 2))), 0)


def test_k_too_large_returns_all_with_flag():
    el = top_edges(model(np.arange(9.0).reshape(3, 3)), 100)
    assert el.truncated
    assert len(el.edges) == 6


def test_absolute_mode_prefers_large_negative():
    el = top_edges(model([[0, -5.0], [1.0, 0]], ["A", "B"]), 1, mode="absolute")
    assert el.edges == [("A", "B", -5.0)]


def test_sorted_and_tie_broken_by_ticker():
    j = np.array([[0, 1.0, 1.0], [1.0, 0, 2.0], [1.0, 0.5, 0]])
    el = top_edges(model(j, ["C", "A", "B"]), 6)
    assert el.edges == [("A", "B", 2.0), ("A", "C", 1.0), ("B", "C", 1.0),
                        ("C", "A", 1.0), ("C", "B", 1.0), ("B", "A", 0.5)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.booleans())
def test_permutation_invariance(seed, n, directed):
    rng = np.random.default_rng(seed)
    j = np.round(rng.normal(size=(n, n)), 1)  # rounding creates ties
    if not directed:
        j = (j + j.T) / 2
    stocks = [f"T{i}" for i in range(n)]
    perm = rng.permutation(n)
    method = "synchronous" if directed else "equilibrium"
    a = top_edges(model(j, stocks, method), 5)
    b = top_edges(model(j[np.ix_(perm, perm)], [stocks[p] for p in perm], method), 5)
    assert a == b
    keys = [e[2] for e in a.edges]
    assert keys == sorted(keys, reverse=True)


def test_symmetric_all_pairs_once(rng):
    n = 6
    j = rng.normal(size=(n, n))
    j = (j + j.T) / 2
    el = top_edges(model(j, None, "equilibrium"), n * (n - 1) // 2)
    pairs = {frozenset(e[:2]) for e in el.edges}
    assert len(pairs) == len(el.edges) == n * (n - 1) // 2
    assert not el.truncated


def test_no_self_loops(rng):
    el = top_edges(model(rng.normal(size=(4, 4)) + 10 * np.eye(4)), 12)
    assert all(s != t for s, t, _ in el.edges)


def test_empty_edge_list_json():
    doc = json.loads(to_edge_list_json(EdgeList(True, [], [])))
    assert doc["edges"] == []
    assert doc["directed"] is True


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.text(min_size=1, max_size=5), st.text(min_size=1, max_size=5),
                          st.floats(allow_nan=False, allow_infinity=False)), max_size=10),
       st.booleans())
def test_json_round_trip(edges, directed):
    nodes = sorted({e[0] for e in edges} | {e[1] for e in edges})
    el = EdgeList(directed, edges, nodes)
    assert from_edge_list_json(to_edge_list_json(el)) == el


def test_json_weight_precision():
    w = 0.12345678901234567
    text = to_edge_list_json(EdgeList(False, [("A", "B", w)], ["A", "B"]))
    literal = re.search(r'"weight": ([-0-9.e]+)', text).group(1)
    assert len(literal.replace("0.", "", 1).lstrip("0")) >= 15
    assert float(literal) == w


def test_dot_directed_statement():
    dot = to_dot(EdgeList(True, [("A", "B", 0.3)], ["A", "B"]))
    assert dot.startswith("digraph")
    assert len(re.findall(r"^\s*A -> B", dot, re.M)) == 1


def test_dot_undirected_statement():
    dot = to_dot(EdgeList(False, [("A", "B", 0.3)], ["A", "B"]))
    assert dot.startswith("graph")
    assert len(re.findall(r"^\s*A -- B", dot, re.M)) == 1


def test_dot_pen_width_normalization():
    edges = [("A", "B", 0.9), ("B", "C", -0.1), ("A", "C", 0.5)]
    dot = to_dot(EdgeList(True, edges, ["A", "B", "C"]))
    widths = [float(w) for w in re.findall(r"penwidth=([0-9.]+)", dot)]
    assert widths[0] == 8.0
    assert widths[1] == 1.0
    assert 1.0 < widths[2] < 8.0
    assert pen_widths([]) == []


def test_dot_quotes_awkward_tickers():
    dot = to_dot(EdgeList(False, [("BRK.B", "A", 1.0)], ["A", "BRK.B"]))
    assert '"BRK.B" -- A' in dot
