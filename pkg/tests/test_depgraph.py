import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GOLDEN, golden_spec, load_spec
from streammon import ir, terms
from streammon.depgraph import (DependencyGraph, Edge, build_graph, check_well_formed, is_cycle_witness,
                                require_well_formed, to_dot, topo_order_nondelayed)
from streammon.errors import NotFlat, NotWellFormed
from streammon.frontend import compile_spec

ID = terms.IDENTITY


def test_count_graph_has_delayed_self_dependency():
    spec = ir.flatten(compile_spec("in x: Events[Unit]\ndef c := merge(last(c, x) + 1, 0)\nout c"))
    g = build_graph(spec)
    delayed = [e for e in g.edges if e.delayed]
    assert [(e.target) for e in delayed if e.target == "c"] == ["c"]
    assert check_well_formed(g).ok


def test_empty_graph():
    g = build_graph(ir.spec({}, {}))
    assert g.nodes == [] and g.edges == []


def test_symmetric_cycle_is_not_well_formed():
    spec = ir.spec({}, {"a": ir.lift(ID, ir.V("b")), "b": ir.lift(ID, ir.V("a"))})
    g = build_graph(spec)
    assert sorted((e.source, e.target, e.delayed) for e in g.edges) == [("a", "b", False), ("b", "a", False)]
    report = check_well_formed(g)
    assert not report.ok and sorted(report.witness) == ["a", "b"]
    assert is_cycle_witness(g, report.witness)
    with pytest.raises(NotWellFormed):
        topo_order_nondelayed(g)


def test_alias_equations_are_edges():
    spec = golden_spec("illformed")
    with pytest.raises(NotWellFormed) as e:
        require_well_formed(ir.flatten(spec))
    assert "a" in e.value.cycle and "b" in e.value.cycle


def test_period_is_well_formed():
    assert check_well_formed(build_graph(ir.flatten(golden_spec("period")))).ok


def test_parallel_edges_are_kept():
    spec = ir.spec({"x": "Num"}, {"a": ir.Last(ir.V("b"), ir.V("b")), "b": ir.lift(ID, ir.V("x"))})
    edges = build_graph(spec).edges
    assert Edge("a", "b", True) in edges and Edge("a", "b", False) in edges


def test_not_flat_is_rejected():
    spec = ir.spec({"x": "Num"}, {"a": ir.lift(ID, ir.TimeE(ir.V("x")))})
    with pytest.raises(NotFlat):
        build_graph(spec)


def test_temperature_order():
    spec = ir.flatten(golden_spec("temperature"))
    order = require_well_formed(spec)
    assert order.index("unsafe") > order.index("low") and order.index("unsafe") > order.index("high")


def test_single_equation_order():
    assert topo_order_nondelayed(build_graph(ir.spec({"x": "Num"}, {"a": ir.V("x")}))) == ["a"]


def test_dot_marks_delayed_edges_dashed():
    dot = to_dot(build_graph(ir.flatten(golden_spec("period"))))
    assert "style=dashed" in dot and dot.startswith("digraph")


# -- brute force ------------------------------------------------------------------------

def _simple_cycles_without_delay(g):
    """Every cycle of the non-delayed subgraph by enumerating node sequences."""
    adj = {n: {e.target for e in g.edges if e.source == n and not e.delayed} for n in g.nodes}
    for k in range(1, len(g.nodes) + 1):
        for seq in itertools.permutations(g.nodes, k):
            if all(seq[(i + 1) % k] in adj[seq[i]] for i in range(k)):
                return True
    return False


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 6))
    nodes = [f"n{i}" for i in range(n)]
    edges = draw(st.lists(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes), st.booleans()), max_size=10))
    return DependencyGraph(nodes, [Edge(a, b, d) for a, b, d in edges])


@settings(max_examples=300)
@given(graphs())
def test_well_formedness_matches_brute_force(g):
    report = check_well_formed(g)
    assert report.ok == (not _simple_cycles_without_delay(g))
    if report.ok:
        order = topo_order_nondelayed(g)
        assert sorted(order) == sorted(g.nodes)
        pos = {n: i for i, n in enumerate(order)}
        for e in g.edges:
            if not e.delayed:
                assert pos[e.target] < pos[e.source] or e.target == e.source
    else:
        assert is_cycle_witness(g, report.witness)


def test_corpus_specs_are_well_formed():
    for path in GOLDEN.glob("*.spec"):
        if path.stem != "illformed":
            require_well_formed(ir.flatten(load_spec(path)))
