from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import check_store_invariants, probe_all, random_mutations
from rootedgp.store import (EdgeMark, GraphError, HostGraph, NodeHasEdges, NodeMark,
                            Orientation, StaleHandle)

IN, OUT, LOOP = Orientation.IN, Orientation.OUT, Orientation.LOOP


def test_create_rejects_unknown_backend():
    with pytest.raises(ValueError):
        HostGraph.create("btree")


def test_add_and_accessors(backend):
    g = HostGraph.create(backend)
    a = g.add_node(("a", 1), NodeMark.GREY)
    b = g.add_node()
    e = g.add_edge(a, b, (5,), EdgeMark.RED)
    assert g.get_source(e) == a and g.get_target(e) == b
    assert g.get_label(a) == ("a", 1) and g.get_edge_label(e) == (5,)
    assert g.get_mark(a) is NodeMark.GREY and g.get_edge_mark(e) is EdgeMark.RED
    assert (g.outdeg(a), g.indeg(b), g.loopdeg(a)) == (1, 1, 0)
    assert g.node_count() == 2 and g.edge_count() == 1
    assert not g.already_matched(a)
    g.set_matched(a)
    assert g.already_matched(a)
    g.clear_matched(a)
    assert not g.already_matched(a)


def test_remark_moves_node_between_buckets(backend):
    g = HostGraph.create(backend)
    n = g.add_node((), NodeMark.GREY)
    g.set_node_mark(n, NodeMark.RED)
    assert g.first_host_node(NodeMark.GREY) is None
    assert g.first_host_node(NodeMark.RED) == n


def test_remark_edge_found_under_new_cell(backend):
    g = HostGraph.create(backend)
    a, b = g.add_node(), g.add_node()
    e = g.add_edge(a, b)
    g.set_edge_mark(e, EdgeMark.RED)
    assert g.first_edge(a, EdgeMark.RED, OUT) == e
    assert g.first_edge(a, EdgeMark.UNMARKED, OUT) is None
    assert g.first_edge(b, EdgeMark.RED, IN) == e


def test_same_mark_keeps_single_membership(backend):
    g = HostGraph.create(backend)
    n = g.add_node((), NodeMark.BLUE)
    m = g.add_node((), NodeMark.BLUE)
    g.set_node_mark(n, NodeMark.BLUE)
    seen = []
    h = g.first_host_node(NodeMark.BLUE)
    while h is not None:
        seen.append(h)
        h = g.next_host_node(NodeMark.BLUE, h)
    assert sorted(seen) == [n, m]


def test_root_registry(backend):
    g = HostGraph.create(backend)
    a, b = g.add_node(), g.add_node()
    assert g.first_root_node() is None
    g.set_root(a, True)
    g.set_root(a, True)
    assert g.roots() == [a]
    assert g.next_root_node(a) is None
    g.set_root(b, True)
    seen = [g.first_root_node()]
    seen.append(g.next_root_node(seen[0]))
    assert sorted(seen) == [a, b]
    g.set_root(a, False)
    g.set_root(b, False)
    assert g.first_root_node() is None


def test_loop_is_only_in_loop_cell(backend):
    g = HostGraph.create(backend)
    n = g.add_node((1,))
    e = g.add_edge(n, n)
    assert g.loopdeg(n) == 1 and g.outdeg(n) == 0 and g.indeg(n) == 0
    assert g.first_edge(n, EdgeMark.UNMARKED, OUT) is None
    assert g.first_edge(n, EdgeMark.UNMARKED, IN) is None
    assert g.first_edge(n, EdgeMark.UNMARKED, LOOP) == e


def test_empty_cells_and_buckets(backend):
    g = HostGraph.create(backend)
    assert g.first_host_node(NodeMark.RED) is None
    n = g.add_node()
    assert g.first_edge(n, EdgeMark.BLUE, IN) is None


def test_delete_node_with_edges_refused(backend):
    g = HostGraph.create(backend)
    a, b = g.add_node(), g.add_node()
    g.add_edge(a, b)
    with pytest.raises(NodeHasEdges):
        g.delete_node(a)
    assert g.node_count() == 2


def test_stale_ids_raise(backend):
    g = HostGraph.create(backend)
    a, b = g.add_node(), g.add_node()
    e = g.add_edge(a, b)
    g.delete_edge(e)
    g.delete_node(a)
    for call in (lambda: g.get_mark(a), lambda: g.set_root(a, True),
                 lambda: g.get_edge_mark(e), lambda: g.delete_edge(e),
                 lambda: g.add_edge(a, b), lambda: g.get_mark(99), lambda: g.get_mark(-1)):
        with pytest.raises(StaleHandle):
            call()
    # ids are never handed out again
    assert g.add_node() == 2
    assert g.add_edge(b, b) == 1


def test_restore_revives_exact_id(backend):
    g = HostGraph.create(backend)
    a = g.add_node(("x",), NodeMark.RED, True)
    g.delete_node(a)
    assert g.restore_node(a, ("x",), NodeMark.RED, True) == a
    assert g.roots() == [a]
    with pytest.raises(GraphError):
        g.restore_node(a, (), NodeMark.UNMARKED, False)


# -- step counting --------------------------------------------------------------

def test_indexed_grey_lookup_costs_one_step():
    g = HostGraph.create("indexed")
    for _ in range(1000):
        g.add_node()
    grey = g.add_node((), NodeMark.GREY)
    g.reset_counters()
    assert g.first_host_node(NodeMark.GREY) == grey
    assert g.steps == 1


def test_legacy_grey_lookup_scans_the_list():
    g = HostGraph.create("legacy")
    grey = g.add_node((), NodeMark.GREY)  # prepending puts it last in the list
    for _ in range(1000):
        g.add_node()
    g.reset_counters()
    assert g.first_host_node(NodeMark.GREY) == grey
    assert g.steps == 1001


@pytest.mark.parametrize("backend_name,expected", [("indexed", 1), ("legacy", 8)])
def test_star_centre_red_in_probe(backend_name, expected):
    g = HostGraph.create(backend_name)
    c = g.add_node()
    for _ in range(8):
        g.add_edge(g.add_node(), c)
    g.reset_counters()
    assert g.first_edge(c, EdgeMark.RED, IN) is None
    assert g.edge_steps == expected


def test_next_edge_with_many_dashed_edges():
    for backend, cost in (("indexed", 1), ("legacy", 10_000)):
        g = HostGraph.create(backend)
        r = g.add_node((), NodeMark.RED, True)
        for _ in range(10_000):
            g.add_edge(r, g.add_node(), (), EdgeMark.DASHED)
        g.reset_counters()
        assert g.first_edge(r, EdgeMark.UNMARKED, OUT) is None
        assert g.edge_steps == cost


def test_counters_and_reset():
    g = HostGraph.create("indexed")
    g.add_node()
    g.first_host_node(NodeMark.UNMARKED)
    g.first_root_node()
    c = g.counters()
    assert (c.node_steps, c.root_steps, c.edge_steps, c.total) == (1, 1, 0, 2)
    g.reset_counters()
    assert g.steps == 0


def test_copy_across_backends(backend):
    g = HostGraph.create(backend)
    a = g.add_node(("a",), NodeMark.GREY, True)
    b = g.add_node()
    g.add_edge(a, b, (1,), EdgeMark.DASHED)
    for other in ("indexed", "legacy"):
        assert g.copy(other).snapshot() == g.snapshot()


# -- properties -----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_mutations_keep_backends_equal(seed):
    gs = [HostGraph.create("indexed"), HostGraph.create("legacy")]
    for _ in random_mutations(seed, 400, gs):
        pass
    assert gs[0].snapshot() == gs[1].snapshot()
    for g in gs:
        check_store_invariants(g)
    listing_i, steps_i, calls_i = probe_all(gs[0])
    listing_l, _, _ = probe_all(gs[1])
    assert listing_i == listing_l
    assert steps_i == calls_i
