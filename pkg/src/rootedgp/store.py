"""Host-graph storage.

Two interchangeable backends share one API:

``IndexedGraph``
    Nodes live in five global lists, one per node mark. Every node owns a
    5x3 table of edge lists keyed by (edge mark, orientation). Fetching the
    first node of a mark or the first edge of a (mark, orientation) cell is a
    single pointer read.

``LegacyGraph``
    One global node list and, per node, an in-list and an out-list of edges
    (loops go in the out-list). Lookups by mark have to scan and skip.

All lists are intrusive and doubly linked so unlinking is O(1). Every
``first_*``/``next_*`` probe charges the graph's step counters, which is how
the complexity of a program run is measured.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Optional


class NodeMark(enum.IntEnum):
    UNMARKED = 0
    GREY = 1
    RED = 2
    GREEN = 3
    BLUE = 4


class EdgeMark(enum.IntEnum):
    UNMARKED = 0
    DASHED = 1
    RED = 2
    GREEN = 3
    BLUE = 4


class Orientation(enum.IntEnum):
    IN = 0
    OUT = 1
    LOOP = 2


IN, OUT, LOOP = Orientation.IN, Orientation.OUT, Orientation.LOOP

Label = tuple  # tuple of int | str atoms
NodeId = int
EdgeId = int


class GraphError(Exception):
    pass


class StaleHandle(GraphError):
    """An operation referenced a node or edge that is not live."""


class NodeHasEdges(GraphError):
    """Attempt to delete a node that still has incident edges."""


class NodeRecord:
    __slots__ = (
        "id", "label", "mark", "rooted", "matched",
        "indeg", "outdeg", "loopdeg",
        "prev", "next", "rprev", "rnext",
        "heads", "tails",
    )

    def __init__(self, nid, label, mark, rooted, ncells):
        self.id = nid
        self.label = label
        self.mark = mark
        self.rooted = rooted
        self.matched = False
        self.indeg = 0
        self.outdeg = 0
        self.loopdeg = 0
        self.prev = self.next = None
        self.rprev = self.rnext = None
        self.heads = [None] * ncells
        self.tails = None


class EdgeRecord:
    __slots__ = (
        "id", "label", "mark", "src", "tgt", "matched",
        "sprev", "snext", "tprev", "tnext",
    )

    def __init__(self, eid, src, tgt, label, mark):
        self.id = eid
        self.src = src
        self.tgt = tgt
        self.label = label
        self.mark = mark
        self.matched = False
        self.sprev = self.snext = None
        self.tprev = self.tnext = None


@dataclass(frozen=True)
class StepCounter:
    """Snapshot of a graph's probe counters."""

    node_steps: int = 0
    root_steps: int = 0
    edge_steps: int = 0

    @property
    def total(self) -> int:
        return self.node_steps + self.root_steps + self.edge_steps

    def __sub__(self, other: StepCounter) -> StepCounter:
        return StepCounter(
            self.node_steps - other.node_steps,
            self.root_steps - other.root_steps,
            self.edge_steps - other.edge_steps,
        )


class HostGraph:
    """Mutable labelled directed multigraph with marks and roots.

    Node and edge ids are never handed out twice, so a stale id can always
    be detected. Rollback may revive a deleted id with :meth:`restore_node`
    and :meth:`restore_edge`.
    """

    backend = "abstract"

    def __init__(self) -> None:
        self._nodes: list[Optional[NodeRecord]] = []
        self._edges: list[Optional[EdgeRecord]] = []
        self._root_head: Optional[NodeRecord] = None
        self._n_nodes = 0
        self._n_edges = 0
        self.node_steps = 0
        self.root_steps = 0
        self.edge_steps = 0

    @staticmethod
    def create(backend: str = "indexed") -> HostGraph:
        if backend == "indexed":
            return IndexedGraph()
        if backend == "legacy":
            return LegacyGraph()
        raise ValueError(f"unknown backend {backend!r}")

    # -- counters ---------------------------------------------------------

    @property
    def steps(self) -> int:
        return self.node_steps + self.root_steps + self.edge_steps

    def counters(self) -> StepCounter:
        return StepCounter(self.node_steps, self.root_steps, self.edge_steps)

    def reset_counters(self) -> None:
        self.node_steps = self.root_steps = self.edge_steps = 0

    # -- record lookup ----------------------------------------------------

    def _node(self, nid: NodeId) -> NodeRecord:
        try:
            rec = self._nodes[nid] if nid >= 0 else None
        except (IndexError, TypeError):
            rec = None
        if rec is None:
            raise StaleHandle(f"node {nid!r} is not live")
        return rec

    def _edge(self, eid: EdgeId) -> EdgeRecord:
        try:
            rec = self._edges[eid] if eid >= 0 else None
        except (IndexError, TypeError):
            rec = None
        if rec is None:
            raise StaleHandle(f"edge {eid!r} is not live")
        return rec

    # -- backend hooks ----------------------------------------------------

    _ncells = 0

    def _link_node(self, rec: NodeRecord) -> None:
        raise NotImplementedError

    def _unlink_node(self, rec: NodeRecord) -> None:
        raise NotImplementedError

    def _link_edge(self, rec: EdgeRecord) -> None:
        raise NotImplementedError

    def _unlink_edge(self, rec: EdgeRecord) -> None:
        raise NotImplementedError

    def _remark_node(self, rec: NodeRecord, mark: NodeMark) -> None:
        raise NotImplementedError

    def _remark_edge(self, rec: EdgeRecord, mark: EdgeMark) -> None:
        raise NotImplementedError

    # -- mutation ---------------------------------------------------------

    def add_node(self, label: Label = (), mark: NodeMark = NodeMark.UNMARKED,
                 rooted: bool = False) -> NodeId:
        nid = len(self._nodes)
        self._nodes.append(None)
        self._insert_node(nid, tuple(label), NodeMark(mark), rooted)
        return nid

    def restore_node(self, nid: NodeId, label: Label, mark: NodeMark,
                     rooted: bool) -> NodeId:
        """Bring node ``nid`` (dead or never used) to life with the given state."""
        if nid < 0:
            raise StaleHandle(f"invalid node id {nid!r}")
        if nid < len(self._nodes) and self._nodes[nid] is not None:
            raise GraphError(f"node {nid} is already live")
        while len(self._nodes) <= nid:
            self._nodes.append(None)
        self._insert_node(nid, tuple(label), NodeMark(mark), rooted)
        return nid

    def _insert_node(self, nid, label, mark, rooted):
        rec = NodeRecord(nid, label, mark, False, self._ncells)
        self._nodes[nid] = rec
        self._link_node(rec)
        self._n_nodes += 1
        if rooted:
            self._root(rec)

    def delete_node(self, nid: NodeId) -> None:
        rec = self._node(nid)
        if rec.indeg or rec.outdeg or rec.loopdeg:
            raise NodeHasEdges(f"node {nid} has incident edges")
        if rec.rooted:
            self._unroot(rec)
        self._unlink_node(rec)
        self._nodes[nid] = None
        self._n_nodes -= 1

    def add_edge(self, src: NodeId, tgt: NodeId, label: Label = (),
                 mark: EdgeMark = EdgeMark.UNMARKED) -> EdgeId:
        s, t = self._node(src), self._node(tgt)
        eid = len(self._edges)
        self._edges.append(None)
        self._insert_edge(eid, s, t, tuple(label), EdgeMark(mark))
        return eid

    def restore_edge(self, eid: EdgeId, src: NodeId, tgt: NodeId, label: Label,
                     mark: EdgeMark) -> EdgeId:
        s, t = self._node(src), self._node(tgt)
        if eid < 0:
            raise StaleHandle(f"invalid edge id {eid!r}")
        if eid < len(self._edges) and self._edges[eid] is not None:
            raise GraphError(f"edge {eid} is already live")
        while len(self._edges) <= eid:
            self._edges.append(None)
        self._insert_edge(eid, s, t, tuple(label), EdgeMark(mark))
        return eid

    def _insert_edge(self, eid, s, t, label, mark):
        rec = EdgeRecord(eid, s, t, label, mark)
        self._edges[eid] = rec
        self._link_edge(rec)
        if s is t:
            s.loopdeg += 1
        else:
            s.outdeg += 1
            t.indeg += 1
        self._n_edges += 1

    def delete_edge(self, eid: EdgeId) -> None:
        rec = self._edge(eid)
        self._unlink_edge(rec)
        s, t = rec.src, rec.tgt
        if s is t:
            s.loopdeg -= 1
        else:
            s.outdeg -= 1
            t.indeg -= 1
        self._edges[eid] = None
        self._n_edges -= 1

    def set_node_mark(self, nid: NodeId, mark: NodeMark) -> None:
        rec = self._node(nid)
        self._remark_node(rec, NodeMark(mark))

    def set_edge_mark(self, eid: EdgeId, mark: EdgeMark) -> None:
        rec = self._edge(eid)
        self._remark_edge(rec, EdgeMark(mark))

    def set_node_label(self, nid: NodeId, label: Label) -> None:
        self._node(nid).label = tuple(label)

    def set_edge_label(self, eid: EdgeId, label: Label) -> None:
        self._edge(eid).label = tuple(label)

    def set_root(self, nid: NodeId, rooted: bool) -> None:
        rec = self._node(nid)
        if rooted and not rec.rooted:
            self._root(rec)
        elif not rooted and rec.rooted:
            self._unroot(rec)

    def _root(self, rec):
        rec.rooted = True
        head = self._root_head
        rec.rprev = None
        rec.rnext = head
        if head is not None:
            head.rprev = rec
        self._root_head = rec

    def _unroot(self, rec):
        rec.rooted = False
        if rec.rprev is None:
            self._root_head = rec.rnext
        else:
            rec.rprev.rnext = rec.rnext
        if rec.rnext is not None:
            rec.rnext.rprev = rec.rprev
        rec.rprev = rec.rnext = None

    # -- probes (charged) -------------------------------------------------

    def first_host_node(self, mark: NodeMark) -> Optional[NodeId]:
        raise NotImplementedError

    def next_host_node(self, mark: NodeMark, nid: NodeId) -> Optional[NodeId]:
        raise NotImplementedError

    def first_edge(self, nid: NodeId, mark: EdgeMark,
                   orient: Orientation) -> Optional[EdgeId]:
        raise NotImplementedError

    def next_edge_iter(self, nid: NodeId, mark: EdgeMark, orient: Orientation,
                       eid: EdgeId) -> Optional[EdgeId]:
        raise NotImplementedError

    def first_root_node(self) -> Optional[NodeId]:
        self.root_steps += 1
        head = self._root_head
        return None if head is None else head.id

    def next_root_node(self, nid: NodeId) -> Optional[NodeId]:
        rec = self._node(nid)
        self.root_steps += 1
        nxt = rec.rnext
        return None if nxt is None else nxt.id

    # -- accessors --------------------------------------------------------

    def get_mark(self, nid: NodeId) -> NodeMark:
        return self._node(nid).mark

    def get_edge_mark(self, eid: EdgeId) -> EdgeMark:
        return self._edge(eid).mark

    def get_label(self, nid: NodeId) -> Label:
        return self._node(nid).label

    def get_edge_label(self, eid: EdgeId) -> Label:
        return self._edge(eid).label

    def is_rooted(self, nid: NodeId) -> bool:
        return self._node(nid).rooted

    def get_source(self, eid: EdgeId) -> NodeId:
        return self._edge(eid).src.id

    def get_target(self, eid: EdgeId) -> NodeId:
        return self._edge(eid).tgt.id

    def indeg(self, nid: NodeId) -> int:
        return self._node(nid).indeg

    def outdeg(self, nid: NodeId) -> int:
        return self._node(nid).outdeg

    def loopdeg(self, nid: NodeId) -> int:
        return self._node(nid).loopdeg

    def set_matched(self, nid: NodeId) -> None:
        self._node(nid).matched = True

    def clear_matched(self, nid: NodeId) -> None:
        self._node(nid).matched = False

    def already_matched(self, nid: NodeId) -> bool:
        return self._node(nid).matched

    def set_edge_matched(self, eid: EdgeId) -> None:
        self._edge(eid).matched = True

    def clear_edge_matched(self, eid: EdgeId) -> None:
        self._edge(eid).matched = False

    def edge_already_matched(self, eid: EdgeId) -> bool:
        return self._edge(eid).matched

    def node_count(self) -> int:
        return self._n_nodes

    def edge_count(self) -> int:
        return self._n_edges

    def is_node(self, nid: NodeId) -> bool:
        return 0 <= nid < len(self._nodes) and self._nodes[nid] is not None

    def is_edge(self, eid: EdgeId) -> bool:
        return 0 <= eid < len(self._edges) and self._edges[eid] is not None

    # -- uncharged whole-graph views (printing, tests, oracles) -----------

    def nodes(self) -> Iterator[NodeId]:
        """Live node ids in increasing order."""
        return (r.id for r in self._nodes if r is not None)

    def edges(self) -> Iterator[EdgeId]:
        return (r.id for r in self._edges if r is not None)

    def roots(self) -> list[NodeId]:
        out = []
        r = self._root_head
        while r is not None:
            out.append(r.id)
            r = r.rnext
        return out

    def snapshot(self) -> tuple:
        """Observable state as a comparable value (ids, labels, marks, roots)."""
        nodes = tuple((r.id, r.label, int(r.mark), r.rooted)
                      for r in self._nodes if r is not None)
        edges = tuple((r.id, r.src.id, r.tgt.id, r.label, int(r.mark))
                      for r in self._edges if r is not None)
        return nodes, edges

    def copy(self, backend: Optional[str] = None) -> HostGraph:
        g = HostGraph.create(backend or self.backend)
        for r in self._nodes:
            if r is not None:
                g.restore_node(r.id, r.label, r.mark, r.rooted)
        for r in self._edges:
            if r is not None:
                g.restore_edge(r.id, r.src.id, r.tgt.id, r.label, r.mark)
        return g

    def __repr__(self) -> str:
        return (f"<{type(self).__name__} nodes={self._n_nodes} "
                f"edges={self._n_edges} steps={self.steps}>")


def _cell(mark: int, orient: int) -> int:
    return mark * 3 + orient


class IndexedGraph(HostGraph):
    backend = "indexed"
    _ncells = 15

    def __init__(self) -> None:
        super().__init__()
        self._node_heads: list[Optional[NodeRecord]] = [None] * 5

    def _link_node(self, rec):
        heads = self._node_heads
        head = heads[rec.mark]
        rec.prev = None
        rec.next = head
        if head is not None:
            head.prev = rec
        heads[rec.mark] = rec

    def _unlink_node(self, rec):
        if rec.prev is None:
            self._node_heads[rec.mark] = rec.next
        else:
            rec.prev.next = rec.next
        if rec.next is not None:
            rec.next.prev = rec.prev
        rec.prev = rec.next = None

    def _remark_node(self, rec, mark):
        self._unlink_node(rec)
        rec.mark = mark
        self._link_node(rec)

    def _link_edge(self, rec):
        s, t, m3 = rec.src, rec.tgt, rec.mark * 3
        if s is t:
            cells = s.heads
            head = cells[m3 + LOOP]
            rec.sprev = None
            rec.snext = head
            if head is not None:
                head.sprev = rec
            cells[m3 + LOOP] = rec
            return
        cells = s.heads
        head = cells[m3 + OUT]
        rec.sprev = None
        rec.snext = head
        if head is not None:
            head.sprev = rec
        cells[m3 + OUT] = rec
        cells = t.heads
        head = cells[m3 + IN]
        rec.tprev = None
        rec.tnext = head
        if head is not None:
            head.tprev = rec
        cells[m3 + IN] = rec

    def _unlink_edge(self, rec):
        s, t, m3 = rec.src, rec.tgt, rec.mark * 3
        if rec.sprev is None:
            s.heads[m3 + (LOOP if s is t else OUT)] = rec.snext
        else:
            rec.sprev.snext = rec.snext
        if rec.snext is not None:
            rec.snext.sprev = rec.sprev
        rec.sprev = rec.snext = None
        if s is t:
            return
        if rec.tprev is None:
            t.heads[m3 + IN] = rec.tnext
        else:
            rec.tprev.tnext = rec.tnext
        if rec.tnext is not None:
            rec.tnext.tprev = rec.tprev
        rec.tprev = rec.tnext = None

    def _remark_edge(self, rec, mark):
        self._unlink_edge(rec)
        rec.mark = mark
        self._link_edge(rec)

    def first_host_node(self, mark):
        self.node_steps += 1
        head = self._node_heads[mark]
        return None if head is None else head.id

    def next_host_node(self, mark, nid):
        rec = self._node(nid)
        self.node_steps += 1
        nxt = rec.next
        return None if nxt is None else nxt.id

    def first_edge(self, nid, mark, orient):
        rec = self._node(nid)
        self.edge_steps += 1
        e = rec.heads[mark * 3 + orient]
        return None if e is None else e.id

    def next_edge_iter(self, nid, mark, orient, eid):
        self._node(nid)
        rec = self._edge(eid)
        self.edge_steps += 1
        nxt = rec.tnext if orient == IN else rec.snext
        return None if nxt is None else nxt.id

    def bucket_nodes(self, mark: NodeMark) -> list[NodeId]:
        """Uncharged listing of one node bucket (for invariant checks)."""
        out = []
        r = self._node_heads[mark]
        while r is not None:
            out.append(r.id)
            r = r.next
        return out

    def bucket_edges(self, nid: NodeId, mark: EdgeMark,
                     orient: Orientation) -> list[EdgeId]:
        out = []
        r = self._node(nid).heads[mark * 3 + orient]
        while r is not None:
            out.append(r.id)
            r = r.tnext if orient == IN else r.snext
        return out


class LegacyGraph(HostGraph):
    """Store layout without mark indexing.

    Nodes are prepended to a single global list; edges are appended to their
    source's out-list and target's in-list. Marks are changed in place.
    """

    backend = "legacy"
    _ncells = 2  # heads[IN], heads[OUT]

    def __init__(self) -> None:
        super().__init__()
        self._head: Optional[NodeRecord] = None

    def _link_node(self, rec):
        rec.tails = [None, None]
        head = self._head
        rec.prev = None
        rec.next = head
        if head is not None:
            head.prev = rec
        self._head = rec

    def _unlink_node(self, rec):
        if rec.prev is None:
            self._head = rec.next
        else:
            rec.prev.next = rec.next
        if rec.next is not None:
            rec.next.prev = rec.prev
        rec.prev = rec.next = None

    def _remark_node(self, rec, mark):
        rec.mark = mark

    def _remark_edge(self, rec, mark):
        rec.mark = mark

    def _link_edge(self, rec):
        s, t = rec.src, rec.tgt
        tail = s.tails[OUT]
        rec.snext = None
        rec.sprev = tail
        if tail is None:
            s.heads[OUT] = rec
        else:
            tail.snext = rec
        s.tails[OUT] = rec
        if s is t:
            return
        tail = t.tails[IN]
        rec.tnext = None
        rec.tprev = tail
        if tail is None:
            t.heads[IN] = rec
        else:
            tail.tnext = rec
        t.tails[IN] = rec

    def _unlink_edge(self, rec):
        s, t = rec.src, rec.tgt
        if rec.sprev is None:
            s.heads[OUT] = rec.snext
        else:
            rec.sprev.snext = rec.snext
        if rec.snext is None:
            s.tails[OUT] = rec.sprev
        else:
            rec.snext.sprev = rec.sprev
        rec.sprev = rec.snext = None
        if s is t:
            return
        if rec.tprev is None:
            t.heads[IN] = rec.tnext
        else:
            rec.tprev.tnext = rec.tnext
        if rec.tnext is None:
            t.tails[IN] = rec.tprev
        else:
            rec.tnext.tprev = rec.tprev
        rec.tprev = rec.tnext = None

    def _scan_nodes(self, r, mark):
        while r is not None:
            self.node_steps += 1
            if r.mark == mark:
                return r.id
            r = r.next
        return None

    def first_host_node(self, mark):
        return self._scan_nodes(self._head, mark)

    def next_host_node(self, mark, nid):
        return self._scan_nodes(self._node(nid).next, mark)

    def _scan_edges(self, e, mark, orient):
        if orient == IN:
            while e is not None:
                self.edge_steps += 1
                if e.mark == mark:
                    return e.id
                e = e.tnext
            return None
        loop = orient == LOOP
        while e is not None:
            self.edge_steps += 1
            if e.mark == mark and (e.src is e.tgt) == loop:
                return e.id
            e = e.snext
        return None

    def first_edge(self, nid, mark, orient):
        rec = self._node(nid)
        return self._scan_edges(rec.heads[IN if orient == IN else OUT],
                                mark, orient)

    def next_edge_iter(self, nid, mark, orient, eid):
        self._node(nid)
        rec = self._edge(eid)
        return self._scan_edges(rec.tnext if orient == IN else rec.snext,
                                mark, orient)
