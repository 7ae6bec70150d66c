"""Rooted rules: search plans, injective matching, application and undo."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

from .labels import LabelError, Var, VarType, check_expr, evaluate, unify, variables
from .store import EdgeMark, HostGraph, NodeMark, Orientation

IN, OUT, LOOP = Orientation.IN, Orientation.OUT, Orientation.LOOP
ALL_NODE_MARKS = tuple(NodeMark)
ALL_EDGE_MARKS = tuple(EdgeMark)


class RuleError(ValueError):
    """A rule is ill-formed."""


class UnsupportedRule(RuleError):
    """A well-formed rule the matcher cannot plan."""


class LineageMismatch(Exception):
    """An undo log was replayed against a graph it was not recorded on."""


@dataclass(frozen=True)
class RuleNode:
    id: str
    label: tuple = ()
    mark: Optional[NodeMark] = NodeMark.UNMARKED  # None matches any mark
    rooted: bool = False


@dataclass(frozen=True)
class RuleEdge:
    id: str
    source: str
    target: str
    label: tuple = ()
    mark: Optional[EdgeMark] = EdgeMark.UNMARKED
    bidirectional: bool = False


@dataclass(frozen=True)
class RuleGraph:
    nodes: tuple[RuleNode, ...] = ()
    edges: tuple[RuleEdge, ...] = ()

    def node(self, nid: str) -> RuleNode:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)


@dataclass(frozen=True)
class Rule:
    """A rule ``lhs => rhs`` with the node ids in ``interface`` preserved.

    An edge whose id occurs on both sides, with the same preserved endpoints
    and direction, is preserved too and keeps its host identity.
    """

    name: str
    variables: tuple[tuple[str, VarType], ...]
    lhs: RuleGraph
    rhs: RuleGraph
    interface: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _validate(self)

    @cached_property
    def compiled(self) -> _Compiled:
        return _Compiled(self)

    def plan(self) -> SearchPlan:
        return self.compiled.plan


def _validate(rule: Rule) -> None:
    declared = dict(rule.variables)
    if len(declared) != len(rule.variables):
        raise RuleError(f"{rule.name}: duplicate variable declaration")
    for side_name, side in (("left", rule.lhs), ("right", rule.rhs)):
        ids = [n.id for n in side.nodes]
        if len(set(ids)) != len(ids):
            raise RuleError(f"{rule.name}: duplicate node id on the {side_name} side")
        eids = [e.id for e in side.edges]
        if len(set(eids)) != len(eids):
            raise RuleError(f"{rule.name}: duplicate edge id on the {side_name} side")
        for e in side.edges:
            if e.source not in ids or e.target not in ids:
                raise RuleError(f"{rule.name}: edge {e.id} has an unknown endpoint")
        for item in (*side.nodes, *side.edges):
            try:
                check_expr(item.label, pattern=side is rule.lhs)
            except LabelError as exc:
                raise RuleError(f"{rule.name}: {exc}") from None
            for t in _vars_in(item.label):
                if declared.get(t.name) is not t.type:
                    raise RuleError(f"{rule.name}: variable {t.name} is not declared"
                                    f" as {t.type.value}")
    lhs_ids = {n.id for n in rule.lhs.nodes}
    rhs_ids = {n.id for n in rule.rhs.nodes}
    for i in rule.interface:
        if i not in lhs_ids or i not in rhs_ids:
            raise RuleError(f"{rule.name}: interface node {i} missing from a side")
    lhs_vars = set()
    for item in (*rule.lhs.nodes, *rule.lhs.edges):
        lhs_vars |= variables(item.label)
    for item in (*rule.rhs.nodes, *rule.rhs.edges):
        extra = variables(item.label) - lhs_vars
        if extra:
            raise RuleError(f"{rule.name}: right-hand variable(s) {sorted(extra)}"
                            " do not occur on the left")
    kept = set(rule.interface)
    for n in rule.rhs.nodes:
        if n.mark is None and not (n.id in kept and rule.lhs.node(n.id).mark is None):
            raise RuleError(f"{rule.name}: node {n.id} may only be marked any"
                            " if it is preserved and marked any on the left")
    lhs_edges = {e.id: e for e in rule.lhs.edges}
    for e in rule.rhs.edges:
        old = lhs_edges.get(e.id)
        preserved = old is not None and _edge_preserved(old, e, kept)
        if e.mark is None and not (preserved and old.mark is None):
            raise RuleError(f"{rule.name}: edge {e.id} may only be marked any"
                            " if it is preserved and marked any on the left")
        if e.bidirectional and not preserved:
            raise RuleError(f"{rule.name}: created edge {e.id} cannot be bidirectional")


def _vars_in(expr):
    from .labels import Sum

    def walk(t):
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Sum):
            yield from walk(t.left)
            yield from walk(t.right)

    for t in expr:
        yield from walk(t)


def _edge_preserved(old: RuleEdge, new: RuleEdge, kept: set) -> bool:
    return (old.source == new.source and old.target == new.target
            and old.bidirectional == new.bidirectional
            and old.source in kept and old.target in kept)


# -- search plans -------------------------------------------------------------

ROOT_BIND = "root-bind"
BUCKET_BIND = "bucket-bind"
EXTEND = "extend"


@dataclass(frozen=True)
class PlanStep:
    kind: str
    node: int                  # rule node bound by this step, or the anchor for EXTEND
    marks: tuple = ()          # candidate node marks (bucket) or edge marks (extend)
    edge: int = -1
    probes: tuple = ()         # (orientation, far end is target) pairs for EXTEND
    other: int = -1            # far-end rule node for EXTEND
    bind_other: bool = False

    def describe(self, rule: Rule) -> str:
        nodes = rule.lhs.nodes
        if self.kind == ROOT_BIND:
            return f"root-bind {nodes[self.node].id}"
        if self.kind == BUCKET_BIND:
            names = ",".join(m.name.lower() for m in self.marks)
            return f"bucket-bind {nodes[self.node].id} ({names})"
        names = ",".join(m.name.lower() for m in self.marks)
        orients = ",".join(o.name.lower() for o, _ in self.probes)
        return (f"extend {rule.lhs.edges[self.edge].id} from {nodes[self.node].id}"
                f" ({names}; {orients})")


@dataclass(frozen=True)
class SearchPlan:
    steps: tuple[PlanStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def plan(rule: Rule) -> SearchPlan:
    """Order the left-hand side for matching.

    Rooted nodes come from the root list; then edges are followed out of
    already bound nodes; any node still unbound is fetched from its mark
    bucket and the edge walk resumes from there.
    """
    lhs = rule.lhs
    index = {n.id: i for i, n in enumerate(lhs.nodes)}
    rooted = [i for i, n in enumerate(lhs.nodes) if n.rooted]
    if len(rooted) > 1:
        raise UnsupportedRule(f"{rule.name}: more than one rooted node on the left")
    steps: list[PlanStep] = []
    bound: set[int] = set()
    todo_edges = list(range(len(lhs.edges)))
    for i in rooted:
        steps.append(PlanStep(ROOT_BIND, i))
        bound.add(i)
    while True:
        progressed = True
        while progressed:
            progressed = False
            for k in todo_edges:
                e = lhs.edges[k]
                s, t = index[e.source], index[e.target]
                if s not in bound and t not in bound:
                    continue
                marks = ALL_EDGE_MARKS if e.mark is None else (e.mark,)
                if s == t:
                    steps.append(PlanStep(EXTEND, s, marks, k, ((LOOP, True),), s))
                elif s in bound:
                    probes = ((OUT, True), (IN, False)) if e.bidirectional else ((OUT, True),)
                    steps.append(PlanStep(EXTEND, s, marks, k, probes, t, t not in bound))
                    bound.add(t)
                else:
                    probes = ((IN, False), (OUT, True)) if e.bidirectional else ((IN, False),)
                    steps.append(PlanStep(EXTEND, t, marks, k, probes, s, True))
                    bound.add(s)
                todo_edges.remove(k)
                progressed = True
                break
        free = [i for i in range(len(lhs.nodes)) if i not in bound]
        if not free:
            break
        i = free[0]
        n = lhs.nodes[i]
        marks = ALL_NODE_MARKS if n.mark is None else (n.mark,)
        steps.append(PlanStep(BUCKET_BIND, i, marks))
        bound.add(i)
    return SearchPlan(tuple(steps))


# -- matching -----------------------------------------------------------------

@dataclass
class Match:
    nodes: dict[str, int]
    edges: dict[str, int]
    binding: dict = field(default_factory=dict)


class _Compiled:
    """Per-rule data derived once: plan plus the rewrite recipe."""

    def __init__(self, rule: Rule) -> None:
        lhs, rhs = rule.lhs, rule.rhs
        self.plan = plan(rule)
        kept = set(rule.interface)
        self.node_ids = tuple(n.id for n in lhs.nodes)
        self.edge_ids = tuple(e.id for e in lhs.edges)
        lhs_edges = {e.id: e for e in lhs.edges}
        rhs_edges = {e.id: e for e in rhs.edges}
        self.kept_edges = tuple(
            e.id for e in rhs.edges
            if e.id in lhs_edges and _edge_preserved(lhs_edges[e.id], e, kept))
        kept_e = set(self.kept_edges)
        self.deleted_edges = tuple(e.id for e in lhs.edges if e.id not in kept_e)
        self.deleted_nodes = tuple(n.id for n in lhs.nodes if n.id not in kept)
        self.created_nodes = tuple(n for n in rhs.nodes if n.id not in kept)
        self.created_edges = tuple(e for e in rhs.edges if e.id not in kept_e)
        # number of left-hand edges at each deleted node (a loop counts once)
        self.deleted_degree = {}
        for nid in self.deleted_nodes:
            self.deleted_degree[nid] = sum(
                1 for e in lhs.edges if nid in (e.source, e.target))
        self.node_updates = []
        for nid in rule.interface:
            old, new = lhs.node(nid), rhs.node(nid)
            self.node_updates.append((
                nid,
                None if new.label == old.label else new.label,
                new.mark,
                new.rooted,
            ))
        self.edge_updates = []
        for eid in self.kept_edges:
            old, new = lhs_edges[eid], rhs_edges[eid]
            self.edge_updates.append((
                eid,
                None if new.label == old.label else new.label,
                new.mark,
            ))
        self.is_identity = (not self.deleted_edges and not self.deleted_nodes
                            and not self.created_nodes and not self.created_edges
                            and all(lbl is None and (m is None or m == rule.lhs.node(n).mark)
                                    and r == rule.lhs.node(n).rooted
                                    for n, lbl, m, r in self.node_updates)
                            and all(lbl is None and (m is None or m == lhs_edges[e].mark)
                                    for e, lbl, m in self.edge_updates))


def match(g: HostGraph, rule: Rule,
          accept: Optional[Callable[[Match], bool]] = None) -> Optional[Match]:
    """First match of ``rule`` in ``g`` under the rule's search plan.

    ``accept`` can veto a complete match, in which case the search carries
    on. Matched flags are set on host items while they are bound and are
    all cleared again before returning.
    """
    c = rule.compiled
    steps = c.plan.steps
    nsteps = len(steps)
    lnodes = rule.lhs.nodes
    ledges = rule.lhs.edges
    hn: list = [None] * len(lnodes)
    he: list = [None] * len(ledges)
    found: list = []

    def node_ok(i, h, b):
        if g.already_matched(h):
            return None
        rn = lnodes[i]
        if rn.mark is not None and g.get_mark(h) != rn.mark:
            return None
        if g.is_rooted(h) != rn.rooted:
            return None
        return unify(rn.label, g.get_label(h), b)

    def search(k, b):
        if k == nsteps:
            m = Match(dict(zip(c.node_ids, hn)), dict(zip(c.edge_ids, he)), b)
            if accept is None or accept(m):
                found.append(m)
                return True
            return False
        st = steps[k]
        kind = st.kind
        if kind == EXTEND:
            anchor = hn[st.node]
            re = ledges[st.edge]
            other = st.other
            bind_other = st.bind_other
            for orient, far_is_target in st.probes:
                for mark in st.marks:
                    e = g.first_edge(anchor, mark, orient)
                    while e is not None:
                        if not g.edge_already_matched(e):
                            b2 = unify(re.label, g.get_edge_label(e), b)
                            if b2 is not None:
                                far = g.get_target(e) if far_is_target else g.get_source(e)
                                if bind_other:
                                    b3 = node_ok(other, far, b2)
                                    if b3 is not None:
                                        g.set_matched(far)
                                        g.set_edge_matched(e)
                                        hn[other] = far
                                        he[st.edge] = e
                                        if search(k + 1, b3):
                                            return True
                                        hn[other] = None
                                        he[st.edge] = None
                                        g.clear_matched(far)
                                        g.clear_edge_matched(e)
                                elif far == hn[other]:
                                    g.set_edge_matched(e)
                                    he[st.edge] = e
                                    if search(k + 1, b2):
                                        return True
                                    he[st.edge] = None
                                    g.clear_edge_matched(e)
                        e = g.next_edge_iter(anchor, mark, orient, e)
            return False
        i = st.node
        if kind == ROOT_BIND:
            h = g.first_root_node()
            while h is not None:
                b2 = node_ok(i, h, b)
                if b2 is not None:
                    g.set_matched(h)
                    hn[i] = h
                    if search(k + 1, b2):
                        return True
                    hn[i] = None
                    g.clear_matched(h)
                h = g.next_root_node(h)
            return False
        for mark in st.marks:
            h = g.first_host_node(mark)
            while h is not None:
                b2 = node_ok(i, h, b)
                if b2 is not None:
                    g.set_matched(h)
                    hn[i] = h
                    if search(k + 1, b2):
                        return True
                    hn[i] = None
                    g.clear_matched(h)
                h = g.next_host_node(mark, h)
        return False

    if not search(0, {}):
        return None
    for h in hn:
        g.clear_matched(h)
    for e in he:
        g.clear_edge_matched(e)
    return found[0]


def check_dangling(g: HostGraph, rule: Rule, m: Match) -> bool:
    """True iff deleting the rule's deleted nodes leaves no dangling edge."""
    c = rule.compiled
    for nid in c.deleted_nodes:
        h = m.nodes[nid]
        if g.indeg(h) + g.outdeg(h) + g.loopdeg(h) != c.deleted_degree[nid]:
            return False
    return True


# -- undo log -----------------------------------------------------------------

_ADD_NODE, _ADD_EDGE, _DEL_NODE, _DEL_EDGE = range(4)
_NODE_MARK, _EDGE_MARK, _NODE_LABEL, _EDGE_LABEL, _ROOT = range(4, 9)


class UndoLog:
    """Inverse mutations recorded against one graph, replayed newest first."""

    __slots__ = ("graph", "entries")

    def __init__(self, graph: Optional[HostGraph] = None) -> None:
        self.graph = graph
        self.entries: list[tuple] = []

    def __len__(self) -> int:
        return len(self.entries)

    def clear(self) -> None:
        self.entries.clear()


def rollback(g: HostGraph, log: UndoLog, to: int = 0) -> None:
    """Undo every entry of ``log`` after position ``to`` and drop them."""
    if log.graph is not None and log.graph is not g:
        raise LineageMismatch("undo log belongs to a different graph")
    entries = log.entries
    while len(entries) > to:
        op, *args = entries.pop()
        if op == _ADD_NODE:
            g.delete_node(args[0])
        elif op == _ADD_EDGE:
            g.delete_edge(args[0])
        elif op == _DEL_NODE:
            g.restore_node(*args)
        elif op == _DEL_EDGE:
            g.restore_edge(*args)
        elif op == _NODE_MARK:
            g.set_node_mark(*args)
        elif op == _EDGE_MARK:
            g.set_edge_mark(*args)
        elif op == _NODE_LABEL:
            g.set_node_label(*args)
        elif op == _EDGE_LABEL:
            g.set_edge_label(*args)
        else:
            g.set_root(*args)


def _bind(log: Optional[UndoLog], g: HostGraph) -> Optional[list]:
    if log is None:
        return None
    if log.graph is None:
        log.graph = g
    elif log.graph is not g:
        raise LineageMismatch("undo log belongs to a different graph")
    return log.entries


def apply(g: HostGraph, rule: Rule, m: Match, log: Optional[UndoLog] = None) -> dict:
    """Rewrite ``g`` at match ``m``; returns host ids of the right-hand nodes.

    Order: delete edges, delete nodes, add nodes, add edges, then update
    labels, marks and root flags of preserved items.
    """
    c = rule.compiled
    rec = _bind(log, g)
    b = m.binding
    for eid in c.deleted_edges:
        e = m.edges[eid]
        if rec is not None:
            rec.append((_DEL_EDGE, e, g.get_source(e), g.get_target(e),
                        g.get_edge_label(e), g.get_edge_mark(e)))
        g.delete_edge(e)
    for nid in c.deleted_nodes:
        h = m.nodes[nid]
        if rec is not None:
            rec.append((_DEL_NODE, h, g.get_label(h), g.get_mark(h), g.is_rooted(h)))
        g.delete_node(h)
    image = {nid: m.nodes[nid] for nid in rule.interface}
    for n in c.created_nodes:
        h = g.add_node(evaluate(n.label, b), n.mark, n.rooted)
        image[n.id] = h
        if rec is not None:
            rec.append((_ADD_NODE, h))
    for e in c.created_edges:
        h = g.add_edge(image[e.source], image[e.target], evaluate(e.label, b), e.mark)
        if rec is not None:
            rec.append((_ADD_EDGE, h))
    for nid, label, mark, rooted in c.node_updates:
        h = m.nodes[nid]
        if label is not None:
            new = evaluate(label, b)
            old = g.get_label(h)
            if new != old:
                if rec is not None:
                    rec.append((_NODE_LABEL, h, old))
                g.set_node_label(h, new)
        if mark is not None:
            old = g.get_mark(h)
            if old != mark:
                if rec is not None:
                    rec.append((_NODE_MARK, h, old))
                g.set_node_mark(h, mark)
        if g.is_rooted(h) != rooted:
            if rec is not None:
                rec.append((_ROOT, h, not rooted))
            g.set_root(h, rooted)
    for eid, label, mark in c.edge_updates:
        h = m.edges[eid]
        if label is not None:
            new = evaluate(label, b)
            old = g.get_edge_label(h)
            if new != old:
                if rec is not None:
                    rec.append((_EDGE_LABEL, h, old))
                g.set_edge_label(h, new)
        if mark is not None:
            old = g.get_edge_mark(h)
            if old != mark:
                if rec is not None:
                    rec.append((_EDGE_MARK, h, old))
                g.set_edge_mark(h, mark)
    return image


def try_apply(g: HostGraph, rule: Rule, log: Optional[UndoLog] = None) -> Optional[Match]:
    """Match (respecting the dangling condition) and apply; the match or None."""
    c = rule.compiled
    accept = (lambda m: check_dangling(g, rule, m)) if c.deleted_nodes else None
    m = match(g, rule, accept)
    if m is None:
        return None
    if not c.is_identity:
        apply(g, rule, m, log)
    return m


def apply_rule(g: HostGraph, rule: Rule, log: Optional[UndoLog] = None) -> bool:
    return try_apply(g, rule, log) is not None
