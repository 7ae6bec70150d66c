"""The five case-study programs and the benchmark graph families.

Programs are built directly as IR here; ``corpus/`` holds the same programs
as text and the test-suite checks that both agree.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional

from .engine import Rule, RuleEdge, RuleGraph, RuleNode
from .interpreter import Break, Call, Command, Fail, If, Loop, Program, RuleCall, Seq, Try
from .labels import Const, Sum, Var, VarType
from .store import EdgeMark, HostGraph, NodeMark

PROGRAM_NAMES = ("is-connected", "is-discrete", "is-dag", "component-numbering", "bfs")
FAMILY_NAMES = ("list", "cycle", "grid", "tree", "star", "discrete", "kkstar")


class UnknownProgram(KeyError):
    pass


class InvalidSize(ValueError):
    pass


# -- rule construction helpers ----------------------------------------------------

GREY, RED, GREEN, BLUE = NodeMark.GREY, NodeMark.RED, NodeMark.GREEN, NodeMark.BLUE
UNMARKED = NodeMark.UNMARKED
E_NONE, E_DASHED, E_RED, E_BLUE = EdgeMark.UNMARKED, EdgeMark.DASHED, EdgeMark.RED, EdgeMark.BLUE
ANY = None

LIST = VarType.LIST
x, y, z = (Var(n, LIST) for n in "xyz")


def _node(nid, label, mark, root=False) -> RuleNode:
    return RuleNode(nid, label, mark, root)


def _rule(name, variables, lhs_nodes, rhs_nodes, lhs_edges=(), rhs_edges=(),
          interface=("1",)) -> Rule:
    return Rule(name, tuple(variables), RuleGraph(tuple(lhs_nodes), tuple(lhs_edges)),
                RuleGraph(tuple(rhs_nodes), tuple(rhs_edges)), tuple(interface))


def _relabel(name, before, after, *, vars_=("x",)) -> Rule:
    """One-node rule changing (mark, rooted) of node 1 labelled ``x``."""
    return _rule(name, [(v, LIST) for v in vars_],
                 [_node("1", (x,), *before)], [_node("1", (x,), *after)])


def _edge_rule(name, root_mark, far_before, far_after, e_before, e_after, *,
               bidirectional=False, root_after=None, root_moves=False) -> Rule:
    """Two-node rule: rooted node 1 joined to node 2 by edge e1 (1 to 2)."""
    root_after = root_mark if root_after is None else root_after
    lhs = [_node("1", (x,), root_mark, True), _node("2", (y,), far_before)]
    rhs = [_node("1", (x,), root_after, not root_moves),
           _node("2", (y,), far_after, root_moves)]
    return _rule(name, [("x", LIST), ("y", LIST), ("z", LIST)], lhs, rhs,
                 [RuleEdge("e1", "1", "2", (z,), e_before, bidirectional)],
                 [RuleEdge("e1", "1", "2", (z,), e_after, bidirectional)],
                 ("1", "2"))


def _back_rule(name, mark, far_after, edge_after, bidirectional) -> Rule:
    """Move the root from node 2 back along a dashed edge to node 1."""
    lhs = [_node("1", (x,), mark), _node("2", (y,), mark, True)]
    rhs = [_node("1", (x,), mark, True), _node("2", (y,), far_after)]
    return _rule(name, [("x", LIST), ("y", LIST), ("z", LIST)], lhs, rhs,
                 [RuleEdge("e1", "1", "2", (z,), E_DASHED, bidirectional)],
                 [RuleEdge("e1", "1", "2", (z,), edge_after, bidirectional)],
                 ("1", "2"))


def _seq(*cmds: Command) -> Seq:
    return Seq(tuple(cmds))


def _r(*names: str) -> RuleCall:
    return RuleCall(tuple(names), braced=len(names) > 1)


# -- the programs -----------------------------------------------------------------

def _is_connected() -> Program:
    rules = [
        _relabel("init", (GREY,), (BLUE, True)),
        _relabel("match", (GREY,), (GREY,)),
        _edge_rule("forward", BLUE, GREY, BLUE, E_NONE, E_DASHED,
                   bidirectional=True, root_moves=True),
        _back_rule("back", BLUE, UNMARKED, E_NONE, True),
    ]
    procs = {
        "Main": Try(_r("init"), _seq(Loop(Call("DFS")), Call("Check"))),
        "DFS": _seq(Loop(_r("forward")), Try(_r("back"), None, Break())),
        "Check": If(_r("match"), Fail()),
    }
    return Program(procs, {r.name: r for r in rules})


def _is_discrete() -> Program:
    rules = [
        _relabel("mark", (UNMARKED,), (RED, True)),
        _rule("isolated", [("x", LIST)], [_node("1", (x,), RED, True)],
              [_node("1", (x,), RED)], interface=()),
        _relabel("root", (RED, True), (RED, True)),
    ]
    procs = {
        "Main": _seq(Loop(_seq(_r("mark"), Try(_r("isolated"), None, Break()))),
                     If(_r("root"), Fail())),
    }
    return Program(procs, {r.name: r for r in rules})


def _is_dag() -> Program:
    rules = [
        _relabel("init", (GREY,), (RED, True)),
        _relabel("unroot", (RED, True), (BLUE,)),
        _relabel("set_flag", (RED, True), (GREEN, True)),
        _relabel("flag", (GREEN, True), (GREEN, True)),
        _edge_rule("next_edge", RED, ANY, ANY, E_NONE, E_RED),
        _edge_rule("ignore", RED, BLUE, BLUE, E_RED, E_BLUE),
        _edge_rule("move", RED, GREY, RED, E_RED, E_DASHED, root_moves=True),
        _back_rule("back", RED, BLUE, E_BLUE, False),
        _rule("loop", [("x", LIST), ("z", LIST)],
              [_node("1", (x,), RED, True)], [_node("1", (x,), GREEN, True)],
              [RuleEdge("e1", "1", "1", (z,), E_NONE)],
              [RuleEdge("e1", "1", "1", (z,), E_NONE)]),
    ]
    dfs = Try(_r("next_edge"),
              Try(_r("move", "ignore"), None, _seq(_r("set_flag"), Break())),
              _seq(Try(_r("loop")), Try(_r("back"), None, Break())))
    procs = {
        "Main": _seq(Loop(_seq(_r("init"), Loop(Call("DFS")),
                               Try(_r("unroot"), None, Break()))),
                     Call("Check")),
        "DFS": dfs,
        "Check": If(_r("flag"), Fail()),
    }
    return Program(procs, {r.name: r for r in rules})


def _component_numbering() -> Program:
    n, i = Var("n", VarType.INT), Var("i", VarType.INT)
    rules = [
        _rule("init", [("x", LIST)], [_node("1", (x,), GREY)],
              [_node("1", (x, Const(1)), BLUE, True)]),
        _relabel("unroot", (BLUE, True), (BLUE,)),
        _rule("next", [("x", LIST), ("y", LIST), ("n", VarType.INT)],
              [_node("1", (x, n), BLUE, True), _node("2", (y,), GREY)],
              [_node("1", (x, n), BLUE), _node("2", (y, Sum(n, Const(1))), BLUE, True)],
              interface=("1", "2")),
        _edge_rule("next_edge", BLUE, ANY, ANY, E_NONE, E_RED, bidirectional=True),
        _edge_rule("ignore", BLUE, BLUE, BLUE, E_RED, E_BLUE, bidirectional=True),
        _rule("move", [("x", LIST), ("y", LIST), ("z", LIST), ("i", VarType.INT)],
              [_node("1", (x, i), BLUE, True), _node("2", (y,), GREY)],
              [_node("1", (x, i), BLUE), _node("2", (y, i), BLUE, True)],
              [RuleEdge("e1", "1", "2", (z,), E_RED, True)],
              [RuleEdge("e1", "1", "2", (z,), E_DASHED, True)],
              ("1", "2")),
        _back_rule("back", BLUE, BLUE, E_BLUE, True),
    ]
    procs = {
        "Main": _seq(Try(_r("init"), Loop(Call("DFS"))),
                     Loop(Try(_r("next"), Loop(Call("DFS")), Break())),
                     Try(_r("unroot"))),
        "DFS": _seq(Loop(_seq(_r("next_edge"), _r("move", "ignore"))),
                    Try(_r("back"), None, Break())),
    }
    return Program(procs, {r.name: r for r in rules})


def _bfs() -> Program:
    rules = [
        _relabel("init", (GREY,), (GREEN,)),
        _relabel("root", (RED,), (RED, True)),
        _relabel("unroot", (RED, True), (BLUE,)),
        _relabel("mark", (GREEN,), (RED,)),
        _edge_rule("next_edge", RED, ANY, ANY, E_NONE, E_RED, bidirectional=True),
        _edge_rule("ignore", RED, ANY, ANY, E_RED, E_BLUE, bidirectional=True),
        _edge_rule("move", RED, GREY, GREEN, E_RED, E_BLUE, bidirectional=True),
    ]
    procs = {
        "Main": Loop(_seq(_r("init"), Loop(Call("BFS")))),
        "BFS": _seq(Try(_r("mark"), None, Break()),
                    Loop(_r("mark")),
                    Loop(_seq(_r("root"),
                              Loop(_seq(_r("next_edge"), Try(_r("move"), None, _r("ignore")))),
                              _r("unroot")))),
    }
    return Program(procs, {r.name: r for r in rules})


_BUILDERS: dict[str, Callable[[], Program]] = {
    "is-connected": _is_connected,
    "is-discrete": _is_discrete,
    "is-dag": _is_dag,
    "component-numbering": _component_numbering,
    "bfs": _bfs,
}

# is-discrete reads unmarked input; the others expect grey nodes.
INPUT_MARK = {name: GREY for name in PROGRAM_NAMES}
INPUT_MARK["is-discrete"] = UNMARKED


def build_program(name: str) -> Program:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownProgram(f"unknown program {name!r}; choose from "
                             f"{', '.join(PROGRAM_NAMES)}") from None
    prog = builder()
    prog.validate()
    return prog


def input_mark(program: str) -> NodeMark:
    """Node mark a program expects on its input graph."""
    try:
        return INPUT_MARK[program]
    except KeyError:
        raise UnknownProgram(program) from None


def prepare_input(g: HostGraph, program: str) -> HostGraph:
    """Remark every node of ``g`` to the program's expected input mark."""
    mark = input_mark(program)
    for n in list(g.nodes()):
        if g.get_mark(n) != mark:
            g.set_node_mark(n, mark)
    return g


# -- graph families ---------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    kind: str
    params: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind}({', '.join(map(str, self.params))})"


def List(n: int) -> Family:  # noqa: N802 - family constructors read like the figures
    return Family("list", (n,))


def Cycle(n: int) -> Family:  # noqa: N802
    return Family("cycle", (n,))


def Grid(w: int, h: int) -> Family:  # noqa: N802
    return Family("grid", (w, h))


def BinaryTree(n: int) -> Family:  # noqa: N802
    return Family("tree", (n,))


def Star(k: int) -> Family:  # noqa: N802
    return Family("star", (k,))


def Discrete(n: int) -> Family:  # noqa: N802
    return Family("discrete", (n,))


def KKStar(k: int) -> Family:  # noqa: N802
    return Family("kkstar", (k,))


def _nodes(g: HostGraph, n: int, mark: NodeMark) -> list[int]:
    return [g.add_node((), mark) for _ in range(n)]


def _check_size(*values: int) -> None:
    for v in values:
        if not isinstance(v, int) or v < 1:
            raise InvalidSize(f"family sizes must be integers >= 1, got {v!r}")


def generate(family: Family, backend: str = "indexed",
             node_mark: NodeMark = GREY) -> HostGraph:
    """Build a member of ``family``; nodes carry ``node_mark``, edges are unmarked."""
    _check_size(*family.params)
    g = HostGraph.create(backend)
    kind = family.kind
    if kind == "list":
        (n,) = family.params
        v = _nodes(g, n, node_mark)
        for a, b in zip(v, v[1:]):
            g.add_edge(a, b)
    elif kind == "cycle":
        (n,) = family.params
        v = _nodes(g, n, node_mark)
        for k in range(n):
            g.add_edge(v[k], v[(k + 1) % n])
    elif kind == "grid":
        w, h = family.params
        v = _nodes(g, w * h, node_mark)
        for r in range(h):
            for c in range(w):
                if c + 1 < w:
                    g.add_edge(v[r * w + c], v[r * w + c + 1])
                if r + 1 < h:
                    g.add_edge(v[r * w + c], v[(r + 1) * w + c])
    elif kind == "tree":
        (n,) = family.params
        v = _nodes(g, n, node_mark)
        for k in range(1, n):
            g.add_edge(v[(k - 1) // 2], v[k])
    elif kind == "star":
        (k,) = family.params
        centre = g.add_node((), node_mark)
        for s in range(k):
            spoke = g.add_node((), node_mark)
            if s % 2 == 0:
                g.add_edge(centre, spoke)
            else:
                g.add_edge(spoke, centre)
    elif kind == "discrete":
        (n,) = family.params
        _nodes(g, n, node_mark)
    elif kind == "kkstar":
        (k,) = family.params
        for _ in range(k):
            centre = g.add_node((), node_mark)
            for _ in range(k):
                g.add_edge(g.add_node((), node_mark), centre)
    else:
        raise ValueError(f"unknown family {kind!r}")
    return g


def family_for_size(name: str, size: int) -> Family:
    """Family member whose node count plus edge count is close to ``size``."""
    if not isinstance(size, int) or size < 1:
        raise InvalidSize(f"size must be an integer >= 1, got {size!r}")
    if name == "list":
        return List(max(1, (size + 1) // 2))
    if name == "cycle":
        return Cycle(max(1, size // 2))
    if name == "grid":
        w = max(1, round(math.sqrt(size / 3)))
        return Grid(w, w)
    if name == "tree":
        return BinaryTree(max(1, (size + 1) // 2))
    if name == "star":
        return Star(max(1, (size - 1) // 2))
    if name == "discrete":
        return Discrete(size)
    if name == "kkstar":
        return KKStar(max(1, round((math.sqrt(1 + 8 * size) - 1) / 4)))
    raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")


def random_digraph(n: int, m: int, seed: int, backend: str = "indexed",
                   node_mark: NodeMark = GREY) -> HostGraph:
    """Simple digraph with ``m`` distinct ordered pairs drawn uniformly."""
    if not isinstance(n, int) or n < 1:
        raise InvalidSize(f"n must be an integer >= 1, got {n!r}")
    if not isinstance(m, int) or m < 0 or m > n * (n - 1):
        raise InvalidSize(f"m must lie in [0, n(n-1)] = [0, {n * (n - 1)}], got {m!r}")
    rng = random.Random(seed)
    g = HostGraph.create(backend)
    v = _nodes(g, n, node_mark)
    for code in rng.sample(range(n * (n - 1)), m):
        s, t = divmod(code, n - 1)
        if t >= s:
            t += 1
        g.add_edge(v[s], v[t])
    return g


def random_family_graph(size: int, seed: int, backend: str = "indexed",
                        node_mark: NodeMark = GREY) -> HostGraph:
    """Random digraph with about ``size`` nodes plus edges (twice as many edges as nodes)."""
    n = max(1, size // 3)
    return random_digraph(n, min(size - n, n * (n - 1)) if size > n else 0, seed,
                          backend, node_mark)


def build_input(program: Optional[str], family: Family, backend: str = "indexed") -> HostGraph:
    mark = GREY if program is None else input_mark(program)
    return generate(family, backend, mark)


def corpus_dir():
    """Directory of the shipped ``.gpp``/``.gpr``/``.gpg`` files."""
    from importlib.resources import files

    return files("rootedgp") / "corpus"


def load_corpus_program(name: str) -> Program:
    from .parser import parse_program, parse_rules

    d = corpus_dir()
    if name not in PROGRAM_NAMES:
        raise UnknownProgram(name)
    rules = parse_rules((d / f"{name}.gpr").read_text(encoding="utf-8"))
    return parse_program((d / f"{name}.gpp").read_text(encoding="utf-8"), rules)
