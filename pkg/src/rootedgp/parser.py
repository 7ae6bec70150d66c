"""Text formats for host graphs (``.gpg``), rules (``.gpr``) and programs (``.gpp``).

Host graph::

    [ (n0(R), "a":1 # red) (n1, empty # grey) | (e0, n0, n1, 5) ]

Rule::

    next(x,y:list, n:int)
      [ (1(R), x:n # blue) (2, y # grey) | ]
      => [ (1, x:n # blue) (2(R), y:n+1 # blue) | ]
      interface {1, 2}

Edges of a rule may carry ``(B)`` to match in either direction. Marks are
``red``, ``green``, ``blue``, ``grey``, ``dashed`` and, in rules only,
``any``.

Program::

    Main = try init then (DFS!; Check)
    DFS = forward!; try back else break
    Check = if match then fail

``try``/``if`` branches are single blocks, so ``try A then B; C`` runs ``C``
after the whole ``try``. A name resolves to a procedure when one of that name
is declared, otherwise to a rule.

Every parse error is reported as a :class:`ParseError` holding one or more
:class:`Diagnostic` entries with 1-based line and column.
"""

from __future__ import annotations

import pathlib
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .engine import Rule, RuleEdge, RuleError, RuleGraph, RuleNode
from .interpreter import (Break, Call, Command, Fail, If, Loop, Program, RuleCall, Seq,
                          Skip, Try, breaks_outside_loops, walk)
from .labels import INT64_MAX, INT64_MIN, Const, Sum, Var, VarType
from .store import EdgeMark, GraphError, HostGraph, NodeMark

NODE_MARKS = {"red": NodeMark.RED, "green": NodeMark.GREEN, "blue": NodeMark.BLUE,
              "grey": NodeMark.GREY}
EDGE_MARKS = {"dashed": EdgeMark.DASHED, "red": EdgeMark.RED, "green": EdgeMark.GREEN,
              "blue": EdgeMark.BLUE}
KEYWORDS = {"try", "then", "else", "if", "break", "skip", "fail"}


class Diagnostic(NamedTuple):
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


# -- lexer --------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str      # ident, int, string, punct, eof
    text: str
    line: int
    col: int
    value: object = None


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>=>|[()\[\]{},:;|#!+\-=])
""", re.VERBOSE | re.DOTALL)

_UNESCAPE = re.compile(r"\\(.)")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text.startswith("/*", pos):
                raise ParseError([Diagnostic(line, col, "unterminated comment")])
            if text[pos] == '"':
                raise ParseError([Diagnostic(line, col, "unterminated string")])
            raise ParseError([Diagnostic(line, col, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        s = m.group()
        if kind == "string":
            tokens.append(Token("string", s, line, col, _UNESCAPE.sub(r"\1", s[1:-1])))
        elif kind == "int":
            tokens.append(Token("int", s, line, col, int(s)))
        elif kind in ("ident", "punct"):
            tokens.append(Token(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = m.start() + s.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0
        self.refs: list[tuple[Token, RuleCall]] = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError([Diagnostic(t.line, t.col, msg)])

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.describe()}")
        return self.advance()

    def describe(self) -> str:
        t = self.tok
        return "end of input" if t.kind == "eof" else repr(t.text)

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.describe()}")
        return self.advance()

    def end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.describe()} after the end")

    # -- atoms and labels --------------------------------------------------

    def int_literal(self) -> int:
        start = self.tok
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            raise self.error(f"expected an integer, found {self.describe()}")
        v = self.advance().value
        v = -v if neg else v
        if not INT64_MIN <= v <= INT64_MAX:
            raise self.error("integer does not fit in 64 bits", start)
        return v

    def host_atom(self):
        if self.tok.kind == "string":
            return self.advance().value
        if self.tok.kind == "int" or self.at("-"):
            return self.int_literal()
        raise self.error(f"expected an integer or string, found {self.describe()}")

    def host_label(self) -> tuple:
        if self.at("empty"):
            self.advance()
            return ()
        atoms = [self.host_atom()]
        while self.at(":"):
            self.advance()
            atoms.append(self.host_atom())
        return tuple(atoms)

    def mark(self, table: dict, allow_any: bool, default):
        if not self.at("#"):
            return default
        self.advance()
        t = self.ident("a mark")
        if t.text == "any" and allow_any:
            return None
        if t.text not in table:
            raise self.error(f"unknown mark {t.text!r}", t)
        return table[t.text]

    def item_id(self, prefix: str, what: str) -> tuple[int, Token]:
        t = self.ident(what)
        m = re.fullmatch(prefix + r"([0-9]+)", t.text)
        if m is None:
            raise self.error(f"{what} must look like {prefix}<number>, found {t.text!r}", t)
        return int(m.group(1)), t

    def flag(self, letter: str) -> bool:
        if self.at("(") and self.peek().kind == "ident" and self.peek().text == letter \
                and self.peek(2).text == ")":
            self.advance()
            self.advance()
            self.advance()
            return True
        return False

    # -- host graphs ------------------------------------------------------

    def host_graph(self, backend: str) -> HostGraph:
        g = HostGraph.create(backend)
        self.expect("[")
        while self.at("("):
            self.advance()
            nid, t = self.item_id("n", "node id")
            rooted = self.flag("R")
            self.expect(",")
            label = self.host_label()
            mark = self.mark(NODE_MARKS, False, NodeMark.UNMARKED)
            self.expect(")")
            if g.is_node(nid):
                raise self.error(f"duplicate node id n{nid}", t)
            g.restore_node(nid, label, mark, rooted)
        self.expect("|")
        while self.at("("):
            self.advance()
            eid, t = self.item_id("e", "edge id")
            self.expect(",")
            src, st = self.item_id("n", "source node id")
            self.expect(",")
            tgt, tt = self.item_id("n", "target node id")
            self.expect(",")
            label = self.host_label()
            mark = self.mark(EDGE_MARKS, False, EdgeMark.UNMARKED)
            self.expect(")")
            for nid, tok in ((src, st), (tgt, tt)):
                if not g.is_node(nid):
                    raise self.error(f"edge e{eid} refers to unknown node n{nid}", tok)
            if g.is_edge(eid):
                raise self.error(f"duplicate edge id e{eid}", t)
            g.restore_edge(eid, src, tgt, label, mark)
        self.expect("]")
        return g

    # -- rules ------------------------------------------------------------

    def var_decls(self) -> tuple[tuple[str, VarType], ...]:
        out: list[tuple[str, VarType]] = []
        seen: set[str] = set()
        self.expect("(")
        if self.at(")"):
            self.advance()
            return ()
        while True:
            names = [self.ident("variable name")]
            while self.at(","):
                self.advance()
                names.append(self.ident("variable name"))
            self.expect(":")
            tt = self.ident("a type")
            try:
                vtype = VarType(tt.text)
            except ValueError:
                raise self.error(f"unknown type {tt.text!r}", tt) from None
            for nt in names:
                if nt.text in seen:
                    raise self.error(f"variable {nt.text} declared twice", nt)
                seen.add(nt.text)
                out.append((nt.text, vtype))
            if self.at(",") or self.at(";"):
                self.advance()
                continue
            self.expect(")")
            return tuple(out)

    def rule_label(self, decls: dict) -> tuple:
        if self.at("empty"):
            self.advance()
            return ()
        terms = [self.term(decls)]
        while self.at(":"):
            self.advance()
            terms.append(self.term(decls))
        return tuple(terms)

    def term(self, decls: dict):
        t = self.primary(decls)
        while self.at("+"):
            self.advance()
            t = Sum(t, self.primary(decls))
        return t

    def primary(self, decls: dict):
        tok = self.tok
        if tok.kind == "string":
            return Const(self.advance().value)
        if tok.kind == "int" or self.at("-"):
            return Const(self.int_literal())
        if self.at("("):
            self.advance()
            t = self.term(decls)
            self.expect(")")
            return t
        if tok.kind == "ident" and tok.text != "empty":
            self.advance()
            if tok.text not in decls:
                raise self.error(f"undeclared variable {tok.text!r}", tok)
            return Var(tok.text, decls[tok.text])
        raise self.error(f"expected a label term, found {self.describe()}")

    def rule_item_id(self, what: str) -> tuple[str, Token]:
        t = self.tok
        if t.kind in ("int", "ident"):
            self.advance()
            return t.text, t
        raise self.error(f"expected {what}, found {self.describe()}")

    def rule_graph(self, decls: dict) -> RuleGraph:
        nodes, edges = [], []
        self.expect("[")
        while self.at("("):
            self.advance()
            nid, _ = self.rule_item_id("node id")
            rooted = self.flag("R")
            self.expect(",")
            label = self.rule_label(decls)
            mark = self.mark(NODE_MARKS, True, NodeMark.UNMARKED)
            self.expect(")")
            nodes.append(RuleNode(nid, label, mark, rooted))
        self.expect("|")
        while self.at("("):
            self.advance()
            eid, _ = self.rule_item_id("edge id")
            bidi = self.flag("B")
            self.expect(",")
            src, _ = self.rule_item_id("source node id")
            self.expect(",")
            tgt, _ = self.rule_item_id("target node id")
            self.expect(",")
            label = self.rule_label(decls)
            mark = self.mark(EDGE_MARKS, True, EdgeMark.UNMARKED)
            self.expect(")")
            edges.append(RuleEdge(eid, src, tgt, label, mark, bidi))
        self.expect("]")
        return RuleGraph(tuple(nodes), tuple(edges))

    def rule(self) -> Rule:
        name = self.ident("rule name")
        variables = self.var_decls()
        decls = dict(variables)
        lhs = self.rule_graph(decls)
        self.expect("=>")
        rhs = self.rule_graph(decls)
        self.expect("interface")
        self.expect("{")
        iface = []
        if not self.at("}"):
            iface.append(self.rule_item_id("interface node id")[0])
            while self.at(","):
                self.advance()
                iface.append(self.rule_item_id("interface node id")[0])
        self.expect("}")
        try:
            return Rule(name.text, variables, lhs, rhs, tuple(iface))
        except RuleError as exc:
            raise self.error(str(exc), name) from None

    # -- programs ---------------------------------------------------------

    def command(self) -> Command:
        cmds = [self.branch()]
        while self.at(";"):
            self.advance()
            cmds.append(self.branch())
        return cmds[0] if len(cmds) == 1 else Seq(tuple(cmds))

    def branch(self) -> Command:
        if self.at("try"):
            self.advance()
            cond = self.block()
            then = orelse = None
            if self.at("then"):
                self.advance()
                then = self.block()
            if self.at("else"):
                self.advance()
                orelse = self.block()
            return Try(cond, then, orelse)
        if self.at("if"):
            self.advance()
            cond = self.block()
            self.expect("then")
            then = self.block()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.block()
            return If(cond, then, orelse)
        return self.block()

    def block(self) -> Command:
        tok = self.tok
        if self.at("("):
            self.advance()
            cmd = self.command()
            self.expect(")")
        elif self.at("{"):
            self.advance()
            names = [self.ident("rule name").text]
            while self.at(","):
                self.advance()
                names.append(self.ident("rule name").text)
            self.expect("}")
            cmd = RuleCall(tuple(names), braced=True)
        elif self.at("break"):
            self.advance()
            cmd = Break((tok.line, tok.col))
        elif self.at("skip"):
            self.advance()
            cmd = Skip()
        elif self.at("fail"):
            self.advance()
            cmd = Fail()
        elif tok.kind == "ident" and tok.text not in KEYWORDS:
            self.advance()
            cmd = RuleCall((tok.text,))
            self.refs.append((tok, cmd))
        else:
            raise self.error(f"expected a command, found {self.describe()}")
        while self.at("!"):
            self.advance()
            cmd = Loop(cmd)
        return cmd


# -- public parse API -----------------------------------------------------------

def parse_host_graph(text: str, backend: str = "indexed") -> HostGraph:
    p = _Parser(text)
    try:
        g = p.host_graph(backend)
    except GraphError as exc:  # pragma: no cover - guarded by explicit checks
        raise p.error(str(exc)) from None
    p.end()
    return g


def parse_rule(text: str) -> Rule:
    p = _Parser(text)
    r = p.rule()
    p.end()
    return r


def parse_rules(text: str) -> dict[str, Rule]:
    p = _Parser(text)
    rules: dict[str, Rule] = {}
    while p.tok.kind != "eof":
        t = p.tok
        r = p.rule()
        if r.name in rules:
            raise p.error(f"rule {r.name} defined twice", t)
        rules[r.name] = r
    return rules


def parse_program(text: str, rules: Optional[dict[str, Rule]] = None,
                  entry: str = "Main") -> Program:
    """Parse procedure declarations, optionally interleaved with rules.

    Rules defined in ``text`` are added to ``rules``. Names that are
    neither procedures nor rules are reported, as are breaks that can be
    reached outside any loop.
    """
    p = _Parser(text)
    procs: dict[str, Command] = {}
    all_rules: dict[str, Rule] = dict(rules or {})
    decl_tok: dict[str, Token] = {}
    diags: list[Diagnostic] = []
    if p.tok.kind == "eof":
        raise p.error("empty program")
    while p.tok.kind != "eof":
        t = p.ident("a declaration")
        if p.at("="):
            p.advance()
            if t.text in procs:
                raise p.error(f"procedure {t.text} defined twice", t)
            decl_tok[t.text] = t
            procs[t.text] = p.command()
        elif p.at("("):
            p.i -= 1
            r = p.rule()
            all_rules[r.name] = r
        else:
            raise p.error(f"expected '=' or '(' after {t.text!r}, found {p.describe()}")
    # resolve bare names
    resolved: dict[int, Command] = {}
    for tok, cmd in p.refs:
        name = cmd.names[0]
        if name in procs:
            resolved[id(cmd)] = Call(name)
        elif name not in all_rules:
            diags.append(Diagnostic(tok.line, tok.col, f"unknown rule or procedure {name!r}"))
    for name, cmd in procs.items():
        procs[name] = _substitute(cmd, resolved)
        for node in walk(procs[name]):
            if isinstance(node, RuleCall) and node.braced:
                for n in node.names:
                    if n not in all_rules:
                        t = decl_tok[name]
                        diags.append(Diagnostic(t.line, t.col,
                                                f"unknown rule {n!r} in a rule set of {name}"))
    for name in set(procs) & set(all_rules):
        t = decl_tok[name]
        diags.append(Diagnostic(t.line, t.col, f"{name} is both a rule and a procedure"))
    if entry not in procs:
        diags.append(Diagnostic(1, 1, f"missing entry procedure {entry}"))
    if diags:
        raise ParseError(diags)
    prog = Program(procs, all_rules, entry)
    stray = breaks_outside_loops(prog)
    if stray:
        diags = []
        for proc, brk in stray:
            line, col = brk.pos or (decl_tok[proc].line, decl_tok[proc].col)
            diags.append(Diagnostic(line, col, "BreakOutsideLoop: break is not inside a loop"))
        raise ParseError(diags)
    return prog


def _substitute(cmd: Command, resolved: dict[int, Command]) -> Command:
    if isinstance(cmd, RuleCall):
        return resolved.get(id(cmd), cmd)
    if isinstance(cmd, Seq):
        return Seq(tuple(_substitute(c, resolved) for c in cmd.commands))
    if isinstance(cmd, Try):
        return Try(_substitute(cmd.cond, resolved),
                   None if cmd.then is None else _substitute(cmd.then, resolved),
                   None if cmd.orelse is None else _substitute(cmd.orelse, resolved))
    if isinstance(cmd, If):
        return If(_substitute(cmd.cond, resolved), _substitute(cmd.then, resolved),
                  None if cmd.orelse is None else _substitute(cmd.orelse, resolved))
    if isinstance(cmd, Loop):
        return Loop(_substitute(cmd.body, resolved))
    return cmd


# -- printers -------------------------------------------------------------------

_NODE_MARK_NAMES = {v: k for k, v in NODE_MARKS.items()}
_EDGE_MARK_NAMES = {v: k for k, v in EDGE_MARKS.items()}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _atom(a) -> str:
    return _quote(a) if isinstance(a, str) else str(a)


def format_host_label(label: tuple) -> str:
    return ":".join(_atom(a) for a in label) if label else "empty"


def print_host_graph(g: HostGraph) -> str:
    """Single-line text of ``g`` in id order."""
    items = []
    for n in sorted(g.nodes()):
        root = "(R)" if g.is_rooted(n) else ""
        mark = g.get_mark(n)
        m = f" # {_NODE_MARK_NAMES[mark]}" if mark != NodeMark.UNMARKED else ""
        items.append(f"(n{n}{root}, {format_host_label(g.get_label(n))}{m})")
    items.append("|")
    for e in sorted(g.edges()):
        mark = g.get_edge_mark(e)
        m = f" # {_EDGE_MARK_NAMES[mark]}" if mark != EdgeMark.UNMARKED else ""
        items.append(f"(e{e}, n{g.get_source(e)}, n{g.get_target(e)}, "
                     f"{format_host_label(g.get_edge_label(e))}{m})")
    return "[ " + " ".join(items) + " ]"


def _term(t, nested: bool = False) -> str:
    if isinstance(t, Const):
        return _atom(t.value)
    if isinstance(t, Var):
        return t.name
    s = f"{_term(t.left)}+{_term(t.right, True)}"
    return f"({s})" if nested else s


def format_rule_label(expr: tuple) -> str:
    return ":".join(_term(t) for t in expr) if expr else "empty"


def _rule_mark(mark, names: dict, unmarked) -> str:
    if mark is None:
        return " # any"
    return "" if mark == unmarked else f" # {names[mark]}"


def _rule_graph(rg: RuleGraph) -> str:
    items = []
    for n in rg.nodes:
        root = "(R)" if n.rooted else ""
        items.append(f"({n.id}{root}, {format_rule_label(n.label)}"
                     f"{_rule_mark(n.mark, _NODE_MARK_NAMES, NodeMark.UNMARKED)})")
    items.append("|")
    for e in rg.edges:
        b = "(B)" if e.bidirectional else ""
        items.append(f"({e.id}{b}, {e.source}, {e.target}, {format_rule_label(e.label)}"
                     f"{_rule_mark(e.mark, _EDGE_MARK_NAMES, EdgeMark.UNMARKED)})")
    return "[ " + " ".join(items) + " ]"


def _var_decls(variables) -> str:
    groups: list[tuple[list[str], VarType]] = []
    for name, vtype in variables:
        if groups and groups[-1][1] is vtype:
            groups[-1][0].append(name)
        else:
            groups.append(([name], vtype))
    return ", ".join(",".join(names) + ":" + vtype.value for names, vtype in groups)


def print_rule(rule: Rule) -> str:
    return (f"{rule.name}({_var_decls(rule.variables)})\n"
            f"  {_rule_graph(rule.lhs)}\n"
            f"  => {_rule_graph(rule.rhs)}\n"
            f"  interface {{{', '.join(rule.interface)}}}")


def print_rules(rules: Iterable[Rule]) -> str:
    return "\n\n".join(print_rule(r) for r in rules) + "\n"


def format_command(cmd: Command) -> str:
    if isinstance(cmd, Seq):
        return "; ".join(_seq_item(c) for c in cmd.commands)
    if isinstance(cmd, Try):
        s = "try " + _block(cmd.cond)
        if cmd.then is not None:
            s += " then " + _block(cmd.then)
        if cmd.orelse is not None:
            s += " else " + _block(cmd.orelse)
        return s
    if isinstance(cmd, If):
        s = f"if {_block(cmd.cond)} then {_block(cmd.then)}"
        if cmd.orelse is not None:
            s += " else " + _block(cmd.orelse)
        return s
    if isinstance(cmd, Loop):
        body = cmd.body
        inner = format_command(body)
        if isinstance(body, (Seq, Try, If)):
            inner = f"({inner})"
        return inner + "!"
    if isinstance(cmd, RuleCall):
        if cmd.braced or len(cmd.names) != 1:
            return "{" + ", ".join(cmd.names) + "}"
        return cmd.names[0]
    if isinstance(cmd, Call):
        return cmd.name
    if isinstance(cmd, Break):
        return "break"
    if isinstance(cmd, Skip):
        return "skip"
    if isinstance(cmd, Fail):
        return "fail"
    raise TypeError(f"not a command: {cmd!r}")


def _seq_item(cmd: Command) -> str:
    s = format_command(cmd)
    return f"({s})" if isinstance(cmd, Seq) else s


def _block(cmd: Command) -> str:
    s = format_command(cmd)
    return f"({s})" if isinstance(cmd, (Seq, Try, If)) else s


def print_program(prog: Program, *, with_rules: bool = False) -> str:
    lines = [f"{name} = {format_command(cmd)}" for name, cmd in prog.procedures.items()]
    text = "\n".join(lines) + "\n"
    if with_rules:
        text += "\n" + print_rules(prog.rules.values())
    return text


def same_tokens(a: str, b: str) -> bool:
    """Equal up to whitespace and comments."""
    ta = [(t.kind, t.text) for t in tokenize(a)]
    tb = [(t.kind, t.text) for t in tokenize(b)]
    return ta == tb


# -- files ----------------------------------------------------------------------

def load_host_graph(path, backend: str = "indexed") -> HostGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_host_graph(fh.read(), backend)


def save_host_graph(g: HostGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(print_host_graph(g) + "\n")


def load_rules(path) -> dict[str, Rule]:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def load_program(path, rules: Optional[dict[str, Rule]] = None) -> Program:
    """Load a ``.gpp`` file; a sibling ``.gpr`` with the same stem supplies rules."""
    path = pathlib.Path(path)
    if rules is None:
        rpath = path.with_suffix(".gpr")
        rules = load_rules(rpath) if rpath.exists() else {}
    return parse_program(path.read_text(encoding="utf-8"), rules)
