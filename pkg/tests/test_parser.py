from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (MALFORMED_GRAPHS, MALFORMED_PROGRAMS, MALFORMED_RULES, check_diagnosed,
                     mutate_text, random_small_graph)
from rootedgp.interpreter import (Break, Call, Fail, If, Loop, Program, RuleCall, Seq, Skip,
                                  Try)
from rootedgp.labels import Const, Sum, Var, VarType
from rootedgp.parser import (ParseError, format_command, load_host_graph, load_program,
                             parse_host_graph, parse_program, parse_rule, parse_rules,
                             print_host_graph, print_program, print_rule, print_rules,
                             same_tokens, save_host_graph, tokenize)
from rootedgp.programs import PROGRAM_NAMES, build_program, corpus_dir
from rootedgp.store import EdgeMark, NodeMark

INIT = "init(x:list) [ (1, x # grey) | ] => [ (1(R), x # red) | ] interface {1}"
NEXT_EDGE = ("next_edge(x,y,z:list) [ (1(R), x # red) (2, y # any) | (e1, 1, 2, z) ] "
             "=> [ (1(R), x # red) (2, y # any) | (e1, 1, 2, z # red) ] interface {1,2}")
IS_CONNECTED = """
Main  = try init then (DFS!; Check)
DFS   = forward!; try back else break
Check = if match then fail
"""


# -- host graphs --------------------------------------------------------------------

def test_empty_graph(backend):
    g = parse_host_graph("[ | ]", backend)
    assert g.node_count() == 0 and g.edge_count() == 0


def test_one_grey_node():
    g = parse_host_graph("[ (n0, empty # grey) | ]")
    assert list(g.nodes()) == [0] and g.get_mark(0) is NodeMark.GREY and g.get_label(0) == ()


def test_loop_graph(backend):
    g = parse_host_graph("[ (n0, 1) | (e0, n0, n0, empty) ]", backend)
    assert g.loopdeg(0) == 1 and g.get_label(0) == (1,)


def test_ids_preserved_with_gaps():
    g = parse_host_graph("[ (n3(R), \"a\":-2 # blue) (n7, empty) | (e5, n7, n3, 4 # dashed) ]")
    assert list(g.nodes()) == [3, 7] and g.roots() == [3]
    assert g.get_label(3) == ("a", -2)
    assert g.get_source(5) == 7 and g.get_edge_mark(5) is EdgeMark.DASHED
    # fresh ids continue past the largest parsed one
    assert g.add_node() == 8 and g.add_edge(3, 3) == 6


def test_comments_and_whitespace():
    g = parse_host_graph("// header\n[ /* a node */ (n0,\n 1) | ]\n")
    assert g.get_label(0) == (1,)


def test_string_escapes_round_trip():
    g = parse_host_graph(r'[ (n0, "q\"uote":"back\\slash") | ]')
    assert g.get_label(0) == ('q"uote', "back\\slash")
    assert parse_host_graph(print_host_graph(g)).snapshot() == g.snapshot()


def test_printer_format():
    text = "[ (n0(R), 1:\"a\" # red) (n1, empty) | (e0, n0, n1, empty # blue) ]"
    assert print_host_graph(parse_host_graph(text)) == text
    assert print_host_graph(parse_host_graph("[|]")) == "[ | ]"


def test_random_graphs_round_trip(backend):
    rng = random.Random(11)
    for _ in range(200):
        g = random_small_graph(rng, backend, max_nodes=8, max_edges=12)
        for n in list(g.nodes())[: rng.randint(0, 2)]:
            if not g.outdeg(n) and not g.indeg(n) and not g.loopdeg(n):
                g.delete_node(n)
        text = print_host_graph(g)
        h = parse_host_graph(text, backend)
        assert h.snapshot() == g.snapshot()
        assert print_host_graph(h) == text


@settings(max_examples=100, deadline=None)
@given(st.lists(st.one_of(st.integers(-2 ** 63, 2 ** 63 - 1), st.text(max_size=6)), max_size=4))
def test_arbitrary_labels_round_trip(label):
    g = parse_host_graph("[ (n0, empty) | ]")
    g.set_node_label(0, tuple(label))
    assert parse_host_graph(print_host_graph(g)).get_label(0) == tuple(label)


def test_file_helpers(tmp_path):
    g = parse_host_graph("[ (n0, 1 # grey) (n1, 2) | (e0, n0, n1, empty) ]")
    p = tmp_path / "g.gpg"
    save_host_graph(g, p)
    assert p.read_text().endswith("]\n")
    assert load_host_graph(p, "legacy").snapshot() == g.snapshot()


# -- rules --------------------------------------------------------------------------

def test_init_rule_text():
    assert parse_rule(INIT) == build_program("is-dag").rules["init"]


def test_next_edge_wildcard_rule():
    r = parse_rule(NEXT_EDGE)
    assert r == build_program("is-dag").rules["next_edge"]
    assert r.lhs.nodes[1].mark is None and r.rhs.nodes[1].mark is None


def test_undeclared_variable_diagnostic():
    with pytest.raises(ParseError) as info:
        parse_rule("init(x:list) [ (1, y # grey) | ] => [ (1, x) | ] interface {1}")
    (d,) = info.value.diagnostics
    assert (d.line, d.col) == (1, 20) and "y" in d.message


def test_label_expressions():
    r = parse_rule("r(x:list; n:int; s:string; a:atom) [ (1, x:n:s:a:\"k\":-3) | ] "
                   "=> [ (1, x:n+1:(n+2)+n:a) | ] interface {1}")
    assert dict(r.variables) == {"x": VarType.LIST, "n": VarType.INT,
                                 "s": VarType.STRING, "a": VarType.ATOM}
    assert r.lhs.nodes[0].label[-2:] == (Const("k"), Const(-3))
    n = Var("n", VarType.INT)
    assert r.rhs.nodes[0].label[1] == Sum(n, Const(1))
    assert parse_rule(print_rule(r)) == r


@pytest.mark.parametrize("program", PROGRAM_NAMES)
def test_rules_round_trip(program):
    rules = build_program(program).rules
    for r in rules.values():
        assert parse_rule(print_rule(r)) == r
    assert parse_rules(print_rules(rules.values())) == rules


def test_duplicate_rule_rejected():
    with pytest.raises(ParseError):
        parse_rules(INIT + "\n" + INIT)


# -- programs -----------------------------------------------------------------------

def test_main_skip():
    assert parse_program("Main = skip") == Program({"Main": Skip()}, {})


def test_is_connected_program_text():
    prog = parse_program(IS_CONNECTED, build_program("is-connected").rules)
    assert prog.procedures == build_program("is-connected").procedures
    dfs = prog.procedures["DFS"]
    assert dfs == Seq((Loop(RuleCall(("forward",))), Try(RuleCall(("back",)), None, Break())))
    assert prog.procedures["Check"] == If(RuleCall(("match",)), Fail())
    assert prog.procedures["Main"].then.commands[0] == Loop(Call("DFS"))


def test_break_outside_loop_diagnostic():
    with pytest.raises(ParseError) as info:
        parse_program("Main = break")
    (d,) = info.value.diagnostics
    assert "BreakOutsideLoop" in d.message and (d.line, d.col) == (1, 8)


def test_break_outside_loop_through_call():
    with pytest.raises(ParseError) as info:
        parse_program("Main = P\nP = skip; break")
    assert (info.value.diagnostics[0].line, info.value.diagnostics[0].col) == (2, 11)


def test_unknown_names_all_reported():
    with pytest.raises(ParseError) as info:
        parse_program("Main = a; b\nP = c")
    assert [(d.line, d.col) for d in info.value.diagnostics] == [(1, 8), (1, 11), (2, 5)]


def test_rules_inline_in_program():
    prog = parse_program(INIT + "\nMain = init!")
    assert prog.procedures["Main"] == Loop(RuleCall(("init",)))
    assert "init" in prog.rules


def test_rule_set_and_postfix():
    prog = parse_program(INIT + "\nMain = {init, init}!!", entry="Main")
    assert prog.procedures["Main"] == Loop(Loop(RuleCall(("init", "init"))))


@pytest.mark.parametrize("program", PROGRAM_NAMES)
def test_programs_round_trip(program):
    prog = build_program(program)
    assert parse_program(print_program(prog), prog.rules) == prog
    assert parse_program(print_program(prog, with_rules=True)) == prog


_names = st.sampled_from(["a", "b"])
_leaf = st.one_of(_names.map(lambda n: RuleCall((n,))), st.just(Skip()), st.just(Fail()),
                  st.lists(_names, min_size=2, max_size=3).map(
                      lambda ns: RuleCall(tuple(ns), braced=True)))


def _compound(inner):
    return st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda cs: Seq(tuple(cs))),
        inner.map(Loop),
        st.builds(Try, inner, st.none() | inner, st.none() | inner),
        st.builds(If, inner, inner, st.none() | inner),
        inner.map(lambda c: Loop(Seq((c, Break())))),
    )


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaf, _compound, max_leaves=12))
def test_random_commands_round_trip(cmd):
    rules = parse_rules(INIT.replace("init", "a") + "\n" + INIT.replace("init", "b"))
    text = "Main = " + format_command(cmd)
    prog = parse_program(text, rules)
    assert prog.procedures["Main"] == cmd
    assert format_command(prog.procedures["Main"]) == format_command(cmd)


# -- corpus -------------------------------------------------------------------------

@pytest.mark.parametrize("program", PROGRAM_NAMES)
def test_corpus_program_equals_builtin(program):
    prog = load_program(str(corpus_dir() / f"{program}.gpp"))
    assert prog == build_program(program)


@pytest.mark.parametrize("program", PROGRAM_NAMES)
def test_corpus_program_text_round_trip(program):
    d = corpus_dir()
    text = (d / f"{program}.gpp").read_text()
    rules_text = (d / f"{program}.gpr").read_text()
    prog = parse_program(text, parse_rules(rules_text))
    assert same_tokens(print_program(prog), text)
    assert print_rules(prog.rules.values()) == rules_text


def test_corpus_graphs_round_trip():
    files = sorted(p for p in corpus_dir().iterdir() if p.name.endswith(".gpg"))
    assert len(files) == 20
    for p in files:
        text = p.read_text()
        assert print_host_graph(parse_host_graph(text)) + "\n" == text, p.name


def test_tokenizer_positions():
    toks = tokenize("Main =\n  skip")
    assert [(t.text, t.line, t.col) for t in toks[:3]] == [("Main", 1, 1), ("=", 1, 6),
                                                           ("skip", 2, 3)]


# -- malformed input ----------------------------------------------------------------

@pytest.mark.parametrize("text", MALFORMED_GRAPHS)
def test_malformed_graphs(text):
    assert check_diagnosed(parse_host_graph, text)


@pytest.mark.parametrize("text", MALFORMED_RULES)
def test_malformed_rules(text):
    assert check_diagnosed(parse_rule, text)


@pytest.mark.parametrize("text", MALFORMED_PROGRAMS)
def test_malformed_programs(text):
    assert check_diagnosed(parse_program, text)


def test_damaged_corpus_never_crashes():
    d = corpus_dir()
    rng = random.Random(3)
    sources = [(parse_host_graph, (d / "marks-and-strings.gpg").read_text()),
               (parse_rules, (d / "is-dag.gpr").read_text()),
               (lambda t: parse_program(t, build_program("is-dag").rules),
                (d / "is-dag.gpp").read_text())]
    rejected = 0
    for parse, text in sources:
        for _ in range(300):
            rejected += check_diagnosed(parse, mutate_text(text, rng, rng.randint(1, 4)))
    assert rejected > 300
