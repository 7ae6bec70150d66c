"""Rooted graph programs: storage, matching, interpretation and benchmarks."""

from __future__ import annotations

from .bench import (CSV_FIELDS, BenchRecord, FitSummary, bench_family, doubling_sizes, fit,
                    format_fits, read_csv, run_once, sweep, write_csv)
from .engine import (Match, Rule, RuleEdge, RuleError, RuleGraph, RuleNode, UndoLog,
                     UnsupportedRule, apply, apply_rule, match, rollback, try_apply)
from .interpreter import (Break, BreakOutsideLoop, BudgetExceeded, Call, Fail, If,
                          Interpreter, Loop, Outcome, Program, ProgramError, RuleCall, Seq,
                          Skip, Try, UndefinedProcedure, run, run_with_budget)
from .labels import Const, Sum, Var, VarType
from .parser import (Diagnostic, ParseError, load_host_graph, load_program, load_rules,
                     parse_host_graph, parse_program, parse_rule, parse_rules,
                     print_host_graph, print_program, print_rule, print_rules,
                     save_host_graph)
from .programs import (FAMILY_NAMES, PROGRAM_NAMES, BinaryTree, Cycle, Discrete, Family, Grid,
                       InvalidSize, KKStar, List, Star, UnknownProgram, build_input,
                       build_program, corpus_dir, family_for_size, generate, input_mark,
                       load_corpus_program, prepare_input, random_digraph)
from .store import (EdgeMark, GraphError, HostGraph, IndexedGraph, LegacyGraph, NodeMark,
                    Orientation, StaleHandle)

__version__ = "0.1.0"
