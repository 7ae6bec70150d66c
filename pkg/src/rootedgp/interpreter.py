"""Program IR and its execution on a host graph.

Commands succeed or fail. A loop ``P!`` runs ``P`` until an iteration
fails; the failed iteration is undone and the loop itself succeeds.
``break`` leaves the innermost enclosing loop and keeps the current
iteration's changes. ``try C then P else Q`` keeps the effect of ``C`` when
it succeeds; ``if C then P else Q`` always undoes ``C``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .engine import Match, Rule, UndoLog, rollback, try_apply
from .store import HostGraph


@dataclass(frozen=True)
class RuleCall:
    """Call of a rule set; the first applicable rule in order is applied."""

    names: tuple[str, ...]
    braced: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Call:
    name: str


@dataclass(frozen=True)
class Seq:
    commands: tuple["Command", ...]


@dataclass(frozen=True)
class Try:
    cond: "Command"
    then: Optional["Command"] = None
    orelse: Optional["Command"] = None


@dataclass(frozen=True)
class If:
    cond: "Command"
    then: "Command"
    orelse: Optional["Command"] = None


@dataclass(frozen=True)
class Loop:
    body: "Command"


@dataclass(frozen=True)
class Break:
    pos: Optional[tuple[int, int]] = field(default=None, compare=False)


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Fail:
    pass


Command = Union[RuleCall, Call, Seq, Try, If, Loop, Break, Skip, Fail]


class ProgramError(Exception):
    pass


class UndefinedProcedure(ProgramError):
    pass


class BreakOutsideLoop(ProgramError):
    pass


class BudgetExceeded(Exception):
    def __init__(self, steps: int, budget: int) -> None:
        super().__init__(f"{steps} steps exceed the budget of {budget}")
        self.steps = steps
        self.budget = budget


@dataclass(frozen=True)
class Program:
    procedures: dict[str, Command]
    rules: dict[str, Rule]
    entry: str = "Main"

    def validate(self) -> None:
        if self.entry not in self.procedures:
            raise UndefinedProcedure(f"entry procedure {self.entry} is missing")
        clash = set(self.procedures) & set(self.rules)
        if clash:
            raise ProgramError(f"names used for both rules and procedures: {sorted(clash)}")
        for cmd in self.procedures.values():
            for node in walk(cmd):
                if isinstance(node, RuleCall):
                    for n in node.names:
                        if n not in self.rules:
                            raise UndefinedProcedure(f"unknown rule {n}")
                elif isinstance(node, Call) and node.name not in self.procedures:
                    raise UndefinedProcedure(f"unknown procedure {node.name}")
        stray = breaks_outside_loops(self)
        if stray:
            raise BreakOutsideLoop(f"break outside a loop in {stray[0][0]}")


def walk(cmd: Command):
    yield cmd
    if isinstance(cmd, Seq):
        for c in cmd.commands:
            yield from walk(c)
    elif isinstance(cmd, (Try, If)):
        for c in (cmd.cond, cmd.then, cmd.orelse):
            if c is not None:
                yield from walk(c)
    elif isinstance(cmd, Loop):
        yield from walk(cmd.body)


def breaks_outside_loops(prog: Program) -> list[tuple[str, Break]]:
    """Breaks reachable from the entry procedure without an enclosing loop."""
    found: list[tuple[str, Break]] = []
    seen: set[tuple[str, bool]] = set()

    def visit(proc: str, cmd: Command, in_loop: bool) -> None:
        if isinstance(cmd, Break):
            if not in_loop:
                found.append((proc, cmd))
        elif isinstance(cmd, Loop):
            visit(proc, cmd.body, True)
        elif isinstance(cmd, Seq):
            for c in cmd.commands:
                visit(proc, c, in_loop)
        elif isinstance(cmd, (Try, If)):
            for c in (cmd.cond, cmd.then, cmd.orelse):
                if c is not None:
                    visit(proc, c, in_loop)
        elif isinstance(cmd, Call):
            key = (cmd.name, in_loop)
            if key not in seen and cmd.name in prog.procedures:
                seen.add(key)
                visit(cmd.name, prog.procedures[cmd.name], in_loop)

    if prog.entry in prog.procedures:
        visit(prog.entry, prog.procedures[prog.entry], False)
    return found


@dataclass
class Outcome:
    success: bool
    graph: Optional[HostGraph] = None

    def __bool__(self) -> bool:
        return self.success


class _BreakSignal(Exception):
    pass


class Interpreter:
    """Runs a program against one host graph.

    Attributes collected while running:

    ``rule_apps``
        number of successful rule applications.
    ``trace``
        names of applied rules in order (only if ``trace=True``).
    ``rule_steps`` / ``rule_edge_steps`` / ``rule_calls``
        per-rule totals of all probes, edge probes and call attempts
        (only if ``instrument=True``).
    ``max_roots``
        largest number of roots seen after any rule application
        (only if ``instrument=True``).
    """

    def __init__(self, program: Program, graph: HostGraph, *, trace: bool = False,
                 instrument: bool = False, budget: Optional[int] = None,
                 on_apply: Optional[Callable[[Rule, Match], None]] = None) -> None:
        program.validate()
        self.program = program
        self.graph = graph
        self.log = UndoLog(graph)
        self.depth = 0
        self.rule_apps = 0
        self.trace: Optional[list[str]] = [] if trace else None
        self.instrument = instrument
        self.rule_edge_steps: Counter = Counter()
        self.rule_steps: Counter = Counter()
        self.rule_calls: Counter = Counter()
        self.max_roots = len(graph.roots()) if instrument else 0
        self.on_apply = on_apply
        self.budget = budget
        self._start_steps = graph.steps
        self._exec = {
            RuleCall: self._rule_call,
            Call: self._call,
            Seq: self._seq,
            Try: self._try,
            If: self._if,
            Loop: self._loop,
            Break: self._break,
            Skip: self._skip,
            Fail: self._fail,
        }

    def run(self) -> Outcome:
        try:
            ok = self.execute(self.program.procedures[self.program.entry])
        except _BreakSignal:  # unreachable after validate()
            ok = True
        self.log.clear()
        return Outcome(ok, self.graph if ok else None)

    def execute(self, cmd: Command) -> bool:
        return self._exec[type(cmd)](cmd)

    # -- commands -----------------------------------------------------------

    def _rule_call(self, cmd: RuleCall) -> bool:
        g = self.graph
        log = self.log if self.depth else None
        rules = self.program.rules
        for name in cmd.names:
            rule = rules[name]
            if self.instrument:
                before_e, before = g.edge_steps, g.steps
                m = try_apply(g, rule, log)
                self.rule_edge_steps[name] += g.edge_steps - before_e
                self.rule_steps[name] += g.steps - before
                self.rule_calls[name] += 1
            else:
                m = try_apply(g, rule, log)
            if self.budget is not None and g.steps - self._start_steps > self.budget:
                raise BudgetExceeded(g.steps - self._start_steps, self.budget)
            if m is not None:
                self.rule_apps += 1
                if self.trace is not None:
                    self.trace.append(name)
                if self.instrument:
                    self.max_roots = max(self.max_roots, len(g.roots()))
                if self.on_apply is not None:
                    self.on_apply(rule, m)
                return True
        return False

    def _call(self, cmd: Call) -> bool:
        return self.execute(self.program.procedures[cmd.name])

    def _seq(self, cmd: Seq) -> bool:
        for c in cmd.commands:
            if not self.execute(c):
                return False
        return True

    def _guarded(self, cmd: Command) -> tuple[bool, int]:
        """Run ``cmd`` with a checkpoint; returns (succeeded, checkpoint)."""
        cp = len(self.log)
        self.depth += 1
        try:
            ok = self.execute(cmd)
        finally:
            self.depth -= 1
        return ok, cp

    def _release(self) -> None:
        if self.depth == 0:
            self.log.clear()

    def _try(self, cmd: Try) -> bool:
        cp = len(self.log)
        try:
            ok, cp = self._guarded(cmd.cond)
        except _BreakSignal:
            self._release()
            raise
        if ok:
            self._release()
            return True if cmd.then is None else self.execute(cmd.then)
        rollback(self.graph, self.log, cp)
        return True if cmd.orelse is None else self.execute(cmd.orelse)

    def _if(self, cmd: If) -> bool:
        cp = len(self.log)
        try:
            ok, cp = self._guarded(cmd.cond)
        finally:
            rollback(self.graph, self.log, cp)
        if ok:
            return self.execute(cmd.then)
        return True if cmd.orelse is None else self.execute(cmd.orelse)

    def _loop(self, cmd: Loop) -> bool:
        body = cmd.body
        while True:
            try:
                ok, cp = self._guarded(body)
            except _BreakSignal:
                self._release()
                return True
            if not ok:
                rollback(self.graph, self.log, cp)
                return True
            self._release()

    def _break(self, cmd: Break) -> bool:
        raise _BreakSignal()

    def _skip(self, cmd: Skip) -> bool:
        return True

    def _fail(self, cmd: Fail) -> bool:
        return False


def run(program: Program, graph: HostGraph, **kwargs) -> Outcome:
    """Execute ``program`` on ``graph`` in place."""
    return Interpreter(program, graph, **kwargs).run()


def run_with_budget(program: Program, graph: HostGraph, max_steps: int,
                    **kwargs) -> Outcome:
    """As :func:`run`, raising ``BudgetExceeded`` once more than
    ``max_steps`` probes have been charged."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    return Interpreter(program, graph, budget=max_steps, **kwargs).run()
