"""Typed variables and label expressions.

A host label is a tuple of atoms (``int`` or ``str``); the empty tuple is
the empty list. A label expression is a tuple of terms joined by ``:``.
A term is a constant atom, a variable, or an integer sum. At most one
list-typed variable may occur in an expression, so matching a pattern
against a host label has at most one solution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional, Union

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

Atom = Union[int, str]


class VarType(enum.Enum):
    LIST = "list"
    ATOM = "atom"
    INT = "int"
    STRING = "string"


class LabelError(Exception):
    pass


class UnboundVariable(LabelError):
    pass


class IntOverflow(LabelError):
    pass


@dataclass(frozen=True)
class Const:
    value: Atom


@dataclass(frozen=True)
class Var:
    name: str
    type: VarType


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


Term = Union[Const, Var, Sum]
LabelExpr = tuple  # tuple[Term, ...]


def is_atom(value) -> bool:
    return (isinstance(value, int) and not isinstance(value, bool)) or isinstance(value, str)


def fits(vtype: VarType, value) -> bool:
    """Does ``value`` (an atom, or a tuple for lists) inhabit ``vtype``?"""
    if vtype is VarType.LIST:
        return isinstance(value, tuple) and all(is_atom(a) for a in value)
    if vtype is VarType.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if vtype is VarType.STRING:
        return isinstance(value, str)
    return is_atom(value)


def variables(expr: LabelExpr) -> set[str]:
    out: set[str] = set()

    def walk(t):
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Sum):
            walk(t.left)
            walk(t.right)

    for t in expr:
        walk(t)
    return out


def check_expr(expr: LabelExpr, *, pattern: bool) -> None:
    """Raise ``LabelError`` if ``expr`` breaks the typing rules.

    Patterns (left-hand sides) may not contain sums.
    """
    lists = 0
    for t in expr:
        if isinstance(t, Var) and t.type is VarType.LIST:
            lists += 1
        elif isinstance(t, Sum):
            if pattern:
                raise LabelError("arithmetic is not allowed in a left-hand label")
            _check_int_term(t)
        elif isinstance(t, Const) and not is_atom(t.value):
            raise LabelError(f"bad constant {t.value!r}")
    if lists > 1:
        raise LabelError("at most one list variable per label")


def _check_int_term(t) -> None:
    if isinstance(t, Sum):
        _check_int_term(t.left)
        _check_int_term(t.right)
    elif isinstance(t, Var):
        if t.type is not VarType.INT:
            raise LabelError(f"variable {t.name} in a sum must be int")
    elif isinstance(t, Const):
        if not isinstance(t.value, int) or isinstance(t.value, bool):
            raise LabelError(f"non-integer constant {t.value!r} in a sum")


def _eval_int(t, b: Mapping[str, object]) -> int:
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        try:
            return b[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    v = _eval_int(t.left, b) + _eval_int(t.right, b)
    if not INT64_MIN <= v <= INT64_MAX:
        raise IntOverflow(f"{v} does not fit in 64 bits")
    return v


def evaluate(expr: LabelExpr, binding: Mapping[str, object]) -> tuple:
    """Ground ``expr`` under ``binding``; list values are spliced in."""
    out: list = []
    for t in expr:
        if isinstance(t, Const):
            out.append(t.value)
        elif isinstance(t, Var):
            try:
                v = binding[t.name]
            except KeyError:
                raise UnboundVariable(t.name) from None
            if t.type is VarType.LIST:
                out.extend(v)
            else:
                out.append(v)
        else:
            out.append(_eval_int(t, binding))
    return tuple(out)


def _match_atom(t, atom, b: dict) -> bool:
    if isinstance(t, Const):
        return t.value == atom and type(t.value) is type(atom)
    # Var of atom, int or string type
    name = t.name
    if name in b:
        bound = b[name]
        return bound == atom and type(bound) is type(atom)
    if not fits(t.type, atom):
        return False
    b[name] = atom
    return True


def unify(pattern: LabelExpr, host: tuple,
          binding: Optional[Mapping[str, object]] = None) -> Optional[dict]:
    """Extend ``binding`` so that ``pattern`` evaluates to ``host``.

    Returns the extended binding (a new dict) or ``None``. Fixed-width terms
    are matched from both ends; an unbound list variable absorbs whatever is
    left in between.
    """
    b = dict(binding) if binding else {}
    n = len(host)
    # Fast path for the common single-variable pattern ``x``.
    if len(pattern) == 1:
        t = pattern[0]
        if isinstance(t, Var) and t.type is VarType.LIST:
            if t.name in b:
                return b if b[t.name] == host else None
            b[t.name] = host
            return b

    split = None
    for i, t in enumerate(pattern):
        if isinstance(t, Var) and t.type is VarType.LIST and t.name not in b:
            split = i
            break

    def width(t) -> int:
        if isinstance(t, Var) and t.type is VarType.LIST:
            return len(b[t.name])
        return 1

    def match_seg(terms, pos) -> Optional[int]:
        for t in terms:
            if isinstance(t, Var) and t.type is VarType.LIST:
                v = b[t.name]
                if tuple(host[pos:pos + len(v)]) != v:
                    return None
                pos += len(v)
            elif isinstance(t, Sum):
                return None
            else:
                if pos >= n or not _match_atom(t, host[pos], b):
                    return None
                pos += 1
        return pos

    if split is None:
        end = match_seg(pattern, 0)
        return b if end == n else None

    head, tail = pattern[:split], pattern[split + 1:]
    pos = match_seg(head, 0)
    if pos is None:
        return None
    # bound list variables in the tail have known widths once the head is done
    tail_width = sum(width(t) if not (isinstance(t, Var) and t.type is VarType.LIST
                                      and t.name not in b) else 1 for t in tail)
    start = n - tail_width
    if start < pos:
        return None
    if match_seg(tail, start) != n:
        return None
    b[pattern[split].name] = tuple(host[pos:start])
    return b
