"""Total function terms over extended values.

A term is the concrete carrier of the function inside ``lift``. Evaluation never
raises: strict operators return ``BOTTOM`` on a missing operand, on mismatched
types and on division by zero. ``IsSome`` and ``If`` are the only constructs that
look at ``BOTTOM`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .values import BOTTOM, TOP, UNIT, is_num, format_value


@dataclass(frozen=True)
class Param:
    index: int


@dataclass(frozen=True, eq=False)
class Lit:
    value: object  # a Value or BOTTOM

    # type-aware so that Lit(True) and Lit(Fraction(1)) stay distinct
    def __eq__(self, other):
        return isinstance(other, Lit) and type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self):
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class IsSome:
    arg: "Term"


@dataclass(frozen=True)
class If:
    cond: "Term"
    then: "Term"
    orelse: "Term"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Not:
    arg: "Term"


Term = Union[Param, Lit, IsSome, If, BinOp, Not]

ARITH = ("+", "-", "*", "/")
ORDER = ("<", "<=", ">", ">=")
EQUALITY = ("==", "!=")
LOGIC = ("&&", "||")
BINARY_OPS = ARITH + ORDER + EQUALITY + LOGIC

# unicode spellings accepted by the surface parser and by make_binop
OP_ALIASES = {
    "×": "*", "÷": "/", "−": "-", "≤": "<=", "≥": ">=", "=": "==", "≠": "!=",
    "∧": "&&", "∨": "||", "and": "&&", "or": "||",
}


def canonical_op(op: str) -> str:
    op = OP_ALIASES.get(op, op)
    if op not in BINARY_OPS:
        raise ValueError(f"unknown operator {op!r}")
    return op


def arity(term: Term) -> int:
    """1 + the largest parameter index used (0 for closed terms)."""
    if isinstance(term, Param):
        return term.index + 1
    if isinstance(term, Lit):
        return 0
    if isinstance(term, (IsSome, Not)):
        return arity(term.arg)
    if isinstance(term, If):
        return max(arity(term.cond), arity(term.then), arity(term.orelse))
    if isinstance(term, BinOp):
        return max(arity(term.left), arity(term.right))
    raise TypeError(f"not a term: {term!r}")


def _binop(op, a, b):
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    if op in ARITH:
        if not (is_num(a) and is_num(b)):
            return BOTTOM
        if a is TOP or b is TOP:
            return TOP if op == "+" else BOTTOM
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            return BOTTOM
        return a / b
    if op in ORDER:
        if is_num(a) and is_num(b):
            pass
        elif isinstance(a, str) and isinstance(b, str):
            pass
        else:
            return BOTTOM
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    if op in EQUALITY:
        if is_num(a) and is_num(b):
            eq = a == b
        elif type(a) is not type(b):
            return BOTTOM
        else:
            eq = a == b
        return eq if op == "==" else not eq
    if op in LOGIC:
        if type(a) is not bool or type(b) is not bool:
            return BOTTOM
        return (a and b) if op == "&&" else (a or b)
    return BOTTOM


def evaluate(term: Term, args: Sequence) -> object:
    """Apply ``term`` to extended values ``args``. Total and side-effect free."""
    if isinstance(term, Param):
        return args[term.index] if term.index < len(args) else BOTTOM
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, IsSome):
        return evaluate(term.arg, args) is not BOTTOM
    if isinstance(term, If):
        # anything but a true condition (including BOTTOM) selects the else branch
        if evaluate(term.cond, args) is True:
            return evaluate(term.then, args)
        return evaluate(term.orelse, args)
    if isinstance(term, Not):
        v = evaluate(term.arg, args)
        return (not v) if type(v) is bool else BOTTOM
    if isinstance(term, BinOp):
        return _binop(term.op, evaluate(term.left, args), evaluate(term.right, args))
    return BOTTOM


def show(term: Term) -> str:
    if isinstance(term, Param):
        return f"${term.index}"
    if isinstance(term, Lit):
        return format_value(term.value)
    if isinstance(term, IsSome):
        return f"isSome({show(term.arg)})"
    if isinstance(term, If):
        return f"if {show(term.cond)} then {show(term.then)} else {show(term.orelse)}"
    if isinstance(term, Not):
        return f"!{show(term.arg)}"
    if isinstance(term, BinOp):
        return f"({show(term.left)} {term.op} {show(term.right)})"
    raise TypeError(term)


# -- named functions usable as ``lift(name)`` ---------------------------------

P0, P1 = Param(0), Param(1)

MERGE = If(IsSome(P0), P0, P1)
FILTER = If(BinOp("==", P0, Lit(True)), P1, Lit(BOTTOM))
IDENTITY = P0
NOT = Not(P0)


def const_term(value) -> Term:
    return Lit(value)


def binop_term(op: str) -> Term:
    return BinOp(canonical_op(op), P0, P1)


def slift_term(f: Term) -> Term:
    """Signal-lift wrapper: defined only when both operands are present."""
    return If(IsSome(P0), If(IsSome(P1), f, Lit(BOTTOM)), Lit(BOTTOM))


NAMED = {
    "merge": MERGE,
    "filter": FILTER,
    "id": IDENTITY,
    "not": NOT,
    "!": NOT,
    "¬": NOT,
}


def named(name: str) -> Term:
    """Resolve ``name`` (``merge``, ``not``, ``+``, ``∧`` ...) to a term."""
    if name in NAMED:
        return NAMED[name]
    return binop_term(name)


# -- type inference -------------------------------------------------------------

class TypeVar:
    _counter = 0

    def __init__(self):
        TypeVar._counter += 1
        self.id = TypeVar._counter
        self.ref = None

    def __repr__(self):
        r = resolve(self)
        return f"?{self.id}" if isinstance(r, TypeVar) else r


def resolve(t):
    while isinstance(t, TypeVar) and t.ref is not None:
        t = t.ref
    return t


class UnificationError(Exception):
    def __init__(self, expected, actual):
        super().__init__(f"expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


def unify(a, b):
    a, b = resolve(a), resolve(b)
    if a is b:
        return
    if isinstance(a, TypeVar):
        a.ref = b
    elif isinstance(b, TypeVar):
        b.ref = a
    elif a != b:
        raise UnificationError(a, b)


def _lit_type(v):
    if v is BOTTOM:
        return TypeVar()
    if v is UNIT:
        return "Unit"
    if isinstance(v, bool):
        return "Bool"
    if isinstance(v, Fraction) or v is TOP:
        return "Num"
    if isinstance(v, str):
        return "Str"
    raise TypeError(v)


def infer(term: Term, params: Sequence) -> object:
    """Infer the result type of ``term`` given (unifiable) parameter types."""
    if isinstance(term, Param):
        return params[term.index]
    if isinstance(term, Lit):
        return _lit_type(term.value)
    if isinstance(term, IsSome):
        infer(term.arg, params)
        return "Bool"
    if isinstance(term, Not):
        unify("Bool", infer(term.arg, params))
        return "Bool"
    if isinstance(term, If):
        unify("Bool", infer(term.cond, params))
        t = infer(term.then, params)
        unify(t, infer(term.orelse, params))
        return t
    if isinstance(term, BinOp):
        lt, rt = infer(term.left, params), infer(term.right, params)
        if term.op in ARITH:
            unify("Num", lt)
            unify("Num", rt)
            return "Num"
        if term.op in ORDER:
            unify(lt, rt)
            if resolve(lt) not in ("Num", "Str") and not isinstance(resolve(lt), TypeVar):
                raise UnificationError("Num", resolve(lt))
            if isinstance(resolve(lt), TypeVar):
                unify("Num", lt)
            return "Bool"
        if term.op in EQUALITY:
            unify(lt, rt)
            return "Bool"
        unify("Bool", lt)
        unify("Bool", rt)
        return "Bool"
    raise TypeError(term)
