"""Macro expansion: surface AST to core equations.

Infix operators become signal lifts, literals in stream position become constant
signals ``const(c)(unit)`` and macro calls are replaced by their bodies. Stream
arguments that are not plain variables, and the operands of signal lifts, are
bound to fresh equations so that expansion never duplicates a computation.
Local definitions inside ``{ ... }`` blocks get fresh names ``_m<N>_<name>``.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .. import ir, terms
from ..errors import (
    ArityMismatch, DuplicateDefinition, RecursiveMacro, SpecTypeError,
    UndefinedStream, UnknownMacro,
)
from ..values import UNIT, value_type_name
from .syntax import (
    BASE_TYPES, Block, BoolLit, Call, Def, Ident, Input, NumLit, OpRef, Program,
    StrLit, TypeExpr, UnaryOp, UnitLit, BinaryOp,
)

BUILTINS = ("nil", "unit", "time", "last", "delay", "lift", "const", "slift")


def _at(pos) -> str:
    return f"{pos[0]}:{pos[1]}: " if pos else ""


def base_type(name: str) -> str:
    return "Num" if name == "Int" else name


@dataclass
class Expanded:
    """Core equations before type checking."""

    inputs: Dict[str, str] = field(default_factory=dict)
    equations: Dict[str, object] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    # (core expression, expected value type or TypeVar, position)
    constraints: list = field(default_factory=list)


class Scope:
    def __init__(self, parent: Optional["Scope"] = None):
        self.parent = parent
        self.names: dict = {}

    def lookup(self, name):
        s = self
        while s is not None:
            if name in s.names:
                return s.names[name]
            s = s.parent
        return None

    def define(self, name, binding, pos=None):
        if name in self.names:
            raise DuplicateDefinition(f"{_at(pos)}{name} is defined twice")
        if name in BUILTINS:
            raise DuplicateDefinition(f"{_at(pos)}{name} is a built-in operator and cannot be redefined")
        self.names[name] = binding


class Expander:
    def __init__(self, program: Program, stdlib: Optional[Program] = None):
        self.program = program
        self.out = Expanded()
        self.counter = 0
        self.shared = 0
        self.stack: List[str] = []
        self.type_params: List[dict] = []   # type parameters of the macros being expanded
        self.stdlib_scope = Scope()
        if stdlib is not None:
            for d in stdlib.defs:
                self.stdlib_scope.define(d.name, ("macro", d, self.stdlib_scope), d.pos)

    # -- helpers
    def fresh_block(self) -> int:
        n = self.counter
        self.counter += 1
        return n

    def emit(self, name, expr):
        self.out.equations[name] = expr

    def bind(self, expr):
        """Make ``expr`` a variable, adding an equation if necessary."""
        if isinstance(expr, ir.Var):
            return expr
        name = f"_s{self.shared}"
        self.shared += 1
        self.emit(name, expr)
        return ir.Var(name, expr.pos)

    def type_of(self, t: TypeExpr, type_params: dict, pos):
        base = t.base
        if base in type_params:
            return type_params[base]
        if base not in BASE_TYPES:
            raise SpecTypeError(f"unknown type {base}", pos=t.pos or pos)
        return base_type(base)

    # -- driver
    def run(self) -> Expanded:
        glob = Scope(self.stdlib_scope)
        for item in self.program.items:
            if isinstance(item, Input):
                if not item.type.events or base_type(item.type.base) not in ("Unit", "Bool", "Num", "Str"):
                    raise SpecTypeError(f"input {item.name} must have a type Events[Unit|Bool|Num|Str]", pos=item.pos)
                glob.define(item.name, ("stream", item.name), item.pos)
                self.out.inputs[item.name] = base_type(item.type.base)
            elif isinstance(item, Def):
                if item.is_macro:
                    glob.define(item.name, ("macro", item, glob), item.pos)
                else:
                    glob.define(item.name, ("stream", item.name), item.pos)
        stream_defs = [d for d in self.program.defs if not d.is_macro]
        for d in stream_defs:
            expr = self.lower(d.body, glob)
            self.emit(d.name, expr)
            if d.annotation is not None:
                self.annotate(expr, d.annotation, {}, d.pos)
        outs = [n for o in self.program.outs for n in o.names]
        for o in self.program.outs:
            for n in o.names:
                b = glob.names.get(n)
                if b is None or b[0] != "stream":
                    raise UndefinedStream(f"{_at(o.pos)}output {n} is not a stream of this specification")
        if not self.program.outs:
            outs = [d.name for d in stream_defs]
        seen = []
        for n in outs:
            if n not in seen:
                seen.append(n)
        self.out.outputs = seen
        return self.out

    def annotate(self, expr, t: TypeExpr, type_params, pos):
        if not t.events:
            raise SpecTypeError(f"stream definitions need a type Events[...], got {t.base}", pos=t.pos or pos)
        self.out.constraints.append((expr, self.type_of(t, type_params, pos), t.pos or pos))

    # -- expressions
    def lower(self, e, scope: Scope):
        pos = getattr(e, "pos", None)
        if isinstance(e, (NumLit, BoolLit, StrLit)):
            return _with_pos(ir.const_signal(e.value), pos)
        if isinstance(e, UnitLit):
            return ir.UnitE(pos)
        if isinstance(e, Ident):
            return self.lower_ident(e, scope)
        if isinstance(e, OpRef):
            raise SpecTypeError(f"operator {e.op} can only be used as the function of lift or slift", pos=pos)
        if isinstance(e, BinaryOp):
            left = self.bind(self.lower(e.left, scope))
            right = self.bind(self.lower(e.right, scope))
            return _with_pos(ir.slift(terms.binop_term(e.op), left, right), pos)
        if isinstance(e, UnaryOp):
            if e.op == "-" and isinstance(e.operand, NumLit):
                return _with_pos(ir.const_signal(-e.operand.value), pos)
            x = self.lower(e.operand, scope)
            if e.op == "!":
                return ir.Lift(terms.NOT, (x,), pos)
            return ir.Lift(terms.BinOp("-", terms.Lit(Fraction(0)), terms.P0), (x,), pos)
        if isinstance(e, Call):
            return self.lower_call(e, scope)
        if isinstance(e, Block):
            return self.lower_block(e, scope)
        raise TypeError(e)

    def lower_ident(self, e: Ident, scope: Scope):
        b = scope.lookup(e.name)
        if b is None:
            if e.name == "nil":
                return ir.Nil(e.pos)
            if e.name == "unit":
                return ir.UnitE(e.pos)
            raise UndefinedStream(f"{_at(e.pos)}undefined stream {e.name}")
        kind = b[0]
        if kind == "stream":
            return ir.Var(b[1], e.pos)
        if kind == "expr":
            return b[1]
        if kind == "value":
            return _with_pos(ir.const_signal(b[1]), e.pos)
        if kind == "macro":
            return self.expand_macro(b[1], b[2], (), scope, e.pos)
        raise UndefinedStream(f"{_at(e.pos)}{e.name} is not a stream")

    def lower_call(self, e: Call, scope: Scope):
        f, args, pos = e.func, e.args, e.pos
        if isinstance(f, Ident) and scope.lookup(f.name) is None and f.name in BUILTINS:
            name = f.name
            if name in ("lift", "const", "slift"):
                raise ArityMismatch(f"{_at(pos)}{name}(...) needs a second argument list, as in {name}(f)(x)")
            if name in ("nil", "unit"):
                raise ArityMismatch(f"{_at(pos)}{name} takes no arguments")
            want = 1 if name == "time" else 2
            if len(args) != want:
                raise ArityMismatch(f"{_at(pos)}{name} expects {want} argument(s), got {len(args)}")
            xs = [self.lower(a, scope) for a in args]
            if name == "time":
                return ir.TimeE(xs[0], pos)
            if name == "last":
                return ir.Last(xs[0], xs[1], pos)
            return ir.Delay(xs[0], xs[1], pos)
        if isinstance(f, Call) and isinstance(f.func, Ident) and f.func.name in ("lift", "const", "slift") \
                and scope.lookup(f.func.name) is None:
            kind = f.func.name
            if len(f.args) != 1:
                raise ArityMismatch(f"{_at(f.pos)}{kind}(...) takes exactly one function or constant")
            if not args:
                raise ArityMismatch(f"{_at(pos)}{kind} needs at least one stream argument")
            if kind == "const":
                if len(args) != 1:
                    raise ArityMismatch(f"{_at(pos)}const(c) takes one stream, got {len(args)}")
                c = self.value(f.args[0], scope)
                return ir.Lift(terms.Lit(c), (self.lower(args[0], scope),), pos)
            term = self.function(f.args[0], scope)
            if kind == "slift":
                if len(args) != 2:
                    raise ArityMismatch(f"{_at(pos)}slift(f) takes two streams, got {len(args)}")
                x = self.bind(self.lower(args[0], scope))
                y = self.bind(self.lower(args[1], scope))
                return _with_pos(ir.slift(term, x, y), pos)
            if terms.arity(term) > len(args):
                raise ArityMismatch(f"{_at(pos)}function needs {terms.arity(term)} arguments, got {len(args)}")
            return ir.Lift(term, tuple(self.lower(a, scope) for a in args), pos)
        if isinstance(f, Ident):
            b = scope.lookup(f.name)
            if b is None:
                raise UnknownMacro(f"{_at(f.pos)}unknown macro {f.name}")
            if b[0] != "macro":
                raise UnknownMacro(f"{_at(f.pos)}{f.name} is a stream, not a macro")
            return self.expand_macro(b[1], b[2], args, scope, pos)
        raise UnknownMacro(f"{_at(pos)}cannot call this expression")

    def function(self, e, scope):
        """The function argument of lift/slift."""
        if isinstance(e, OpRef):
            return terms.NOT if e.op == "!" else terms.binop_term(e.op)
        if isinstance(e, Ident) and e.name in terms.NAMED:
            return terms.NAMED[e.name]
        if isinstance(e, Call) and isinstance(e.func, Ident) and e.func.name == "const" and len(e.args) == 1:
            return terms.Lit(self.value(e.args[0], scope))
        raise UnknownMacro(f"{_at(getattr(e, 'pos', None))}unknown function for lift; "
                           f"use an operator, {', '.join(sorted(terms.NAMED))} or const(c)")

    def value(self, e, scope):
        """A compile-time constant."""
        if isinstance(e, (NumLit, BoolLit, StrLit)):
            return e.value
        if isinstance(e, UnitLit):
            return UNIT
        if isinstance(e, UnaryOp) and e.op == "-" and isinstance(e.operand, NumLit):
            return -e.operand.value
        if isinstance(e, Ident):
            b = scope.lookup(e.name)
            if b is not None and b[0] == "value":
                return b[1]
        raise SpecTypeError("expected a constant value", pos=getattr(e, "pos", None))

    def expand_macro(self, d: Def, def_scope: Scope, args, call_scope: Scope, pos):
        if d.name in self.stack:
            chain = " -> ".join(self.stack[self.stack.index(d.name):] + [d.name])
            raise RecursiveMacro(f"{_at(pos)}macro recursion: {chain}")
        params = d.params or ()
        if len(args) != len(params):
            raise ArityMismatch(f"{_at(pos)}{d.name} expects {len(params)} argument(s), got {len(args)}")
        scope = Scope(def_scope)
        type_params = {tp: terms.TypeVar() for tp in d.type_params}
        for p, a in zip(params, args):
            if p.type is not None and not p.type.events:
                v = self.value(a, call_scope)
                want = self.type_of(p.type, type_params, p.pos)
                if isinstance(want, str) and value_type_name(v) != want:
                    raise SpecTypeError(f"{d.name}: parameter {p.name} expects {want}, got {value_type_name(v)}",
                                        expected=want, actual=value_type_name(v), pos=getattr(a, "pos", pos))
                scope.define(p.name, ("value", v), p.pos)
            else:
                x = self.bind(self.lower(a, call_scope))
                scope.define(p.name, ("expr", x), p.pos)
                if p.type is not None:
                    self.out.constraints.append((x, self.type_of(p.type, type_params, p.pos), getattr(a, "pos", pos)))
        self.stack.append(d.name)
        self.type_params.append(type_params)
        try:
            body = self.lower(d.body, scope)
        finally:
            self.stack.pop()
            self.type_params.pop()
        if d.annotation is not None:
            if not d.annotation.events:
                raise SpecTypeError(f"macro {d.name} must return Events[...]", pos=d.pos)
            self.out.constraints.append((body, self.type_of(d.annotation, type_params, d.pos), pos))
        return body

    def lower_block(self, b: Block, scope: Scope):
        n = self.fresh_block()
        inner = Scope(scope)
        locals_ = []
        for d in b.defs:
            if d.is_macro:
                inner.define(d.name, ("macro", d, inner), d.pos)
            else:
                fresh = f"_m{n}_{d.name}"
                inner.define(d.name, ("stream", fresh), d.pos)
                locals_.append((d, fresh))
        for d, fresh in locals_:
            expr = self.lower(d.body, inner)
            self.emit(fresh, expr)
            if d.annotation is not None:
                visible = {}
                for tp in self.type_params:
                    visible.update(tp)
                self.annotate(expr, d.annotation, visible, d.pos)
        return self.lower(b.result, inner)


def _with_pos(e, pos):
    return dataclasses.replace(e, pos=pos) if pos is not None else e


def expand_macros(program: Program, stdlib: Optional[Program] = None) -> Expanded:
    return Expander(program, stdlib).run()
