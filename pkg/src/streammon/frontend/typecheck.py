"""Type inference for expanded specifications (unification over value types)."""

from __future__ import annotations

from .. import ir, terms
from ..errors import SpecTypeError
from ..terms import TypeVar, UnificationError, resolve, unify
from .expand import Expanded


def _fail(err: UnificationError, what: str, pos):
    raise SpecTypeError(f"{what}: expected {_name(err.expected)}, got {_name(err.actual)}",
                        expected=_name(err.expected), actual=_name(err.actual), pos=pos)


def _name(t):
    t = resolve(t)
    return "a type variable" if isinstance(t, TypeVar) else f"Events[{t}]"


class TypeChecker:
    def __init__(self, expanded: Expanded):
        self.x = expanded
        self.vars = {n: TypeVar() for n in expanded.equations}

    def of_name(self, name):
        if name in self.x.inputs:
            return self.x.inputs[name]
        return self.vars[name]

    def infer(self, e):
        if isinstance(e, ir.Var):
            return self.of_name(e.name)
        if isinstance(e, ir.Nil):
            return TypeVar()
        if isinstance(e, ir.UnitE):
            return "Unit"
        if isinstance(e, ir.TimeE):
            self.infer(e.arg)
            return "Num"
        if isinstance(e, ir.Last):
            self.infer(e.trigger)
            return self.infer(e.values)
        if isinstance(e, ir.Delay):
            d = self.infer(e.delays)
            self.infer(e.resets)
            try:
                unify("Num", d)
            except UnificationError as err:
                _fail(err, "the delays of delay must be numbers", e.pos)
            return "Unit"
        if isinstance(e, ir.Lift):
            args = [self.infer(a) for a in e.args]
            try:
                return terms.infer(e.f, args)
            except UnificationError as err:
                _fail(err, f"operands of {terms.show(e.f)}", e.pos)
        raise TypeError(e)

    def run(self) -> ir.CoreSpec:
        for name, e in self.x.equations.items():
            t = self.infer(e)
            try:
                unify(self.vars[name], t)
            except UnificationError as err:
                _fail(err, f"definition of {name}", e.pos)
        for e, want, pos in self.x.constraints:
            try:
                unify(want, self.infer(e))
            except UnificationError as err:
                _fail(err, "declared type does not match", pos)
        types = {}
        for name, v in self.vars.items():
            t = resolve(v)
            if isinstance(t, TypeVar):
                # only nil-like streams stay unconstrained; they never carry a value
                unify(t, "Unit")
                t = "Unit"
            types[name] = t
        return ir.CoreSpec(dict(self.x.inputs), dict(self.x.equations), list(self.x.outputs), types)


def type_check(expanded: Expanded) -> ir.CoreSpec:
    return TypeChecker(expanded).run()
