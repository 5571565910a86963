"""Core expressions, flat specifications and the builders for derived operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

from . import terms
from .terms import Term
from .values import UNIT

STREAM_TYPES = ("Unit", "Bool", "Num", "Str")


@dataclass(frozen=True)
class Nil:
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class UnitE:
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lift:
    f: Term
    args: tuple
    pos: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.args:
            raise ValueError("lift needs at least one argument")
        if terms.arity(self.f) > len(self.args):
            raise ValueError(f"function uses {terms.arity(self.f)} parameters, lift has {len(self.args)} arguments")


@dataclass(frozen=True)
class TimeE:
    arg: "Expr"
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Last:
    values: "Expr"
    trigger: "Expr"
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Delay:
    delays: "Expr"
    resets: "Expr"
    pos: object = field(default=None, compare=False, repr=False)


Expr = Union[Nil, UnitE, Var, Lift, TimeE, Last, Delay]


def children(e: Expr) -> tuple:
    if isinstance(e, Lift):
        return e.args
    if isinstance(e, TimeE):
        return (e.arg,)
    if isinstance(e, Last):
        return (e.values, e.trigger)
    if isinstance(e, Delay):
        return (e.delays, e.resets)
    return ()


def with_children(e: Expr, kids: Sequence[Expr]) -> Expr:
    if isinstance(e, Lift):
        return Lift(e.f, tuple(kids), e.pos)
    if isinstance(e, TimeE):
        return TimeE(kids[0], e.pos)
    if isinstance(e, Last):
        return Last(kids[0], kids[1], e.pos)
    if isinstance(e, Delay):
        return Delay(kids[0], kids[1], e.pos)
    return e


def variables(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    for c in children(e):
        yield from variables(c)


def show(e: Expr) -> str:
    if isinstance(e, Nil):
        return "nil"
    if isinstance(e, UnitE):
        return "unit"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lift):
        return f"lift({terms.show(e.f)})({', '.join(show(a) for a in e.args)})"
    if isinstance(e, TimeE):
        return f"time({show(e.arg)})"
    if isinstance(e, Last):
        return f"last({show(e.values)}, {show(e.trigger)})"
    if isinstance(e, Delay):
        return f"delay({show(e.delays)}, {show(e.resets)})"
    raise TypeError(e)


@dataclass
class CoreSpec:
    """Inputs with their value types, ordered equations and declared outputs.

    ``types`` maps every equation name to its value type once the spec has been
    type checked; hand-built specs may leave it partial.
    """

    inputs: dict = field(default_factory=dict)       # name -> value type name
    equations: dict = field(default_factory=dict)    # name -> Expr (insertion ordered)
    outputs: list = field(default_factory=list)
    types: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        clash = set(self.inputs) & set(self.equations)
        if clash:
            raise ValueError(f"names both input and equation: {sorted(clash)}")
        known = set(self.inputs) | set(self.equations)
        for name, e in self.equations.items():
            for v in variables(e):
                if v not in known:
                    raise ValueError(f"equation {name} uses undefined stream {v}")
        for o in self.outputs:
            if o not in known:
                raise ValueError(f"output {o} is not defined")

    def is_flat(self) -> bool:
        return all(is_flat_expr(e) for e in self.equations.values())

    def type_of(self, name: str):
        if name in self.inputs:
            return self.inputs[name]
        return self.types.get(name)

    def show(self) -> str:
        lines = [f"in {n}: Events[{t}]" for n, t in self.inputs.items()]
        lines += [f"def {n} := {show(e)}" for n, e in self.equations.items()]
        lines += [f"out {o}" for o in self.outputs]
        return "\n".join(lines) + ("\n" if lines else "")


def is_flat_expr(e: Expr) -> bool:
    return all(isinstance(c, Var) for c in children(e))


def flatten(spec: CoreSpec) -> CoreSpec:
    """Name every nested subexpression with a fresh ``_flatN`` equation.

    Structurally equal subexpressions share one name within a call. The fresh
    equations are placed right before the first equation that needs them.
    """
    taken = set(spec.inputs) | set(spec.equations)
    counter = 0
    memo: dict = {}
    out: dict = {}
    types = dict(spec.types)

    def fresh() -> str:
        nonlocal counter
        while True:
            name = f"_flat{counter}"
            counter += 1
            if name not in taken:
                taken.add(name)
                return name

    def name_of(e: Expr) -> Expr:
        if isinstance(e, Var):
            return e
        flat = flat_node(e)
        key = flat
        if key in memo:
            return Var(memo[key])
        n = fresh()
        memo[key] = n
        out[n] = flat
        return Var(n)

    def flat_node(e: Expr) -> Expr:
        kids = children(e)
        if not kids:
            return e
        return with_children(e, [name_of(k) for k in kids])

    for name, e in spec.equations.items():
        out_e = flat_node(e)
        out[name] = out_e
    result = CoreSpec(dict(spec.inputs), out, list(spec.outputs), types)
    if spec.types:
        _infer_fresh_types(result)
    return result


def _infer_fresh_types(spec: CoreSpec):
    """Fill types for fresh equations from already-known neighbours."""
    changed = True
    while changed:
        changed = False
        for name, e in spec.equations.items():
            if name in spec.types:
                continue
            t = _expr_type(spec, e)
            if t is not None:
                spec.types[name] = t
                changed = True


def _expr_type(spec: CoreSpec, e: Expr):
    if isinstance(e, UnitE):
        return "Unit"
    if isinstance(e, Nil):
        return "Unit"
    if isinstance(e, Var):
        return spec.type_of(e.name)
    if isinstance(e, TimeE):
        return "Num"
    if isinstance(e, Delay):
        return "Unit"
    if isinstance(e, Last):
        return _expr_type(spec, e.values)
    if isinstance(e, Lift):
        params = []
        for a in e.args:
            t = _expr_type(spec, a)
            params.append(t if t is not None else terms.TypeVar())
        try:
            r = terms.resolve(terms.infer(e.f, params))
        except terms.UnificationError:
            return None
        return r if isinstance(r, str) else None
    return None


# -- builders for derived operators ---------------------------------------------

def V(name: str) -> Var:
    return Var(name)


def lift(f: Term, *args: Expr) -> Lift:
    return Lift(f, tuple(args))


def merge(x: Expr, y: Expr) -> Lift:
    return Lift(terms.MERGE, (x, y))


def const(c, x: Expr) -> Lift:
    return Lift(terms.Lit(c), (x,))


def const_signal(c) -> Lift:
    return const(c, UnitE())


def slift(f: Term, x: Expr, y: Expr) -> Lift:
    """Signal lift: combine the latest known values of ``x`` and ``y``.

    ``x`` and ``y`` are used twice, so pass variables (or cheap expressions)
    to avoid duplicated subcomputations after flattening.
    """
    xs = merge(x, Last(x, y))
    ys = merge(y, Last(y, x))
    return Lift(terms.slift_term(f), (xs, ys))


def filter_(cond: Expr, x: Expr) -> Lift:
    return Lift(terms.FILTER, (merge(cond, Last(cond, x)), x))


def spec(inputs: Mapping[str, str], equations: Mapping[str, Expr], outputs: Sequence[str] = (), types=None) -> CoreSpec:
    return CoreSpec(dict(inputs), dict(equations), list(outputs), dict(types or {}))


__all__ = [
    "Nil", "UnitE", "Var", "Lift", "TimeE", "Last", "Delay", "Expr", "CoreSpec",
    "flatten", "children", "variables", "show", "is_flat_expr",
    "V", "lift", "merge", "const", "const_signal", "slift", "filter_", "spec", "UNIT",
]
