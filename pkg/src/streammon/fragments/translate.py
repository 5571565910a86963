"""Recognising the boolean fragment and translating it to one transducer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .. import ir, terms
from ..errors import NotBoolFragment
from .dfst import Dfst, closure, compose_parallel, restrict
from .encoding import symbols_for
from .machines import last_dfst, lift_dfst, nil_dfst, slift_geq_time_dfst, unit_dfst

BOOLISH = ("Bool", "Unit")
GEQ = terms.slift_term(terms.binop_term(">="))


@dataclass(frozen=True)
class Component:
    """One transducer-sized piece of a fragment spec."""

    kind: str                  # nil | unit | lift | last | slift
    output: str
    args: Tuple[str, ...] = ()
    f: object = None
    arg_types: Tuple[str, ...] = ()
    absorbed: Tuple[str, ...] = ()   # Num-typed helper equations folded into a time comparison


def _typed(spec: ir.CoreSpec) -> ir.CoreSpec:
    """The spec with a type for every equation (inferring them when missing)."""
    if all(n in spec.types for n in spec.equations):
        return spec
    from ..frontend.expand import Expanded
    from ..frontend.typecheck import type_check
    return type_check(Expanded(dict(spec.inputs), dict(spec.equations), list(spec.outputs), []))


def _match_time_comparison(spec: ir.CoreSpec, name: str, e) -> Optional[Component]:
    """``name := lift(slift ≥)(merge(ta, last(ta, tb)), merge(tb, last(tb, ta)))``
    with ``ta := time(a)`` and ``tb := time(b)``, as produced by flattening."""
    eqs = spec.equations
    if not (isinstance(e, ir.Lift) and e.f == GEQ and len(e.args) == 2):
        return None

    def merge_with_last(v):
        m = eqs.get(v.name) if isinstance(v, ir.Var) else None
        if not (isinstance(m, ir.Lift) and m.f == terms.MERGE and len(m.args) == 2):
            return None
        t, l = m.args
        last = eqs.get(l.name) if isinstance(l, ir.Var) else None
        if not (isinstance(t, ir.Var) and isinstance(last, ir.Last)
                and isinstance(last.values, ir.Var) and last.values.name == t.name
                and isinstance(last.trigger, ir.Var)):
            return None
        return v.name, t.name, l.name, last.trigger.name

    x, y = (merge_with_last(v) for v in e.args)
    if x is None or y is None:
        return None
    xm, ta, xl, x_trig = x
    ym, tb, yl, y_trig = y
    if x_trig != tb or y_trig != ta:
        return None
    srcs = []
    for t in (ta, tb):
        te = eqs.get(t)
        if not (isinstance(te, ir.TimeE) and isinstance(te.arg, ir.Var)):
            return None
        srcs.append(te.arg.name)
    return Component("slift", name, tuple(srcs), absorbed=(xm, ym, xl, yl, ta, tb))


def components(spec: ir.CoreSpec) -> List[Component]:
    """Split a flat spec into fragment components or raise :class:`NotBoolFragment`."""
    if not spec.is_flat():
        spec = ir.flatten(spec)
    spec = _typed(spec)
    types = {**spec.inputs, **spec.types}
    for n, t in spec.inputs.items():
        if t not in BOOLISH:
            raise NotBoolFragment(f"input {n} has type {t}")
    comps, absorbed = [], set()
    for name, e in spec.equations.items():
        c = _match_time_comparison(spec, name, e)
        if c is not None:
            comps.append(c)
            absorbed.update(c.absorbed)
    helper_users: Dict[str, set] = {}
    for name, e in spec.equations.items():
        if name in absorbed:
            continue
        is_cmp = any(c.output == name and c.kind == "slift" for c in comps)
        if not is_cmp:
            for v in ir.variables(e):
                if v in absorbed:
                    helper_users.setdefault(v, set()).add(name)
    if helper_users:
        v, users = sorted(helper_users.items())[0]
        raise NotBoolFragment(f"time helper {v} is used outside a time comparison (by {sorted(users)[0]})")
    for name, e in spec.equations.items():
        if name in absorbed or any(c.output == name for c in comps):
            continue
        if types.get(name) not in BOOLISH:
            raise NotBoolFragment(f"{name} has type {types.get(name)}")
        if isinstance(e, ir.Nil):
            comps.append(Component("nil", name))
        elif isinstance(e, ir.UnitE):
            comps.append(Component("unit", name))
        elif isinstance(e, ir.Var):
            comps.append(Component("lift", name, (e.name,), terms.IDENTITY, (types[e.name],)))
        elif isinstance(e, ir.Lift):
            args = tuple(a.name for a in e.args)
            for a in args:
                if types.get(a) not in BOOLISH:
                    raise NotBoolFragment(f"{name} lifts over {a} of type {types.get(a)}")
            comps.append(Component("lift", name, args, e.f, tuple(types[a] for a in args)))
        elif isinstance(e, ir.Last):
            comps.append(Component("last", name, (e.values.name, e.trigger.name)))
        else:
            raise NotBoolFragment(f"{name} uses {type(e).__name__.lower()}, which is outside the fragment")
    order = {n: i for i, n in enumerate(spec.equations)}
    comps.sort(key=lambda c: order[c.output])
    return comps


def is_bool_fragment(spec: ir.CoreSpec) -> bool:
    try:
        components(spec)
    except NotBoolFragment:
        return False
    return True


def component_dfst(c: Component) -> Dfst:
    if c.kind == "nil":
        return nil_dfst(c.output)
    if c.kind == "unit":
        return unit_dfst(c.output)
    if c.kind == "lift":
        return lift_dfst(c.output, c.f, c.args, c.arg_types)
    if c.kind == "last":
        return last_dfst(c.output, *c.args)
    return slift_geq_time_dfst(c.output, *c.args)


def fragment_outputs(spec: ir.CoreSpec) -> List[str]:
    return list(spec.outputs) if spec.outputs else list(spec.equations)


def to_dfst(spec: ir.CoreSpec, outputs: Optional[List[str]] = None) -> Dfst:
    """Compose the component transducers, close the feedback, keep ``outputs``.

    The result reads letters over all declared inputs of the spec.
    """
    flat = spec if spec.is_flat() else ir.flatten(spec)
    comps = components(flat)
    outputs = list(outputs) if outputs is not None else fragment_outputs(spec)
    if not comps:
        r = Dfst((), (), "s", lambda s, h: ("s", {}), name="empty")
    else:
        r = component_dfst(comps[0])
        for c in comps[1:]:
            r = compose_parallel(r, component_dfst(c))
    r = closure(r)
    return restrict(r, list(flat.inputs), outputs, {n: symbols_for(t) for n, t in flat.inputs.items()})
