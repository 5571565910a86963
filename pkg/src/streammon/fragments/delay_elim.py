"""Replacing the single delay of a specification by a validating check.

Given a specification with one ``d := delay(a, r)``, :func:`delay_eliminate`
builds a delay-free specification that reads ``d`` as an input and derives a
boolean stream ``z``. Every event of ``z`` is true iff ``d`` is exactly the
stream the delay would have produced.

The effective absolute due time is kept in ``a'``::

    a' := merge(filter(last(a', a) = time(a), time(a) + a),
                filter(time(r) = time(a), time(a) + a),
                const(∞)(merge(r, unit)))

At every event of ``t := merge(a, r, d)`` (on timestamps) one of two things
must hold, with ``D := merge(time(d), zero)`` read as a signal and
``L := last(a', t)``: either ``D = L`` (the due time was met by ``d``), or
``time(t) > D`` and ``L > time(t)`` (nothing is due yet and ``d`` stayed
silent). ``∞`` is the number ``TOP``, which is larger than every other number.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .. import ir, terms
from ..errors import NotSingleDelay
from ..terms import BinOp, If, IsSome, Lit, P0, P1
from ..values import BOTTOM, TOP

# equal when both present, false when only one side has an event
EQ_PRESENT = If(IsSome(P0), If(IsSome(P1), BinOp("==", P0, P1), Lit(False)), Lit(False))
# keep the first argument at events of the second
AT = If(IsSome(P1), P0, Lit(BOTTOM))


def _and_present(n: int):
    """Conjunction over the present arguments (absent ones count as true)."""
    term = If(IsSome(terms.Param(0)), terms.Param(0), Lit(True))
    for i in range(1, n):
        p = terms.Param(i)
        term = BinOp("&&", term, If(IsSome(p), p, Lit(True)))
    return term


def find_delay(spec: ir.CoreSpec) -> str:
    names = [n for n, e in spec.equations.items() if isinstance(e, ir.Delay)]
    others = [n for n, e in spec.equations.items() for sub in _walk(e) if isinstance(sub, ir.Delay) and sub is not e]
    if len(names) + len(others) != 1:
        raise NotSingleDelay(f"expected exactly one delay, found {len(names) + len(others)}")
    if not names:
        raise NotSingleDelay(f"the delay inside {others[0]} has no name of its own; define it as a separate stream")
    return names[0]


def _walk(e):
    yield e
    for c in ir.children(e):
        yield from _walk(c)


def delay_eliminate(spec: ir.CoreSpec, d_name: Optional[str] = None, check_outputs: Sequence[str] = (),
                    z_name: str = "z") -> ir.CoreSpec:
    """The validating specification; ``check_outputs`` are compared with inputs ``<y>_observed``."""
    found = find_delay(spec)
    if d_name is not None and d_name != found:
        raise NotSingleDelay(f"{d_name} is not the delay stream (that is {found})")
    d_name = found
    flat = spec if spec.is_flat() else ir.flatten(spec)
    delay = flat.equations[d_name]
    a, r = delay.delays, delay.resets
    d = ir.Var(d_name)
    taken = set(flat.inputs) | set(flat.equations)

    def fresh(base: str) -> str:
        name, i = f"_de_{base}", 0
        while name in taken:
            i += 1
            name = f"_de_{base}{i}"
        taken.add(name)
        return name

    n = {k: fresh(k) for k in ("ta", "tr", "due", "lastdue", "t", "tt", "dsig", "L", "met", "quiet", "ok")}
    V = ir.Var
    eqs = {k: e for k, e in flat.equations.items() if k != d_name}
    ta, tr = V(n["ta"]), V(n["tr"])
    eqs[n["ta"]] = ir.TimeE(a)
    eqs[n["tr"]] = ir.TimeE(r)
    eqs[n["lastdue"]] = ir.Last(V(n["due"]), a)
    new_due = ir.lift(terms.binop_term("+"), ta, a)
    eqs[n["due"]] = ir.merge(
        ir.merge(ir.filter_(ir.lift(EQ_PRESENT, V(n["lastdue"]), ta), new_due),
                 ir.filter_(ir.lift(EQ_PRESENT, tr, ta), new_due)),
        ir.const(TOP, ir.merge(ir.const(True, r), ir.const(True, ir.UnitE()))))
    eqs[n["t"]] = ir.merge(ir.merge(ta, tr), ir.TimeE(d))
    eqs[n["tt"]] = ir.TimeE(V(n["t"]))
    eqs[n["dsig"]] = ir.merge(ir.TimeE(d), ir.const_signal(Fraction(0)))
    eqs[n["L"]] = ir.Last(V(n["due"]), V(n["t"]))
    gt = terms.binop_term(">")
    eqs[n["met"]] = ir.slift(terms.binop_term("=="), V(n["dsig"]), V(n["L"]))
    eqs[n["quiet"]] = ir.slift(terms.binop_term("&&"), ir.slift(gt, V(n["tt"]), V(n["dsig"])),
                               ir.slift(gt, V(n["L"]), V(n["tt"])))
    eqs[n["ok"]] = ir.lift(AT, ir.slift(terms.binop_term("||"), V(n["met"]), V(n["quiet"])), V(n["t"]))
    checks = [V(n["ok"])]
    inputs = dict(flat.inputs)
    inputs[d_name] = "Unit"
    types = {k: v for k, v in flat.types.items() if k in eqs}
    for y in check_outputs:
        obs = f"{y}_observed"
        if obs in taken:
            raise NotSingleDelay(f"cannot add input {obs}: the name is taken")
        taken.add(obs)
        inputs[obs] = flat.type_of(y) or spec.type_of(y)
        eq_name = fresh(f"same_{y}")
        eqs[eq_name] = ir.lift(EQ_PRESENT, V(y), V(obs))
        checks.append(V(eq_name))
    if z_name in taken:
        z_name = fresh(z_name)
    eqs[z_name] = ir.Lift(_and_present(len(checks)), tuple(checks))
    out = ir.CoreSpec(inputs, eqs, [z_name], types)
    return ir.flatten(out)
