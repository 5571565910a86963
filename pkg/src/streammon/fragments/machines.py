"""Single-equation transducers of the boolean fragment.

Each machine follows the operator's stream semantics under the synchronized
encoding, with state names ``s0, sT, sF, sw, sv, se`` (last) and
``s⊥, sa, sb, sc, se`` (time comparison). Once the output has ended the
machine sits in ``se`` and writes ``⊥``.
"""

from __future__ import annotations

from typing import Sequence

from .. import terms
from ..values import BOTTOM
from .dfst import Dfst
from .encoding import BOT, FF, LT_END, TT, base, has_event, is_end, prime, symbol_of, value_of

SINK = "se"


def nil_dfst(z: str) -> Dfst:
    return Dfst((), (z,), "s", lambda s, h: ("s", {z: BOT}), name=f"{z}:=nil")


def unit_dfst(z: str) -> Dfst:
    return Dfst((), (z,), "s0", lambda s, h: ("s1", {z: TT if s == "s0" else BOT}), name=f"{z}:=unit")


def lift_dfst(z: str, f, args: Sequence[str], arg_types: Sequence[str]) -> Dfst:
    """States ``s`` and ``se``; the output ends with the first input that ends."""

    def g(h):
        vals = [value_of(h[a], t) for a, t in zip(args, arg_types)]
        if all(v is None for v in vals):
            return BOT
        r = terms.evaluate(f, [BOTTOM if v is None else v for v in vals])
        return BOT if r is BOTTOM else symbol_of(r)

    def delta(s, h):
        if s == SINK:
            return SINK, {z: BOT}
        syms = [h[a] for a in args]
        if all(not is_end(v) for v in syms):
            return "s", {z: g(h)}
        if LT_END in syms:
            return SINK, {z: LT_END}
        return SINK, {z: prime(g(h))}

    return Dfst(tuple(dict.fromkeys(args)), (z,), "s", delta, name=f"{z}:=lift({terms.show(f)})")


def last_dfst(z: str, a: str, b: str) -> Dfst:
    """``z := last(a, b)``.

    Two bounds keep the output alive: the trigger ``b`` (while every trigger
    event so far found ``a`` known before it) and, while ``a`` has no event
    yet, the knowledge that ``z`` is empty until the first event of ``a``.
    The output ends once both bounds are reached; it is ``<'`` only if
    both end exclusively at this position.
    """

    def delta(s, h):
        if s == SINK:
            return SINK, {z: BOT}
        av, bv = h[a], h[b]
        prev = s[1] if s in ("sT", "sF") else None
        a_alive = s in ("s0", "sT", "sF", "sw")      # a had not ended before this position
        main_alive = s in ("s0", "sT", "sF", "sv")   # trigger bound not reached yet
        empty_alive = s in ("s0", "sw")              # no a event yet and a still running

        value = BOT
        main = None   # None: bound passed earlier; "go": continues; "<", "=": ends here excl./incl.
        if main_alive:
            bb = base(bv)
            if bb == "<":
                main = "<"
            elif bb in (TT, FF):
                if a_alive:
                    value = prev if prev is not None else BOT
                    main = "=" if is_end(bv) else "go"
                else:
                    main = "<"
            else:
                main = "=" if is_end(bv) else "go"
        empty = None
        if empty_alive:
            if has_event(av) or is_end(av):
                empty = "="   # Inclusive(first event) or the closure of a's ending
            else:
                empty = "go"

        new_prev = base(av) if a_alive and has_event(av) else prev
        a_alive2 = a_alive and not is_end(av)
        if "go" in (main, empty):
            out = value
            if main == "go" and a_alive2:
                nxt = {None: "s0", TT: "sT", FF: "sF"}[new_prev]
            elif main == "go":
                nxt = "sv"
            else:
                nxt = "sw"
            return nxt, {z: out}
        if "=" in (main, empty):
            return SINK, {z: prime(value)}
        return SINK, {z: LT_END}

    return Dfst((a, b), (z,), "s0", delta, name=f"{z}:=last({a},{b})")


def slift_geq_time_dfst(z: str, a: str, b: str) -> Dfst:
    """``z := slift(≥)(time(a), time(b))``: T on events of ``a``, F on events only of ``b``,
    once both streams have had an event; ends with the first input that ends."""
    states = {(False, False): "s⊥", (True, False): "sa", (False, True): "sb", (True, True): "sc"}
    seen = {v: k for k, v in states.items()}

    def delta(s, h):
        if s == SINK:
            return SINK, {z: BOT}
        av, bv = h[a], h[b]
        if LT_END in (av, bv):
            return SINK, {z: LT_END}
        sa, sb = seen[s]
        ea, eb = has_event(av), has_event(bv)
        sa, sb = sa or ea, sb or eb
        v = (TT if ea else FF) if (ea or eb) and sa and sb else BOT
        if is_end(av) or is_end(bv):
            return SINK, {z: prime(v)}
        return states[(sa, sb)], {z: v}

    return Dfst((a, b), (z,), "s⊥", delta, name=f"{z}:=slift(>=)(time({a}),time({b}))")


# -- the appendix tables, transcribed row by row -----------------------------------

# symbol sets used by the rows
_U = {BOT}
_TF = {TT, FF}
_PLAIN = {BOT, TT, FF}
_ENDS = {LT_END, "⊥'", "T'", "F'"}
_ANY = _PLAIN | _ENDS
_TF_END = {"T'", "F'"}
_NOT_LT = _ANY - {LT_END}
_END_NOT_LT = _ENDS - {LT_END}


def _same(s, av, bv):
    return s


def _to_a(s, av, bv):
    return "s" + base(av)


def _d(s):
    return s[1]


# last: (states, a-set, b-set, next state, output symbol)
LAST_ROWS = [
    ({"s0"}, _U, _PLAIN, _same, lambda s, a, b: BOT),
    ({"s0"}, _TF, _PLAIN, _to_a, lambda s, a, b: BOT),
    ({"s0"}, _ENDS, _ENDS, lambda *x: SINK, lambda s, a, b: "⊥'"),
    ({"s0"}, _PLAIN, _ENDS, lambda *x: "sw", lambda s, a, b: BOT),
    ({"s0"}, _ENDS, _PLAIN, lambda *x: "sv", lambda s, a, b: BOT),
    ({"sT", "sF"}, _U, _U, _same, lambda s, a, b: BOT),
    ({"sT", "sF"}, _TF, _U, _to_a, lambda s, a, b: BOT),
    ({"sT", "sF"}, _U, _TF, _same, lambda s, a, b: _d(s)),
    ({"sT", "sF"}, _TF, _TF, _to_a, lambda s, a, b: _d(s)),
    ({"sT", "sF"}, _ENDS, _PLAIN, lambda *x: "sv", lambda s, a, b: BOT),
    ({"sT", "sF"}, _ANY, {LT_END, "⊥'"}, lambda *x: SINK, lambda s, a, b: b),
    ({"sT", "sF"}, _ANY, _TF_END, lambda *x: SINK, lambda s, a, b: _d(s) + "'"),
    ({"sw"}, _U, _ANY, lambda *x: "sw", lambda s, a, b: BOT),
    ({"sw"}, _TF, _ANY, lambda *x: SINK, lambda s, a, b: "⊥'"),
    ({"sw"}, _ENDS, _ANY, lambda *x: SINK, lambda s, a, b: "⊥'"),
    ({"sv"}, _ANY, _U, lambda *x: "sv", lambda s, a, b: BOT),
    ({"sv"}, _ANY, {"⊥'"}, lambda *x: SINK, lambda s, a, b: "⊥'"),
    # y in {<, T, F} with or without the ending mark
    ({"sv"}, _ANY, {LT_END, TT, FF, "T'", "F'"}, lambda *x: SINK, lambda s, a, b: LT_END),
]

_ALL5 = {"s⊥", "sa", "sb", "sc"}


def _c(v):
    return lambda s, a, b: v


_E = lambda *x: SINK  # noqa: E731

SLIFT_ROWS = [
    (_ALL5, _U, _U, _same, _c(BOT)),
    (_ALL5, {LT_END}, _NOT_LT, _E, _c(LT_END)),
    (_ALL5, _NOT_LT, {LT_END}, _E, _c(LT_END)),
    (_ALL5, _TF_END, _TF, _E, _c("T'")),
    (_ALL5, _TF, _TF_END, _E, _c("T'")),
    (_ALL5, _TF_END, _TF_END, _E, _c("T'")),
    ({"s⊥"}, _TF, _U, lambda *x: "sa", _c(BOT)),
    ({"s⊥"}, _U, _TF, lambda *x: "sb", _c(BOT)),
    ({"s⊥"}, _TF, _TF, lambda *x: "sc", _c(TT)),
    ({"s⊥"}, _END_NOT_LT, _U, _E, _c("⊥'")),
    ({"s⊥"}, {"⊥'"}, _TF, _E, _c("⊥'")),
    ({"s⊥"}, {"⊥'"}, _TF_END, _E, _c("⊥'")),
    ({"s⊥"}, _U, _END_NOT_LT, _E, _c("⊥'")),
    ({"s⊥"}, _TF, {"⊥'"}, _E, _c("⊥'")),
    ({"s⊥"}, _TF_END, {"⊥'"}, _E, _c("⊥'")),
    ({"sa"}, _TF, _U, lambda *x: "sa", _c(BOT)),
    ({"sa"}, _U, _TF, lambda *x: "sc", _c(FF)),
    ({"sa"}, _TF, _TF, lambda *x: "sc", _c(TT)),
    ({"sa"}, _END_NOT_LT, _U, _E, _c("⊥'")),
    ({"sa"}, {"⊥'"}, _TF, _E, _c("F'")),
    ({"sa"}, {"⊥'"}, _TF_END, _E, _c("F'")),
    ({"sa"}, _U, _TF_END, _E, _c("F'")),
    ({"sa"}, _NOT_LT, {"⊥'"}, _E, _c("⊥'")),
    ({"sb"}, _U, _TF, lambda *x: "sb", _c(BOT)),
    ({"sb"}, _TF, _ANY, lambda *x: "sc", _c(TT)),
    ({"sb"}, _U, _END_NOT_LT, _E, _c("⊥'")),
    ({"sb"}, {"⊥'"}, _NOT_LT, _E, _c("⊥'")),
    ({"sb"}, _TF_END, _U, _E, _c("T'")),
    ({"sb"}, _TF, {"⊥'"}, _E, _c("T'")),
    ({"sb"}, _TF_END, {"⊥'"}, _E, _c("T'")),
    ({"sc"}, _U, _TF, lambda *x: "sc", _c(FF)),
    ({"sc"}, _TF, _ANY, lambda *x: "sc", _c(TT)),
    ({"sc"}, {"⊥'"}, _U, _E, _c("⊥'")),
    ({"sc"}, _U, {"⊥'"}, _E, _c("⊥'")),
    ({"sc"}, {"⊥'"}, _TF, _E, _c("F'")),
    ({"sc"}, {"⊥'"}, _TF_END, _E, _c("F'")),
    ({"sc"}, _TF_END, _U, _E, _c("T'")),
    ({"sc"}, _U, _TF_END, _E, _c("F'")),
    ({"sc"}, _TF, {"⊥'"}, _E, _c("T'")),
    ({"sc"}, _TF_END, {"⊥'"}, _E, _c("T'")),
]

TABLES = {"last": LAST_ROWS, "slift": SLIFT_ROWS}


def table_rows(kind: str, state: str, av: str, bv: str) -> list:
    """Indices of every row of the transcribed table matching the situation."""
    return [i for i, (ss, A, B, _, _) in enumerate(TABLES[kind]) if state in ss and av in A and bv in B]


def table_step(kind: str, state: str, av: str, bv: str):
    """First listed matching row, as ``(next_state, output_symbol)``, or None."""
    rows = table_rows(kind, state, av, bv)
    if not rows:
        return None
    _, _, _, nxt, out = TABLES[kind][rows[0]]
    return nxt(state, av, bv), out(state, av, bv)


def table_dfst(kind: str, z: str, a: str, b: str) -> Dfst:
    """The transcribed table as a transducer (no rows for ``se`` except the shared ones)."""
    init = "s0" if kind == "last" else "s⊥"

    def delta(s, h):
        r = table_step(kind, s, h[a], h[b])
        return None if r is None else (r[0], {z: r[1]})

    return Dfst((a, b), (z,), init, delta, name=f"{z}:=table-{kind}({a},{b})")


def conformance(kind: str) -> list:
    """Situations where the transcribed table and the semantic machine differ.

    Each entry is a dict with state, letter, the table's choice, the semantic
    choice and how many table rows match (more than one means overlap).
    """
    machine = last_dfst("z", "a", "b") if kind == "last" else slift_geq_time_dfst("z", "a", "b")
    states = ["s0", "sT", "sF", "sw", "sv"] if kind == "last" else ["s⊥", "sa", "sb", "sc"]
    report = []
    for s in states:
        for av in sorted(_ANY):
            for bv in sorted(_ANY):
                rows = table_rows(kind, s, av, bv)
                tab = table_step(kind, s, av, bv)
                nxt, out = machine.step(s, {"a": av, "b": bv})
                sem = (nxt, out["z"])
                if tab != sem or len(rows) > 1:
                    report.append({"state": s, "a": av, "b": bv, "table": tab, "semantic": sem, "rows": rows})
    return report


def conformance_markdown() -> str:
    """The conformance report as the Markdown document shipped in ``docs/``."""
    lines = [
        "# Transducer table conformance", "",
        "The per-equation transducers in `streammon.fragments.machines` are derived from the stream semantics",
        "of `last` and of the time comparison `slift(>=)(time(a), time(b))`. The appendix tables are also",
        "transcribed row by row (`LAST_ROWS`, `SLIFT_ROWS`). `conformance(kind)` lists every state and letter",
        "where the two disagree or where more than one table row matches. This file is the output of",
        "`conformance_markdown()`; a test checks that it is current.", "",
        "Reading conventions for the transcription: `a_x` is an unmarked symbol, `a'_x` an ending symbol and",
        "`a^?_x` either form. A set such as `y ∈ {<, T, F}` under `^?` is read as `{<', T, F, T', F'}`.",
        "Where rows overlap, the transcription takes the first listed row.", "",
        "Rows are given by index into the transcribed list (0-based).", "",
    ]
    for kind, title in (("last", "last(a, b)"), ("slift", "slift(>=)(time(a), time(b))")):
        lines += [f"## {title}", "", "| state | a | b | table (first row) | semantics | matching rows |",
                  "|---|---|---|---|---|---|"]
        for r in conformance(kind):
            tab = "no row" if r["table"] is None else f"{r['table'][0]}, z={r['table'][1]}"
            sem = f"{r['semantic'][0]}, z={r['semantic'][1]}"
            rows = ", ".join(map(str, r["rows"])) or "-"
            lines.append(f"| {r['state']} | {r['a']} | {r['b']} | {tab} | {sem} | {rows} |")
        lines.append("")
    return "\n".join(lines)
