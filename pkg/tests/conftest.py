import random
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import pytest

from streammon import ir, terms
from streammon.engine import Limits, evaluate
from streammon.errors import EventLimitExceeded
from streammon.fragments import beta_times, encode_beta, run_dfst, to_dfst
from streammon.frontend import compile_spec
from streammon.streams import INFINITE, EventStream, Exclusive, Inclusive
from streammon.traceio import parse_trace
from streammon.values import UNIT

GOLDEN = Path(__file__).parent / "golden"
BOOL = GOLDEN / "bool"
# golden specs whose figures are reproduced exactly; period needs an event limit
FIGURES = ["temperature", "ringbuffer", "diff", "delay", "merge", "slift", "filter", "last"]
CORPUS = FIGURES + ["period"]


def load_spec(path):
    return compile_spec(Path(path).read_text(encoding="utf-8"))


def golden_spec(name):
    return load_spec(GOLDEN / f"{name}.spec")


def golden_inputs(name, spec=None):
    spec = spec or golden_spec(name)
    return parse_trace((GOLDEN / f"{name}.trace").read_text(encoding="utf-8"), list(spec.inputs))


def golden_limits(name):
    return Limits(max_events=4) if name == "period" else Limits()


def bool_specs():
    return sorted(p.stem for p in BOOL.glob("*.spec"))


def bool_spec(name):
    return load_spec(BOOL / f"{name}.spec")


def outcome(f, *args, **kwargs):
    """Comparable result of an evaluation, including the truncated one at an event limit."""
    try:
        res = f(*args, **kwargs)
        limit = None
    except EventLimitExceeded as e:
        res, limit = e.outputs, (e.limit, e.progress)
    return limit, {n: (tuple(s.events), s.progress) for n, s in res.items()}


# -- random streams -------------------------------------------------------------------

def random_value(rng, typ):
    if typ == "Unit":
        return UNIT
    if typ == "Bool":
        return rng.random() < 0.5
    if typ == "Str":
        return rng.choice(["a", "b"])
    return Fraction(rng.randint(1, 8), rng.choice([1, 1, 2]))


def random_stream(rng, typ, horizon=20, max_events=6, grid=1):
    times = sorted(rng.sample(range(0, horizon * grid), rng.randint(0, max_events)))
    times = [Fraction(t, grid) for t in times]
    evs = [(t, random_value(rng, typ)) for t in times]
    last = times[-1] if times else Fraction(0)
    k = rng.random()
    if k < 0.3:
        p = INFINITE
    elif k < 0.65:
        p = Inclusive(last + rng.randint(0, 4))
    else:
        p = Exclusive(last + rng.randint(1, 4) if times else rng.randint(0, 4))
    return EventStream(evs, p)


def random_inputs(rng, spec, **kw):
    return {n: random_stream(rng, t, **kw) for n, t in spec.inputs.items()}


def bool_stream(rng, typ, horizon=12, max_events=8):
    """A random Bool or Unit stream with at most ``max_events`` events on an integer grid."""
    times = sorted(rng.sample(range(horizon), rng.randint(0, max_events)))
    evs = [(Fraction(t), UNIT if typ == "Unit" else rng.random() < 0.5) for t in times]
    last = times[-1] if times else 0
    k = rng.random()
    if k < 0.3:
        p = INFINITE
    elif k < 0.65:
        p = Inclusive(rng.randint(last, horizon + 1))
    else:
        p = Exclusive(rng.randint(last + 1 if times else 0, horizon + 2))
    return EventStream(evs, p)


def agreement_failures(spec, rng, n):
    """Instances where beta of the engine output differs from the transducer run on beta of the input."""
    r = to_dfst(spec)
    bad = []
    for _ in range(n):
        ins = {name: bool_stream(rng, t) for name, t in spec.inputs.items()}
        out = evaluate(spec, ins, exact_progress=True)
        times = beta_times(ins)
        _, win = encode_beta(ins, times)
        _, wout = encode_beta(out, times)
        if run_dfst(r, win) != [{k: letter[k] for k in r.outputs} for letter in wout]:
            bad.append(ins)
    return bad


# -- random specifications ------------------------------------------------------------

_ARITH = ["+", "-", "*"]


def random_spec(rng, n_eqs=5, with_delay=False):
    """A random well-formed spec over two Num inputs and a Unit input.

    Non-delayed arguments only refer to inputs and earlier equations; the
    first argument of last may refer to any equation, which creates
    recursion through a delayed edge. With ``with_delay`` at least one
    equation is a delay.
    """
    inputs = {"x": "Num", "y": "Num", "u": "Unit"}
    names = [f"e{i}" for i in range(n_eqs)]
    eqs = {}
    types = {}
    forced_delay = rng.randrange(n_eqs) if with_delay else None
    for i, name in enumerate(names):
        earlier_num = ["x", "y"] + [n for n in names[:i] if types[n] == "Num"]
        earlier_any = earlier_num + ["u"] + [n for n in names[:i] if types[n] != "Num"]
        V = ir.Var
        kind = rng.choice(["lift", "merge", "slift", "last", "last_rec", "time", "const", "filter"]
                          + (["delay"] if with_delay else []))
        if with_delay and i == forced_delay:
            kind = "delay"
        a, b = V(rng.choice(earlier_num)), V(rng.choice(earlier_num))
        if kind == "lift":
            e = ir.lift(terms.binop_term(rng.choice(_ARITH)), a, b)
        elif kind == "merge":
            e = ir.merge(a, b)
        elif kind == "slift":
            e = ir.slift(terms.binop_term(rng.choice(_ARITH)), a, b)
        elif kind == "last":
            e = ir.Last(a, V(rng.choice(earlier_any)))
        elif kind == "last_rec":
            # recursion through the delayed first argument of last
            e = ir.merge(ir.Last(V(name), V(rng.choice(earlier_any))), ir.const(Fraction(rng.randint(0, 3)), ir.UnitE()))
        elif kind == "time":
            e = ir.TimeE(V(rng.choice(earlier_any)))
        elif kind == "const":
            e = ir.const(Fraction(rng.randint(1, 5)), V(rng.choice(earlier_any)))
        elif kind == "filter":
            cond = ir.slift(terms.binop_term("<"), a, b)
            e = ir.filter_(cond, V(rng.choice(earlier_num)))
        else:
            # the timer is armed at resets that carry a delay value, so usually derive one from the other
            r = V(rng.choice(earlier_any))
            src = r if rng.random() < 0.7 else V(rng.choice(earlier_any))
            d = ir.const(Fraction(rng.randint(1, 4)), src)
            e = ir.const(Fraction(1), ir.Delay(d, r))
        eqs[name] = e
        types[name] = "Num"
    return ir.flatten(ir.CoreSpec(inputs, eqs, names, {}))


@pytest.fixture
def rng():
    return random.Random(1234)


# -- acceptance report ----------------------------------------------------------------

ACCEPTANCE = {}


@contextmanager
def criterion(number, title, seconds):
    """Run one acceptance criterion: record PASS/FAIL and fail when the time bound is exceeded."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as e:
        elapsed = time.perf_counter() - start
        first = (str(e).splitlines() or [""])[0][:120]
        ACCEPTANCE[number] = f"criterion {number:2d}: FAIL  {title} ({elapsed:.2f} s; {type(e).__name__}: {first})"
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < seconds
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE[number] = f"criterion {number:2d}: {verdict}  {title} ({elapsed:.2f} s, limit {seconds} s)"
    print(ACCEPTANCE[number])
    assert ok, f"took {elapsed:.2f} s, limit {seconds} s"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
