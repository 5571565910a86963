import random
from fractions import Fraction

import pytest

from conftest import golden_inputs, golden_spec, random_inputs, random_spec
from streammon import ir, terms
from streammon.engine import (Limits, Monitor, evaluate, fixed_point_violations, kleene_fixpoint, op_delay, op_last,
                              op_lift, op_time)
from streammon.errors import EventLimitExceeded, NonMonotonicChunk, NonPositiveDelay
from streammon.frontend import compile_spec
from streammon.streams import INFINITE, ZERO, EventStream, Exclusive, Inclusive, cut, make_stream
from streammon.values import BOTTOM, UNIT

F = Fraction
V = ir.V


def S(events, progress=INFINITE):
    return make_stream([(F(t), v) for t, v in events], progress)


def U(*times, progress=INFINITE):
    return S([(t, UNIT) for t in times], progress)


# -- operators ---------------------------------------------------------------------------

def test_lift_is_pointwise_over_the_union_of_timestamps():
    a, b = S([(1, F(1)), (3, F(2))]), S([(1, F(10)), (2, F(20))])
    out = op_lift(terms.binop_term("+"), [a, b])
    assert out.events == ((1, 11),)
    assert op_lift(terms.MERGE, [a, b]).events == ((1, 1), (2, 20), (3, 2))


def test_lift_progress_is_the_minimum():
    a, b = S([(1, F(1))], Inclusive(2)), S([], Exclusive(5))
    assert op_lift(terms.MERGE, [a, b]).progress == Inclusive(2)


def test_last_uses_strictly_earlier_values():
    values = S([(1, F(1)), (3, F(3))])
    trigger = U(1, 2, 3, 4)
    assert op_last(values, trigger).events == ((2, 1), (3, 1), (4, 3))


def test_last_stops_where_values_are_unknown():
    out = op_last(S([(1, F(1))], Inclusive(2)), U(2, 3, 4))
    assert out.events == ((2, 1),) and out.progress == Exclusive(3)


def test_time_keeps_timestamps():
    assert op_time(U(2, 5)).events == ((2, 2), (5, 5))


def test_delay_fires_after_the_delay_unless_reset():
    # reset at 5 restarts the timer; the timeout at 10 has no delay value, so the chain ends
    out = op_delay(S([(2, F(5)), (5, F(5))]), U(2, 5))
    assert out.events == ((10, UNIT),)


def test_delay_timeout_is_cancelled_by_a_reset_in_between():
    delays = S([(0, F(3)), (2, F(3))])
    out = op_delay(delays, U(0, 2))
    # reset at 2 cancels the timeout at 3; the new timeout is 5, after which no delay value exists
    assert out.events == ((5, UNIT),)


def test_delay_rejects_non_positive_values():
    with pytest.raises(NonPositiveDelay):
        op_delay(S([(1, F(0))]), U(1))
    with pytest.raises(NonPositiveDelay):
        evaluate(compile_spec("in x: Events[Num]\ndef d := delay(x, x)\nout d"), {"x": S([(1, F(-1))])})


# -- the figures ------------------------------------------------------------------------

def test_diff_and_error():
    out = evaluate(golden_spec("diff"), golden_inputs("diff"))
    assert out["diff"].events == ((5, 3), (7, 2), (15, 8), (18, 3))
    assert out["error"].events == ((15, 3),)


def test_delay_example():
    out = evaluate(golden_spec("delay"), golden_inputs("delay"))
    assert out["error"].events == ((12, UNIT),)


def test_period_with_limit():
    with pytest.raises(EventLimitExceeded) as e:
        evaluate(golden_spec("period"), {}, Limits(max_events=4))
    assert e.value.outputs["period"].events == ((0, 5), (5, 5), (10, 5), (15, 5))
    assert e.value.progress == Inclusive(15)


def test_period_incrementally_with_a_clock_input():
    spec = compile_spec("in clock: Events[Unit]\ndef period := merge(const(5)(delay(period, unit)), 5)\nout period")
    mon = Monitor(spec)
    assert mon.advance({"clock": U(progress=Inclusive(12))}) == {"period": [(0, 5), (5, 5), (10, 5)]}
    assert mon.advance({"clock": U(progress=Exclusive(15))}) == {"period": []}
    assert mon.advance({"clock": U(progress=Inclusive(15))}) == {"period": [(15, 5)]}


def test_max_generated_guards_timeout_only_steps():
    spec = compile_spec("def period := merge(const(5)(delay(period, unit)), 5)")
    # period is a declared output here, so max_events also bounds it; use max_generated alone
    with pytest.raises(EventLimitExceeded) as e:
        evaluate(spec, {}, Limits(max_events=None, max_generated=3))
    assert e.value.limit == 3 and len(e.value.outputs["period"].events) == 4


def test_monitor_refuses_to_continue_after_halting():
    mon = Monitor(golden_spec("period"), Limits(max_events=2))
    with pytest.raises(EventLimitExceeded):
        mon.advance({})
    with pytest.raises(EventLimitExceeded):
        mon.advance({})


# -- incremental interface ---------------------------------------------------------------

def test_chunks_must_be_monotone():
    spec = compile_spec("in x: Events[Num]\ndef y := x + 1\nout y")
    mon = Monitor(spec)
    mon.advance({"x": S([(1, F(1))], Inclusive(2))})
    with pytest.raises(NonMonotonicChunk):
        mon.advance({"x": S([], Inclusive(1))})
    with pytest.raises(NonMonotonicChunk):
        mon.advance({"x": S([(2, F(1))], Inclusive(3))})
    with pytest.raises(KeyError):
        mon.advance({"nope": S([], INFINITE)})


def test_output_is_emitted_as_soon_as_it_is_definite():
    mon = Monitor(golden_spec("temperature"))
    first = mon.advance({"temperature": S([(1, F(6))], Inclusive(1))})
    assert first == {"low": [(1, False)], "high": [(1, False)], "unsafe": [(1, False)]}
    assert mon.progress == Inclusive(1)


def test_finish_completes_the_inputs():
    mon = Monitor(golden_spec("diff"))
    mon.advance({"write": U(2, 5, progress=Inclusive(5))})
    mon.finish()
    assert mon.progress == INFINITE


def test_record_all_returns_helper_streams():
    out = evaluate(golden_spec("diff"), golden_inputs("diff"), record="all")
    assert set(golden_spec("diff").equations) <= set(out)


def test_missing_inputs_default_to_empty():
    spec = compile_spec("in x: Events[Num]\nin y: Events[Num]\ndef z := merge(x, y)\nout z")
    out = evaluate(spec, {"x": S([(1, F(1))], Inclusive(3))})
    assert out["z"].events == ((1, 1),) and out["z"].progress == Inclusive(3)


def test_unknown_values_are_bottom_in_lift():
    assert op_lift(terms.binop_term("+"), [S([(1, BOTTOM)]), S([(1, F(1))])]).events == ()


# -- fixed points ------------------------------------------------------------------------

def test_kleene_fixpoint_agrees_with_sweep_on_random_specs():
    rng = random.Random(3)
    for _ in range(100):
        spec = random_spec(rng)
        inputs = random_inputs(rng, spec)
        fp = kleene_fixpoint(spec, inputs)
        swept = evaluate(spec, inputs, record="all")
        p = swept[spec.outputs[0]].progress
        for n in spec.equations:
            assert cut(fp[n], p).events == swept[n].events
        assert fixed_point_violations(spec, inputs, {**inputs, **fp}) == []


def test_fixed_point_violations_detects_a_wrong_assignment():
    spec = compile_spec("in x: Events[Num]\ndef y := x + 1\nout y")
    inputs = {"x": S([(1, F(1))])}
    good = evaluate(spec, inputs, record="all")
    assert fixed_point_violations(spec, inputs, good) == []
    bad = dict(good, y=S([(1, F(5))], good["y"].progress))
    assert fixed_point_violations(spec, inputs, bad) == ["y"]


def test_counter_counts_equation_evaluations():
    spec = compile_spec("in x: Events[Unit]\ndef c := merge(last(c, x) + 1, 0)\nout c")
    mon = Monitor(spec)
    mon.advance({"x": U(*range(1, 11))})
    assert mon.steps == 11 and 0 < mon.counter <= 11 * len(mon.spec.equations)
    assert mon.events["c"][-1] == (10, 10)


def test_zero_progress_outputs_nothing():
    mon = Monitor(golden_spec("diff"))
    assert mon.advance({}) == {"diff": [], "error": []}
    assert mon.progress == ZERO


def test_nested_specs_are_flattened_on_entry():
    spec = ir.spec({"x": "Num"}, {"y": ir.lift(terms.NOT, ir.lift(terms.binop_term("<"), V("x"), V("x")))}, ["y"])
    assert evaluate(spec, {"x": S([(1, F(1))])})["y"].events == ((1, True),)


def test_event_stream_equality_of_results():
    assert evaluate(golden_spec("diff"), golden_inputs("diff"))["error"] == EventStream([(F(15), F(3))], Inclusive(20))
