import json
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import agreement_failures, bool_spec, bool_specs, bool_stream
from streammon import terms
from streammon.errors import AlphabetMismatch, LetterNotInAlphabet, NoConsistentAssignment, NotBoolFragment
from streammon.fragments import (UNIT_SYMBOLS, VAL, Dfst, brute_force_counterexample, closure,
                                 compose_parallel, conformance_markdown, decode_alpha, decode_beta, dfst_equivalent,
                                 dump_dfst, encode_alpha, encode_beta, is_bool_fragment, last_dfst, lift_dfst,
                                 nil_dfst, restrict, run_dfst, to_dfst, unit_dfst)
from streammon.frontend import compile_spec
from streammon.streams import EventStream, Exclusive, Inclusive
from streammon.values import UNIT

DOCS = Path(__file__).parent.parent / "docs"


# -- encodings -------------------------------------------------------------------------------

def test_alpha_round_trip():
    word = ["p", "q", "q", "p"]
    streams = encode_alpha(word, ["p", "q"])
    assert streams["q"].events == ((0, False), (1, True), (2, True), (3, False))
    assert streams["p"].progress == Exclusive(4)
    assert decode_alpha(streams) == word


def test_alpha_of_the_empty_word():
    assert encode_alpha([], ["p"])["p"] == EventStream([], Exclusive(0))


def test_beta_example():
    s = {"a": EventStream([(1, True), (3, False)], Inclusive(3)), "b": EventStream([(2, UNIT)], Exclusive(3))}
    times, word = encode_beta(s)
    assert times == [0, 1, 2, 3]
    assert [w["a"] for w in word] == ["⊥", "T", "⊥", "F'"]
    assert [w["b"] for w in word] == ["⊥", "⊥", "T", "<'"]
    assert decode_beta(times, word, {"a": "Bool", "b": "Unit"}) == s


@given(st.integers(0, 10 ** 6))
def test_beta_round_trip(seed):
    rng = random.Random(seed)
    s = {"a": bool_stream(rng, "Bool"), "u": bool_stream(rng, "Unit")}
    times, word = encode_beta(s)
    assert decode_beta(times, word, {"a": "Bool", "u": "Unit"}) == s


# -- single machines ---------------------------------------------------------------------

def test_unit_and_nil_machines():
    assert [o["z"] for o in run_dfst(unit_dfst("z"), [{}] * 3)] == ["T", "⊥", "⊥"]
    assert [o["z"] for o in run_dfst(nil_dfst("z"), [{}] * 2)] == ["⊥", "⊥"]


def test_lift_machine_ends_with_the_first_ending_input():
    r = lift_dfst("z", terms.binop_term("&&"), ["a", "b"], ["Bool", "Bool"])
    word = [{"a": "T", "b": "T"}, {"a": "T", "b": "<'"}, {"a": "T", "b": "⊥"}]
    assert [o["z"] for o in run_dfst(r, word)] == ["T", "<'", "⊥"]


def test_last_machine_on_a_short_word():
    r = last_dfst("z", "a", "b")
    word = [{"a": "T", "b": "⊥"}, {"a": "F", "b": "T"}, {"a": "⊥", "b": "T"}]
    assert [o["z"] for o in run_dfst(r, word)] == ["⊥", "T", "F"]


def test_letters_must_be_in_the_alphabet():
    with pytest.raises(LetterNotInAlphabet):
        run_dfst(unit_dfst("z"), [{"x": "T"}])
    with pytest.raises(LetterNotInAlphabet):
        run_dfst(lift_dfst("z", terms.NOT, ["a"], ["Bool"]), [{"a": "maybe"}])


# -- composition and closure ----------------------------------------------------------------

def test_parallel_composition_of_unit_and_nil():
    r = compose_parallel(unit_dfst("u"), nil_dfst("n"))
    assert run_dfst(r, [{}, {}]) == [{"u": "T", "n": "⊥"}, {"u": "⊥", "n": "⊥"}]


def test_closure_without_a_consistent_assignment():
    r = closure(lift_dfst("a", terms.NOT, ["a"], ["Bool"]))
    with pytest.raises(NoConsistentAssignment):
        run_dfst(r, [{}], on_reject="raise")


def test_closure_with_too_many_assignments():
    r = closure(lift_dfst("a", terms.IDENTITY, ["a"], ["Bool"]))
    with pytest.raises(NoConsistentAssignment) as e:
        run_dfst(r, [{}], on_reject="raise")
    assert "not determined" in str(e.value)


def test_restrict_copies_inputs_and_narrows_symbols():
    r = restrict(unit_dfst("z"), ["x"], ["z", "x"], {"x": UNIT_SYMBOLS})
    assert run_dfst(r, [{"x": "⊥"}]) == [{"z": "T", "x": "⊥"}]
    assert len(list(r.letters())) == len(UNIT_SYMBOLS)


def test_unit_inputs_carry_no_false():
    r = to_dfst(bool_spec("filter"))
    assert set(r.symbols["x"]) == set(UNIT_SYMBOLS) and set(r.symbols["c"]) == set(VAL)


def test_outside_the_fragment():
    spec = compile_spec("in x: Events[Num]\ndef y := x + 1\nout y")
    assert not is_bool_fragment(spec)
    with pytest.raises(NotBoolFragment):
        to_dfst(spec)
    assert all(is_bool_fragment(bool_spec(n)) for n in bool_specs())


# -- agreement with the engine -------------------------------------------------------------

@pytest.mark.parametrize("name", bool_specs())
def test_transducer_agrees_with_engine(name):
    assert agreement_failures(bool_spec(name), random.Random(name), 60) == []


# -- equivalence --------------------------------------------------------------------------

def test_de_morgan_pair_is_equivalent():
    assert dfst_equivalent(to_dfst(bool_spec("and")), to_dfst(bool_spec("demorgan")))
    assert dfst_equivalent(to_dfst(bool_spec("xor")), to_dfst(bool_spec("xor2")))


def test_negation_pair_has_a_length_one_counterexample():
    res = dfst_equivalent(to_dfst(bool_spec("negation")), to_dfst(bool_spec("identity")))
    assert not res and len(res.counterexample) == 1
    assert res.outputs[0] != res.outputs[1]


def test_equivalence_needs_matching_alphabets():
    with pytest.raises(AlphabetMismatch):
        dfst_equivalent(to_dfst(bool_spec("and")), to_dfst(bool_spec("filter")))
    with pytest.raises(AlphabetMismatch):
        dfst_equivalent(to_dfst(bool_spec("merge")), to_dfst(bool_spec("later")))


def test_breadth_first_counterexample_is_shortest():
    restricted = [{"a": a, "b": b} for a in ("⊥", "T", "F") for b in ("⊥", "T", "F")]
    pairs = [("and", "pointwise_and"), ("merge", "and"), ("negation", "identity"), ("and", "demorgan")]
    for x, y in pairs:
        r1, r2 = to_dfst(bool_spec(x)), to_dfst(bool_spec(y))
        res = dfst_equivalent(r1, r2, restricted)
        brute = brute_force_counterexample(r1, r2, 4, restricted)
        assert bool(res) == (brute is None)
        if brute is not None:
            assert len(res.counterexample) == len(brute)


# -- materialisation ----------------------------------------------------------------------

def test_dump_is_valid_json_with_all_transitions():
    r = to_dfst(bool_spec("toggle"))
    doc = json.loads(dump_dfst(r))
    assert doc["inputs"] == ["x"] and doc["outputs"] == ["t"] and doc["initial"] == 0
    assert len(doc["transitions"]) == len(doc["states"]) * len(UNIT_SYMBOLS)


def test_conformance_document_is_current():
    assert (DOCS / "dfst_conformance.md").read_text(encoding="utf-8") == conformance_markdown()


def test_custom_dfst_rejects():
    r = Dfst(["a"], ["z"], 0, lambda s, h: None if h["a"] == "F" else (s, {"z": h["a"]}))
    assert run_dfst(r, [{"a": "T"}, {"a": "F"}, {"a": "T"}]) == [{"z": "T"}]
