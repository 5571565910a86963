"""Letters of the boolean fragment and the two word/stream encodings.

A stream contributes one of seven symbols per position: ``⊥`` (no event),
``T``/``F`` (event), ``<'`` (the stream ends before this position),
``⊥'``/``T'``/``F'`` (the stream ends right after this position).
Unit events are written ``T``.
"""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..errors import LetterNotInAlphabet
from ..streams import INFINITE, EventStream, Exclusive, Inclusive
from ..values import UNIT

BOT, TT, FF = "⊥", "T", "F"
LT_END, BOT_END, TT_END, FF_END = "<'", "⊥'", "T'", "F'"
VAL = (BOT, TT, FF, LT_END, BOT_END, TT_END, FF_END)
PLAIN = (BOT, TT, FF)
ENDINGS = (LT_END, BOT_END, TT_END, FF_END)
UNIT_SYMBOLS = (BOT, TT, LT_END, BOT_END, TT_END)


def symbols_for(type_name: Optional[str]) -> Tuple[str, ...]:
    """The symbols a stream of this type can contribute."""
    return UNIT_SYMBOLS if type_name == "Unit" else VAL


def is_end(v: str) -> bool:
    return v.endswith("'")


def base(v: str) -> str:
    """``⊥``, ``T``, ``F`` or ``<`` with the ending mark removed."""
    return v[0] if v != LT_END else "<"


def prime(v: str) -> str:
    """Ending version of a plain symbol (``<`` gives ``<'``)."""
    return v + "'"


def has_event(v: str) -> bool:
    return base(v) in (TT, FF)


def check_letter(letter: Mapping[str, str], names: Sequence[str]):
    if set(letter) != set(names):
        raise LetterNotInAlphabet(f"letter over {sorted(letter)} but the transducer reads {sorted(names)}")
    for n, v in letter.items():
        if v not in VAL:
            raise LetterNotInAlphabet(f"{v!r} (for {n}) is not one of {', '.join(VAL)}")


# -- value <-> symbol ---------------------------------------------------------------

def symbol_of(value) -> str:
    if value is True or value is UNIT:
        return TT
    if value is False:
        return FF
    raise ValueError(f"only boolean and unit values can be encoded, got {value!r}")


def value_of(symbol: str, type_name: str = "Bool"):
    b = base(symbol)
    if b == TT:
        return UNIT if type_name == "Unit" else True
    if b == FF:
        if type_name == "Unit":
            raise ValueError("unit streams cannot carry F")
        return False
    return None


# -- alpha: DFST words as streams -----------------------------------------------------

def encode_alpha(word: Sequence, sigma: Sequence) -> Dict[object, EventStream]:
    """One boolean stream per symbol; position ``i`` of the word becomes time ``i``.

    A finite word of length n is known exactly up to (excluding) time n.
    """
    n = len(word)
    return {p: EventStream([(i, w == p) for i, w in enumerate(word)], Exclusive(n)) for p in sigma}


def decode_alpha(streams: Mapping[object, EventStream]) -> list:
    if not streams:
        return []
    length = max((len(s.events) for s in streams.values()), default=0)
    word = []
    for i in range(length):
        hits = [p for p, s in streams.items() if s.lookup(i) is True]
        if len(hits) != 1:
            raise ValueError(f"position {i} is not encoded by exactly one symbol stream")
        word.append(hits[0])
    return word


# -- beta: stream tuples as synchronized words ------------------------------------

def beta_times(streams: Mapping[str, EventStream]) -> List:
    times = {0}
    for s in streams.values():
        times.update(s.times)
        if not s.progress.infinite:
            times.add(s.progress.time)
    return sorted(times)


def encode_beta(streams: Mapping[str, EventStream], timestamps: Optional[Sequence] = None) -> Tuple[list, List[dict]]:
    """Synchronized word of ``streams`` over ``timestamps`` (default: their own).

    Positions after a stream has ended carry ``⊥``.
    """
    times = list(timestamps) if timestamps is not None else beta_times(streams)
    word = [dict() for _ in times]
    for name, s in streams.items():
        p = s.progress
        for i, t in enumerate(times):
            v = s.lookup(t)
            sym = symbol_of(v) if v is not None and has_value(v) else BOT
            if p.infinite or t < p.time:
                word[i][name] = sym
            elif t == p.time:
                word[i][name] = prime(sym) if p.inclusive else LT_END
            else:
                word[i][name] = BOT
    return times, word


def has_value(v) -> bool:
    from ..streams import NO_EVENT, UNKNOWN
    return v is not NO_EVENT and v is not UNKNOWN


def decode_beta(times: Sequence, word: Sequence[Mapping[str, str]], types: Optional[Mapping[str, str]] = None) -> Dict[str, EventStream]:
    """Inverse of :func:`encode_beta`; streams without an ending get progress Infinite."""
    names = list(word[0]) if word else list(types or {})
    types = types or {}
    out = {}
    for n in names:
        events, progress = [], INFINITE
        for t, letter in zip(times, word):
            sym = letter[n]
            if sym == LT_END:
                progress = Exclusive(t)
                break
            v = value_of(sym, types.get(n, "Bool"))
            if v is not None:
                events.append((t, v))
            if is_end(sym):
                progress = Inclusive(t)
                break
        out[n] = EventStream(events, progress)
    return out
