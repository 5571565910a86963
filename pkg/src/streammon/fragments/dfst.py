"""Deterministic finite state transducers over named letters.

Letters are plain dicts from names to the seven symbols of
:mod:`.encoding`. A transducer is given by its transition function, so
state spaces are explored lazily and only as far as they are reachable.
"""

from __future__ import annotations

import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..errors import AlphabetMismatch, NoConsistentAssignment, OutputNameClash
from .encoding import VAL, check_letter

log = logging.getLogger(__name__)

Letter = Dict[str, str]
Step = Optional[Tuple[object, Letter]]
REJECT = "reject"


def _key(letter: Mapping[str, str], names: Sequence[str]) -> tuple:
    return tuple(letter[n] for n in names)


class Dfst:
    """``delta(state, letter)`` returns ``(next_state, output_letter)`` or None (reject)."""

    def __init__(self, inputs: Iterable[str], outputs: Iterable[str], initial, delta: Callable[[object, Letter], Step],
                 name: str = "", symbols: Optional[Mapping[str, Sequence[str]]] = None):
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        symbols = symbols or {}
        # the symbols each input may carry (Unit streams never carry F)
        self.symbols = {n: tuple(symbols.get(n, VAL)) for n in self.inputs}
        self.initial = initial
        self._delta = delta
        self.name = name
        self._cache: dict = {}

    def step(self, state, letter: Mapping[str, str]) -> Step:
        key = (state, _key(letter, self.inputs))
        if key not in self._cache:
            self._cache[key] = self._delta(state, {n: letter[n] for n in self.inputs})
        return self._cache[key]

    def letters(self) -> Iterable[Letter]:
        """Every input letter, inputs in name order."""
        names = sorted(self.inputs)
        for combo in itertools.product(*(self.symbols[n] for n in names)):
            yield dict(zip(names, combo))

    def __repr__(self):
        return f"Dfst({self.name or '?'}: {list(self.inputs)} -> {list(self.outputs)})"


class Composition(Dfst):
    """Parallel composition: product states, shared input names read the same symbol."""

    def __init__(self, components: Sequence[Dfst]):
        outs: List[str] = []
        for c in components:
            clash = set(outs) & set(c.outputs)
            if clash:
                raise OutputNameClash(f"outputs {sorted(clash)} produced twice")
            outs.extend(c.outputs)
        ins: List[str] = []
        for c in components:
            ins.extend(n for n in c.inputs if n not in ins)
        symbols: Dict[str, Sequence[str]] = {}
        for c in components:
            for n, syms in c.symbols.items():
                symbols[n] = [x for x in symbols[n] if x in syms] if n in symbols else syms
        self.components = tuple(components)
        super().__init__(ins, outs, tuple(c.initial for c in components), self._product,
                         name=" || ".join(c.name for c in components), symbols=symbols)

    def _product(self, state, letter):
        nxt, out = [], {}
        for c, s in zip(self.components, state):
            r = c.step(s, letter)
            if r is None:
                return None
            nxt.append(r[0])
            out.update(r[1])
        return tuple(nxt), out


def compose_parallel(r1: Dfst, r2: Dfst) -> Composition:
    parts = []
    for r in (r1, r2):
        parts.extend(r.components if isinstance(r, Composition) else (r,))
    return Composition(parts)


class Closure(Dfst):
    """Feeds outputs back into inputs of the same name.

    Components run in an order where as many fed-back names as possible are
    already produced; the remaining ones are guessed and the guess must match
    the symbol that is then produced. Exactly one consistent guess must exist.
    """

    def __init__(self, r: Dfst):
        self.inner = r
        comps = r.components if isinstance(r, Composition) else (r,)
        feedback = set(r.inputs) & set(r.outputs)
        order, produced, guessed = [], set(), []
        remaining = list(range(len(comps)))
        while remaining:
            # fewest not-yet-produced feedback inputs first, declaration order on ties
            best = min(remaining, key=lambda i: (sum(1 for n in comps[i].inputs
                                                     if n in feedback and n not in produced), i))
            remaining.remove(best)
            for n in comps[best].inputs:
                if n in feedback and n not in produced and n not in guessed:
                    guessed.append(n)
            produced.update(comps[best].outputs)
            order.append(best)
        self.comps, self.order, self.guessed = comps, order, tuple(guessed)
        ins = [n for n in r.inputs if n not in feedback]
        init = r.initial if isinstance(r, Composition) else (r.initial,)
        super().__init__(ins, r.outputs, init, self._solve, name=f"closure({r.name})", symbols=r.symbols)

    def _solve(self, state, letter):
        solutions = []
        for combo in itertools.product(VAL, repeat=len(self.guessed)):
            env = dict(letter)
            env.update(zip(self.guessed, combo))
            nxt = list(state)
            ok = True
            for i in self.order:
                r = self.comps[i].step(state[i], env)
                if r is None:
                    ok = False
                    break
                nxt[i] = r[0]
                for k, v in r[1].items():
                    if k in self.guessed and env[k] != v:
                        ok = False
                        break
                    env[k] = v
                if not ok:
                    break
            if ok:
                solutions.append((tuple(nxt), {n: env[n] for n in self.outputs}))
        if len(solutions) != 1:
            detail = "" if not solutions else f" ({len(solutions)} assignments fit: feedback is not determined)"
            raise NoConsistentAssignment(state, letter, detail)
        return solutions[0]


def closure(r: Dfst) -> Dfst:
    if not set(r.inputs) & set(r.outputs):
        return r
    return Closure(r)


def restrict(r: Dfst, inputs: Sequence[str], outputs: Sequence[str],
             symbols: Optional[Mapping[str, Sequence[str]]] = None) -> Dfst:
    """Read letters over ``inputs`` (a superset of ``r.inputs``) and keep only ``outputs``.

    An output that is one of the inputs is copied through. ``symbols`` narrows
    the symbols of inputs; by default those of ``r`` are kept.
    """
    missing = set(r.inputs) - set(inputs)
    if missing:
        raise AlphabetMismatch(f"inputs {sorted(missing)} are not provided")

    def delta(state, letter):
        res = r.step(state, letter)
        if res is None:
            return None
        s, out = res
        return s, {n: (out[n] if n in out else letter[n]) for n in outputs}

    syms = {n: r.symbols.get(n, VAL) for n in inputs}
    syms.update(symbols or {})
    return Dfst(inputs, outputs, r.initial, delta, name=r.name, symbols=syms)


# -- running ---------------------------------------------------------------------------

def run_dfst(r: Dfst, word: Sequence[Mapping[str, str]], on_reject: str = "stop") -> List[Letter]:
    """Output word for ``word``. At a rejected letter the run stops (or raises)."""
    state, out = r.initial, []
    for i, letter in enumerate(word):
        check_letter(letter, r.inputs)
        try:
            res = r.step(state, letter)
        except NoConsistentAssignment:
            if on_reject == "raise":
                raise
            res = None
        if res is None:
            if on_reject == "raise":
                raise NoConsistentAssignment(state, dict(letter), f" (rejected at position {i})")
            log.warning("transducer %s rejects letter %d (%s) in state %r", r.name, i, dict(letter), state)
            break
        state, o = res
        out.append(o)
    return out


def all_letters(names: Sequence[str], symbols: Sequence[str] = VAL) -> Iterable[Letter]:
    for combo in itertools.product(symbols, repeat=len(names)):
        yield dict(zip(names, combo))


def _outcome(r: Dfst, state, letter):
    try:
        res = r.step(state, letter)
    except NoConsistentAssignment:
        res = None
    if res is None:
        return None, REJECT
    return res[0], tuple(sorted(res[1].items()))


@dataclass
class Equivalence:
    equivalent: bool
    counterexample: Optional[List[Letter]] = None
    outputs: Optional[tuple] = None      # the two differing output letters on the last position
    explored: int = 0

    def __bool__(self):
        return self.equivalent


def _check_alphabets(r1: Dfst, r2: Dfst):
    if set(r1.inputs) != set(r2.inputs) or set(r1.outputs) != set(r2.outputs):
        raise AlphabetMismatch(f"{sorted(r1.inputs)}->{sorted(r1.outputs)} vs {sorted(r2.inputs)}->{sorted(r2.outputs)}")
    for n in r1.inputs:
        if set(r1.symbols[n]) != set(r2.symbols[n]):
            raise AlphabetMismatch(f"input {n} carries {r1.symbols[n]} in one transducer and {r2.symbols[n]} in the other")


def dfst_equivalent(r1: Dfst, r2: Dfst, alphabet: Optional[Sequence[Letter]] = None) -> Equivalence:
    """Breadth-first search over pairs of reachable states.

    The first differing pair found gives a shortest distinguishing word.
    ``alphabet`` limits the letters tried (default: every letter the inputs can carry).
    """
    _check_alphabets(r1, r2)
    letters = list(alphabet) if alphabet is not None else list(r1.letters())
    start = (r1.initial, r2.initial)
    parent = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        for letter in letters:
            n1, o1 = _outcome(r1, pair[0], letter)
            n2, o2 = _outcome(r2, pair[1], letter)
            if o1 != o2:
                word = [letter]
                p = pair
                while parent[p] is not None:
                    p, l = parent[p]
                    word.append(l)
                return Equivalence(False, word[::-1], (o1, o2), len(parent))
            if o1 == REJECT:
                continue
            nxt = (n1, n2)
            if nxt not in parent:
                parent[nxt] = (pair, letter)
                queue.append(nxt)
    return Equivalence(True, None, None, len(parent))


def brute_force_counterexample(r1: Dfst, r2: Dfst, max_length: int,
                               alphabet: Optional[Sequence[Letter]] = None) -> Optional[List[Letter]]:
    """Shortest word up to ``max_length`` on which the output words differ, by plain enumeration.

    Every word is extended letter by letter (no merging of equal state pairs),
    so the work grows as ``len(alphabet) ** max_length``.
    """
    _check_alphabets(r1, r2)
    alphabet = list(alphabet) if alphabet is not None else list(r1.letters())
    frontier = [(r1.initial, r2.initial, ())]
    for _ in range(max_length):
        nxt = []
        for s1, s2, word in frontier:
            for letter in alphabet:
                n1, o1 = _outcome(r1, s1, letter)
                n2, o2 = _outcome(r2, s2, letter)
                if o1 != o2:
                    return list(word) + [letter]
                if o1 != REJECT:
                    nxt.append((n1, n2, word + (letter,)))
        frontier = nxt
    return None


# -- materialisation ----------------------------------------------------------------

def explore(r: Dfst, alphabet: Optional[Sequence[Letter]] = None, max_states: int = 10_000):
    """Reachable states and transitions as ``(states, transitions)``."""
    alphabet = list(alphabet) if alphabet is not None else list(r.letters())
    index = {r.initial: 0}
    states = [r.initial]
    transitions = []
    queue = deque([r.initial])
    while queue:
        s = queue.popleft()
        for letter in alphabet:
            n, o = _outcome(r, s, letter)
            if o == REJECT:
                transitions.append((index[s], dict(letter), None, None))
                continue
            if n not in index:
                if len(states) >= max_states:
                    raise ValueError(f"more than {max_states} reachable states")
                index[n] = len(states)
                states.append(n)
                queue.append(n)
            transitions.append((index[s], dict(letter), index[n], dict(o)))
    return states, transitions


def _state_label(s) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(_state_label(x) for x in s) + ")"
    return str(s)


def dump_dfst(r: Dfst, alphabet: Optional[Sequence[Letter]] = None, max_states: int = 10_000) -> str:
    """Stable JSON document: inputs, outputs, numbered states, initial state, transitions."""
    states, transitions = explore(r, alphabet, max_states)
    doc = {
        "inputs": sorted(r.inputs),
        "outputs": list(r.outputs),
        "states": [{"id": i, "label": _state_label(s)} for i, s in enumerate(states)],
        "initial": 0,
        "transitions": [
            {"from": a, "letter": l, "to": b, "output": o} if b is not None else {"from": a, "letter": l, "reject": True}
            for a, l, b, o in transitions
        ],
    }
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"
