"""Evaluation of flat specifications.

Two evaluators live here:

* the denotational operators ``op_*`` working on whole streams, together with
  :func:`kleene_fixpoint`, which iterates them from the everywhere-unknown
  streams. They are slow but follow the stream definitions directly and act as
  the reference for everything else;
* :class:`Monitor`, the incremental timestamp sweep. At every timestamp that may
  carry an event (time 0, input events, pending timeouts) it evaluates the
  equations once in dependency order, reading ``last``/``delay`` state from before
  the timestamp and updating it afterwards.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from collections import deque
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from . import terms
from .depgraph import require_well_formed
from .errors import EventLimitExceeded, NonMonotonicChunk, NonPositiveDelay, NotWellFormed
from .ir import CoreSpec, Delay, Lift, Last, Nil, TimeE, UnitE, Var, flatten
from .streams import (
    INFINITE, NO_EVENT, UNKNOWN, ZERO, EventStream, Exclusive, Inclusive, Progress,
    cut, min_progress,
)
from .values import BOTTOM, UNIT, is_num

# -- denotational operators -------------------------------------------------------


def op_nil() -> EventStream:
    return EventStream((), INFINITE, check=False)


_UNIT_STREAM = EventStream([(Fraction(0), UNIT)], INFINITE)


def op_unit() -> EventStream:
    return _UNIT_STREAM


def op_time(s: EventStream) -> EventStream:
    return EventStream([(t, t) for t, _ in s.events], s.progress, check=False)


def op_lift(f, streams) -> EventStream:
    """Pointwise application at every known timestamp where some input has an event."""
    p = min_progress(s.progress for s in streams)
    times = sorted({t for s in streams for t in s.times if p.contains(t)})
    out = []
    for t in times:
        args = []
        for s in streams:
            v = s.lookup(t)
            args.append(BOTTOM if v is NO_EVENT else v)
        r = terms.evaluate(f, args)
        if r is not BOTTOM:
            out.append((t, r))
    return EventStream(out, p, check=False)


def op_last(values: EventStream, trigger: EventStream) -> EventStream:
    """Latest strictly earlier value of ``values`` at each trigger event."""
    pv = values.progress
    bound = trigger.progress
    out = []
    j = 0  # number of values events strictly before the current trigger
    for tr, _ in trigger.events:
        if not pv.known_before(tr):
            bound = Exclusive(tr)
            break
        while j < len(values.events) and values.events[j][0] < tr:
            j += 1
        if j:
            out.append((tr, values.events[j - 1][1]))
    # before the first value event the output is known to be empty
    if values.events:
        empty_until = Inclusive(values.events[0][0])
    else:
        empty_until = pv.closure()
    return EventStream(out, max(bound, empty_until), check=False)


def check_delay_values(delays: EventStream):
    for t, d in delays.events:
        if not is_num(d) or d <= 0:
            raise NonPositiveDelay(t, d)


def op_delay(delays: EventStream, resets: EventStream) -> EventStream:
    """Unit event ``d`` after each setting point unless a reset comes strictly in between.

    Setting points are reset events and output events; the delay adopted at a
    setting point ``s`` is the value of ``delays`` at ``s`` (no event: no timeout).
    """
    check_delay_values(delays)
    pr = resets.progress
    rtimes = resets.times
    out = []
    pending = None
    i = 0
    while True:
        next_r = rtimes[i] if i < len(rtimes) else None
        if pending is not None and (next_r is None or pending <= next_r):
            if not pr.known_before(pending):
                return EventStream(out, pr.closure(), check=False)
            s = pending
            out.append((s, UNIT))
            if next_r == s:
                i += 1
        elif next_r is not None:
            s = next_r
            i += 1
        else:
            return EventStream(out, pr.closure(), check=False)
        d = delays.lookup(s)
        if d is UNKNOWN:
            return EventStream(out, Inclusive(s), check=False)
        pending = None if d is NO_EVENT else s + d


def apply_equation(e, env: Mapping[str, EventStream]) -> EventStream:
    """Denotation of one flat right-hand side under the variable assignment ``env``."""
    if isinstance(e, Nil):
        return op_nil()
    if isinstance(e, UnitE):
        return _UNIT_STREAM
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Lift):
        return op_lift(e.f, [env[a.name] for a in e.args])
    if isinstance(e, TimeE):
        return op_time(env[e.arg.name])
    if isinstance(e, Last):
        return op_last(env[e.values.name], env[e.trigger.name])
    if isinstance(e, Delay):
        return op_delay(env[e.delays.name], env[e.resets.name])
    raise TypeError(e)


def kleene_fixpoint(spec: CoreSpec, inputs: Mapping[str, EventStream], max_iterations: int = 100_000) -> Dict[str, EventStream]:
    """Least fixed point by plain Kleene iteration from the unknown streams.

    Terminates for delay-free specs over finite inputs; raises ``RuntimeError``
    when ``max_iterations`` is exceeded (e.g. Zeno or unbounded delays).
    """
    if not spec.is_flat():
        spec = flatten(spec)
    env = {n: inputs.get(n, EventStream((), INFINITE)) for n in spec.inputs}
    current = {n: EventStream((), ZERO) for n in spec.equations}
    for _ in range(max_iterations):
        env.update(current)
        nxt = {n: apply_equation(e, env) for n, e in spec.equations.items()}
        if nxt == current:
            return current
        current = nxt
    raise RuntimeError("Kleene iteration did not converge")


def fixed_point_violations(spec: CoreSpec, inputs: Mapping[str, EventStream], streams: Mapping[str, EventStream]) -> list:
    """Apply every equation once more to ``streams``; list the names whose prefix changes.

    The comparison is made at the common progress of ``streams`` because the
    sweep reports uniform progress while single operators may know more.
    """
    if not spec.is_flat():
        spec = flatten(spec)
    env = dict(inputs)
    env.update(streams)
    bad = []
    for name, e in spec.equations.items():
        cur = streams[name]
        again = cut(apply_equation(e, env), cur.progress)
        if again != cur:
            bad.append(name)
    return bad


# -- incremental sweep ----------------------------------------------------------------


@dataclass
class Limits:
    max_events: Optional[int] = 1_000_000   # events on declared outputs
    # sweep steps at timestamps produced only by delay timeouts; guards Zeno
    # behaviour on streams that are not outputs
    max_generated: Optional[int] = 1_000_000


class Monitor:
    """Incremental evaluator with O(1) state per operator.

    Feed input deltas with :meth:`advance`; it returns the output events that
    became definite. ``counter`` counts equation evaluations.
    """

    def __init__(self, spec: CoreSpec, limits: Optional[Limits] = None, record=None):
        if not spec.is_flat():
            spec = flatten(spec)
        self.spec = spec
        self.order = require_well_formed(spec)
        self.limits = limits or Limits()
        if record == "all":
            record = list(spec.equations)
        self.record = list(spec.outputs if record is None else record)
        self._outputs_set = set(spec.outputs)
        self.input_progress = {n: ZERO for n in spec.inputs}
        self._pending_inputs = {n: deque() for n in spec.inputs}   # unprocessed events, sorted
        self._last = {n: BOTTOM for n, e in spec.equations.items() if isinstance(e, Last)}
        self._pending = {n: None for n, e in spec.equations.items() if isinstance(e, Delay)}
        self._timeouts = []  # heap of (time, delay node)
        self._started = False
        self._last_step = None
        self.events = {n: [] for n in self.record}
        self.progress = ZERO
        self.counter = 0
        self.steps = 0
        self.generated = 0
        self.emitted = 0
        self.halted: Optional[EventLimitExceeded] = None
        self._compiled = [(n, spec.equations[n]) for n in self.order]
        self._delay_nodes = [(n, e) for n, e in spec.equations.items() if isinstance(e, Delay)]
        self._last_nodes = [(n, e.values.name) for n, e in spec.equations.items() if isinstance(e, Last)]

    # -- input handling
    def _input_bound(self) -> Progress:
        return min_progress(self.input_progress.values())

    def _accept(self, name: str, chunk: EventStream):
        if name not in self.input_progress:
            raise KeyError(f"unknown input stream {name!r}")
        old = self.input_progress[name]
        if chunk.progress < old:
            raise NonMonotonicChunk(f"progress of {name} would go back from {old} to {chunk.progress}")
        for t, v in chunk.events:
            if old.contains(t):
                raise NonMonotonicChunk(f"event of {name} at {t} lies inside the already consumed prefix {old}")
        self._pending_inputs[name].extend(chunk.events)
        self.input_progress[name] = chunk.progress

    def advance(self, chunks: Mapping[str, EventStream]) -> Dict[str, list]:
        """Consume input deltas and return newly definite output events per stream."""
        if self.halted is not None:
            raise self.halted
        for name, chunk in chunks.items():
            self._accept(name, chunk)
        marks = {n: len(evs) for n, evs in self.events.items()}
        self._sweep()
        return {n: evs[marks[n]:] for n, evs in self.events.items()}

    def finish(self) -> Dict[str, list]:
        """Declare every input complete (progress Infinite if not already finite-final)."""
        return self.advance({n: EventStream((), INFINITE) for n in self.spec.inputs if not self.input_progress[n].infinite})

    def streams(self) -> Dict[str, EventStream]:
        return {n: EventStream(self.events[n], self.progress, check=False) for n in self.record}

    # -- the sweep
    def _next_candidate(self):
        cands = []
        if not self._started:
            cands.append(Fraction(0))
        for evs in self._pending_inputs.values():
            if evs:
                cands.append(evs[0][0])
        while self._timeouts and self._pending[self._timeouts[0][1]] != self._timeouts[0][0]:
            heapq.heappop(self._timeouts)
        if self._timeouts:
            cands.append(self._timeouts[0][0])
        return min(cands) if cands else None

    def _sweep(self):
        bound = self._input_bound()
        lim = self.limits
        while True:
            t = self._next_candidate()
            if t is None or not bound.contains(t):
                break
            # stop once the bound is reached and more work would follow
            if lim.max_events is not None and self.emitted >= lim.max_events:
                self._halt(bound, lim.max_events)
            if lim.max_generated is not None and self.generated >= lim.max_generated:
                self._halt(bound, lim.max_generated)
            self._step(t)
            self._last_step = t
        self.progress = bound

    def _halt(self, bound, limit):
        reached = min(bound, Inclusive(self._last_step)) if self._last_step is not None else ZERO
        self.progress = max(self.progress, reached)
        self.halted = EventLimitExceeded(limit, self.progress, self.streams())
        raise self.halted

    def _step(self, t):
        self._started = True
        self.steps += 1
        vals = {}
        for name, evs in self._pending_inputs.items():
            if evs and evs[0][0] == t:
                vals[name] = evs.popleft()[1]
        if not vals and t != 0:
            self.generated += 1
        for name, e in self._compiled:
            self.counter += 1
            if isinstance(e, Lift):
                args = [vals.get(a.name, BOTTOM) for a in e.args]
                if any(a is not BOTTOM for a in args):
                    r = terms.evaluate(e.f, args)
                    if r is not BOTTOM:
                        vals[name] = r
            elif isinstance(e, Var):
                if e.name in vals:
                    vals[name] = vals[e.name]
            elif isinstance(e, Last):
                if e.trigger.name in vals and self._last[name] is not BOTTOM:
                    vals[name] = self._last[name]
            elif isinstance(e, TimeE):
                if e.arg.name in vals:
                    vals[name] = t
            elif isinstance(e, Delay):
                if self._pending[name] == t:
                    vals[name] = UNIT
            elif isinstance(e, UnitE):
                if t == 0:
                    vals[name] = UNIT
            # Nil never has events
        for name, src in self._last_nodes:
            if src in vals:
                self._last[name] = vals[src]
        for name, e in self._delay_nodes:
            d = vals.get(e.delays.name, BOTTOM)
            if d is not BOTTOM and (not is_num(d) or d <= 0):
                raise NonPositiveDelay(t, d)
            if name in vals or e.resets.name in vals:
                if d is BOTTOM:
                    self._pending[name] = None
                else:
                    self._pending[name] = t + d
                    heapq.heappush(self._timeouts, (t + d, name))
        for name in self.record:
            if name in vals:
                self.events[name].append((t, vals[name]))
                if name in self._outputs_set:
                    self.emitted += 1


def advance(state: Monitor, new_inputs: Mapping[str, EventStream]):
    """Functional-style wrapper: ``(state, new output events)``."""
    out = state.advance(new_inputs)
    return state, out


def evaluate(spec: CoreSpec, inputs: Mapping[str, EventStream], limits: Optional[Limits] = None,
             record=None, exact_progress: bool = False) -> Dict[str, EventStream]:
    """Evaluate ``spec`` on complete (or partial) input streams.

    ``record`` selects the streams to return (default: the declared outputs).
    Missing inputs are treated as empty streams known up to the common progress
    of the given ones. With ``exact_progress`` (delay-free specs only) each
    returned stream carries its own exact progress, as computed by
    :func:`kleene_fixpoint`, instead of the uniform sweep progress.
    """
    if not spec.is_flat():
        spec = flatten(spec)
    given = {n: s for n, s in inputs.items() if n in spec.inputs}
    default = min_progress(s.progress for s in given.values())
    full = {n: given.get(n, EventStream((), default)) for n in spec.inputs}
    if exact_progress:
        if any(isinstance(e, Delay) for e in spec.equations.values()):
            raise ValueError("exact progress is only available for delay-free specifications")
        require_well_formed(spec)
        fp = kleene_fixpoint(spec, full)
        env = dict(full)
        env.update(fp)
        names = spec.outputs if record is None else (list(spec.equations) if record == "all" else record)
        return {n: env[n] for n in names}
    mon = Monitor(spec, limits, record)
    mon.advance(full)
    return mon.streams()


__all__ = [
    "op_nil", "op_unit", "op_time", "op_lift", "op_last", "op_delay", "apply_equation",
    "kleene_fixpoint", "fixed_point_violations", "Limits", "Monitor", "advance", "evaluate",
    "NotWellFormed",
]
