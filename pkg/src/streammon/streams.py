"""Timed event streams with an explicit progress marker."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Optional, Sequence

from .errors import EventBeyondProgress, NonMonotonicTimestamps
from .values import Time, format_number, same_value, to_time

EXCLUSIVE, INCLUSIVE, INFINITE_KIND = 0, 1, 2


@total_ordering
@dataclass(frozen=True)
class Progress:
    """How far a stream is known.

    ``Exclusive(t)`` knows ``[0, t)``, ``Inclusive(t)`` knows ``[0, t]`` and
    ``INFINITE`` knows everything. Ordered Exclusive(t) < Inclusive(t) < Exclusive(t') for t < t'.
    """

    kind: int
    time: Optional[Time] = None

    def _key(self):
        if self.kind == INFINITE_KIND:
            return (1, 0, 0)
        return (0, self.time, self.kind)

    def __lt__(self, other: "Progress"):
        return self._key() < other._key()

    @property
    def infinite(self) -> bool:
        return self.kind == INFINITE_KIND

    @property
    def inclusive(self) -> bool:
        return self.kind == INCLUSIVE

    def contains(self, t: Time) -> bool:
        """Is the stream known at ``t``?"""
        if self.kind == INFINITE_KIND:
            return True
        return t < self.time or (self.kind == INCLUSIVE and t == self.time)

    def known_before(self, t: Time) -> bool:
        """Is the stream known on the whole of ``[0, t)``?"""
        return self.kind == INFINITE_KIND or t <= self.time

    def closure(self) -> "Progress":
        """Largest progress reachable by knowing ``[0, t)``: Exclusive(t) and Inclusive(t) give Inclusive(t)."""
        if self.kind == INFINITE_KIND:
            return self
        return Progress(INCLUSIVE, self.time)

    def __repr__(self):
        if self.kind == INFINITE_KIND:
            return "Infinite"
        return f"{'Inclusive' if self.kind == INCLUSIVE else 'Exclusive'}({format_number(self.time)})"


def Exclusive(t) -> Progress:
    return Progress(EXCLUSIVE, to_time(t))


def Inclusive(t) -> Progress:
    return Progress(INCLUSIVE, to_time(t))


INFINITE = Progress(INFINITE_KIND)
ZERO = Exclusive(0)


def min_progress(ps: Iterable[Progress]) -> Progress:
    return min(ps, default=INFINITE)


class EventStream:
    """A finite list of ``(time, value)`` events plus progress. Immutable."""

    __slots__ = ("events", "progress", "_times")

    def __init__(self, events: Sequence = (), progress: Progress = INFINITE, *, check: bool = True):
        evs = tuple((to_time(t) if check else t, v) for t, v in events)
        if check:
            for (a, _), (b, _) in zip(evs, evs[1:]):
                if not a < b:
                    raise NonMonotonicTimestamps(f"timestamps not strictly increasing: {a} then {b}")
            if evs and not progress.contains(evs[-1][0]):
                raise EventBeyondProgress(f"event at {evs[-1][0]} beyond progress {progress}")
        object.__setattr__(self, "events", evs)
        object.__setattr__(self, "progress", progress)
        object.__setattr__(self, "_times", None)

    def __setattr__(self, key, value):
        raise AttributeError("EventStream is immutable")

    @property
    def times(self) -> list:
        if self._times is None:
            object.__setattr__(self, "_times", [t for t, _ in self.events])
        return self._times

    def lookup(self, t: Time):
        """Function view: the value at ``t``, ``NO_EVENT`` if known empty, ``UNKNOWN`` beyond progress."""
        i = bisect.bisect_left(self.times, t)
        if i < len(self.events) and self.events[i][0] == t:
            return self.events[i][1]
        return NO_EVENT if self.progress.contains(t) else UNKNOWN

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return self.progress == other.progress and _same_events(self.events, other.events)

    def __hash__(self):
        return hash((self.progress, tuple(t for t, _ in self.events)))

    def __len__(self):
        return len(self.events)

    def __repr__(self):
        evs = ", ".join(f"({format_number(t)}, {v!r})" for t, v in self.events)
        return f"EventStream([{evs}], {self.progress!r})"


class _Marker:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


NO_EVENT = _Marker("NoEvent")
UNKNOWN = _Marker("Unknown")


def _same_events(a, b) -> bool:
    return len(a) == len(b) and all(x[0] == y[0] and same_value(x[1], y[1]) for x, y in zip(a, b))


def make_stream(events: Sequence = (), progress: Progress = INFINITE) -> EventStream:
    return EventStream(events, progress)


def nil() -> EventStream:
    return EventStream((), INFINITE, check=False)


def cut(s: EventStream, p: Progress) -> EventStream:
    """Greatest prefix of ``s`` whose progress is at most ``p``."""
    q = min(p, s.progress)
    if q == s.progress:
        return s
    if q.infinite:
        return s
    if q.inclusive:
        i = bisect.bisect_right(s.times, q.time)
    else:
        i = bisect.bisect_left(s.times, q.time)
    return EventStream(s.events[:i], q, check=False)


def is_prefix(a: EventStream, b: EventStream) -> bool:
    if b.progress < a.progress:
        return False
    return _same_events(a.events, cut(b, a.progress).events)


def timestamps_union(streams: Iterable[EventStream]) -> list:
    out = set()
    for s in streams:
        out.update(s.times)
    return sorted(out)


def supremum(chain: Iterable[EventStream]) -> EventStream:
    """Least upper bound of a directed set of prefixes: union of events, max progress."""
    events = {}
    best = ZERO
    for s in chain:
        for t, v in s.events:
            events[t] = v
        best = max(best, s.progress)
    return EventStream(sorted(events.items(), key=lambda e: e[0]), best)


def extend(s: EventStream, events: Sequence, progress: Progress) -> EventStream:
    """Append events and advance progress; validates like the constructor."""
    if progress < s.progress:
        raise ValueError(f"progress would decrease from {s.progress} to {progress}")
    if events and s.progress.contains(to_time(events[0][0])):
        raise NonMonotonicTimestamps(f"event at {events[0][0]} inside known prefix {s.progress}")
    return EventStream(s.events + tuple(events), progress)
