"""Line-oriented text format for traces.

::

    # comment
    2: write = ()
    5: temperature = 6.5
    5: name = "a \\"quoted\\" string"
    @progress 20      # everything known up to and including 20
    @progress 20!     # ... up to but excluding 20

Without a progress directive the trace is complete (progress Infinite).
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import NonMonotonicTrace, TraceParseError, UnknownValueSyntax
from .streams import INFINITE, EventStream, Exclusive, Inclusive, Progress
from .values import UNIT, format_number, format_value, parse_number

_EVENT_RE = re.compile(r"^(?P<t>[0-9][0-9./]*)\s*:\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>.*?)\s*$")
_PROGRESS_RE = re.compile(r"^@progress\s+(?P<t>[0-9][0-9./]*)(?P<excl>!?)\s*$")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def _strip_comment(line: str) -> str:
    in_str = False
    i = 0
    while i < len(line):
        c = line[i]
        if in_str:
            if c == "\\":
                i += 1
            elif c == '"':
                in_str = False
        elif c == '"':
            in_str = True
        elif c == "#":
            return line[:i]
        i += 1
    return line


def parse_value(text: str, line: Optional[int] = None):
    if text == "()":
        return UNIT
    if text == "true":
        return True
    if text == "false":
        return False
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        body = text[1:-1]
        out = []
        i = 0
        while i < len(body):
            c = body[i]
            if c == "\\":
                if i + 1 >= len(body) or body[i + 1] not in _ESCAPES:
                    raise UnknownValueSyntax(f"bad escape in string {text}", line)
                out.append(_ESCAPES[body[i + 1]])
                i += 2
            elif c == '"':
                raise UnknownValueSyntax(f"unescaped quote in string {text}", line)
            else:
                out.append(c)
                i += 1
        return "".join(out)
    try:
        return parse_number(text)
    except ValueError:
        raise UnknownValueSyntax(f"cannot read value {text!r}", line) from None


def _parse_time(text: str, line: int):
    try:
        return parse_number(text)
    except ValueError:
        raise TraceParseError(f"bad timestamp {text!r}", line) from None


def parse_line(raw: str, lineno: int):
    """Returns ``None`` (blank), ``("event", t, name, value)`` or ``("progress", Progress)``."""
    line = _strip_comment(raw).strip()
    if not line:
        return None
    m = _PROGRESS_RE.match(line)
    if m:
        t = _parse_time(m.group("t"), lineno)
        return ("progress", Exclusive(t) if m.group("excl") else Inclusive(t))
    if line.startswith("@"):
        raise TraceParseError(f"unknown directive {line.split()[0]!r}", lineno)
    m = _EVENT_RE.match(line)
    if not m:
        raise TraceParseError(f"expected '<time>: <name> = <value>', got {line!r}", lineno)
    t = _parse_time(m.group("t"), lineno)
    return ("event", t, m.group("name"), parse_value(m.group("value"), lineno))


class TraceReader:
    """Incremental reader: feed lines, collect per-stream deltas.

    Each event at time ``t`` proves that every stream is known before ``t``
    (timestamps never decrease down the file), so the reader can hand out
    chunks with progress ``Exclusive(t)`` even without explicit directives.
    """

    def __init__(self, names: Sequence[str] = ()):
        self.names = list(names)
        self.lineno = 0
        self.time = None           # largest timestamp seen
        self.progress: Progress = Exclusive(0)
        self.final: Optional[Progress] = None      # directive that ended the input so far
        self.declared: Optional[Progress] = None   # latest directive
        self._last_per_stream: Dict[str, object] = {}
        self._buffer: Dict[str, list] = {}
        self._all: Dict[str, list] = {}

    def _ensure(self, name):
        if name not in self._all:
            self._all[name] = []
            if name not in self.names:
                self.names.append(name)

    def feed(self, raw: str) -> bool:
        """Consume one line. Returns True if known progress advanced."""
        self.lineno += 1
        item = parse_line(raw, self.lineno)
        if item is None:
            return False
        if self.declared is not None and item[0] == "event" and self.declared.contains(item[1]):
            raise NonMonotonicTrace(f"event at {format_number(item[1])} lies inside declared progress {self.declared}", self.lineno)
        if item[0] == "progress":
            p = item[1]
            if p < self.progress:
                raise NonMonotonicTrace(f"progress {p} goes back behind {self.progress}", self.lineno)
            if self.time is not None and not p.contains(self.time):
                raise NonMonotonicTrace(f"progress {p} excludes the already read event at {format_number(self.time)}", self.lineno)
            self.progress = self.final = self.declared = p
            return True
        _, t, name, value = item
        if self.time is not None and t < self.time:
            raise NonMonotonicTrace(f"timestamp {format_number(t)} after {format_number(self.time)}", self.lineno)
        prev = self._last_per_stream.get(name)
        if prev is not None and prev >= t:
            raise NonMonotonicTrace(f"second event of {name} at {format_number(t)}", self.lineno)
        self._last_per_stream[name] = t
        self.final = None  # a directive only fixes the end if nothing follows it
        self._ensure(name)
        self._all[name].append((t, value))
        self._buffer.setdefault(name, []).append((t, value))
        advanced = self.time is None or t > self.time
        self.time = t
        if Exclusive(t) > self.progress:
            self.progress = Exclusive(t)
        return advanced

    def take(self, final: bool = False) -> Dict[str, EventStream]:
        """Deltas since the last call, each with the current known progress.

        With ``final`` the trace has ended: progress becomes the declared final
        progress or Infinite.
        """
        p = (self.final or INFINITE) if final else self.progress
        out = {}
        for name in self.names:
            evs = self._buffer.get(name, [])
            i = 0
            while i < len(evs) and p.contains(evs[i][0]):
                i += 1
            self._buffer[name] = evs[i:]
            out[name] = EventStream(evs[:i], p)
        return out

    def streams(self, final: bool = True) -> Dict[str, EventStream]:
        p = (self.final or INFINITE) if final else self.progress
        return {n: EventStream(self._all.get(n, []), p) for n in self.names}


def parse_trace(text: str, names: Sequence[str] = ()) -> Dict[str, EventStream]:
    """Read a complete trace. ``names`` adds empty streams for absent inputs."""
    reader = TraceReader(names)
    for raw in text.split("\n"):
        reader.feed(raw)
    return reader.streams(final=True)


def read_chunks(lines: Iterable[str], names: Sequence[str] = ()) -> Iterator[Dict[str, EventStream]]:
    """Yield input deltas as soon as progress moves, then one final chunk."""
    reader = TraceReader(names)
    for raw in lines:
        if reader.feed(raw.rstrip("\n")):
            yield reader.take()
    yield reader.take(final=True)


def serialize_trace(streams: Mapping[str, EventStream], order: Optional[Sequence[str]] = None) -> str:
    """Merge all streams into one text, by time and then by ``order``."""
    names = list(order) if order is not None else list(streams)
    if not names:
        return ""
    progresses = {streams[n].progress for n in names}
    if len(progresses) != 1:
        raise ValueError(f"streams have different progress: {sorted(progresses)}")
    progress = progresses.pop()
    rank = {n: i for i, n in enumerate(names)}
    rows: List[Tuple] = []
    for n in names:
        for t, v in streams[n].events:
            rows.append((t, rank[n], n, v))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = [f"{format_number(t)}: {n} = {format_value(v)}" for t, _, n, v in rows]
    if not progress.infinite:
        lines.append(f"@progress {format_number(progress.time)}{'' if progress.inclusive else '!'}")
    return "\n".join(lines) + "\n"
