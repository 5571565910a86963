"""Message-passing evaluation: one node per equation, bounded queues, progress tokens.

Every equation becomes a node that owns one FIFO queue per argument position.
Producers broadcast each message to all subscriber queues at once and only
fire when every subscriber queue has room. Messages are events ``("e", t, v)``
or progress tokens ``("p", progress)``; an event at ``t`` also tells the
receiver that the stream is known up to and including ``t``.

A node keeps its operator state (one stored value for ``last``, one pending
timeout for ``delay``) and otherwise works directly on the heads of its
queues. A scheduler fires nodes until nothing can move. The result is cut to
the common input progress, like the engine's, and the engine's event limits
are applied to the same step times so both evaluators agree exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from . import terms
from .depgraph import require_well_formed
from .engine import Limits
from .errors import Deadlock, EventLimitExceeded, NonPositiveDelay
from .ir import CoreSpec, Delay, Last, Lift, Nil, TimeE, UnitE, Var, flatten
from .streams import INFINITE, ZERO, EventStream, Exclusive, Inclusive, Progress, min_progress
from .values import BOTTOM, UNIT, is_num

DEFAULT_CAPACITY = 16
SCHEDULES = ("round-robin", "reversed", "random")


class Queue:
    """Bounded FIFO of messages with the receiver's view of the sender's progress."""

    def __init__(self, capacity: int, source: str):
        self.items: deque = deque()
        self.capacity = capacity
        self.source = source
        self.known: Progress = ZERO   # from consumed tokens and events
        self.high_water = 0

    def has_room(self) -> bool:
        return len(self.items) < self.capacity

    def put(self, msg):
        self.items.append(msg)
        self.high_water = max(self.high_water, len(self.items))

    def drop_tokens(self) -> bool:
        moved = False
        while self.items and self.items[0][0] == "p":
            p = self.items.popleft()[1]
            if p > self.known:
                self.known = p
            moved = True
        return moved

    def head_time(self):
        return self.items[0][1] if self.items and self.items[0][0] == "e" else None

    def pop_event(self):
        _, t, v = self.items.popleft()
        if Inclusive(t) > self.known:
            self.known = Inclusive(t)
        return t, v

    def avail(self) -> Progress:
        """How far the stream is known from consumed messages and the head event."""
        t = self.head_time()
        if t is not None and Inclusive(t) > self.known:
            return Inclusive(t)
        return self.known


class Node:
    kind = "node"

    def __init__(self, name: str):
        self.name = name
        self.inputs: List[Queue] = []
        self.subscribers: List[Queue] = []
        self.sent: Progress = ZERO      # progress already told to subscribers
        self.fired = 0

    def can_send(self) -> bool:
        return all(q.has_room() for q in self.subscribers)

    def send_event(self, t, v):
        for q in self.subscribers:
            q.put(("e", t, v))
        if Inclusive(t) > self.sent:
            self.sent = Inclusive(t)

    def send_progress(self, p: Progress) -> bool:
        if p > self.sent and self.can_send():
            for q in self.subscribers:
                q.put(("p", p))
            self.sent = p
            return True
        return False

    def step(self) -> bool:
        raise NotImplementedError


class SourceNode(Node):
    kind = "input"

    def __init__(self, name: str, stream: EventStream):
        super().__init__(name)
        self.pending = deque(stream.events)
        self.final = stream.progress

    def step(self) -> bool:
        if self.pending:
            if not self.can_send():
                return False
            t, v = self.pending.popleft()
            self.send_event(t, v)
            return True
        return self.send_progress(self.final)


class ConstNode(Node):
    """``nil`` and ``unit``: a fixed stream with progress Infinite."""

    def __init__(self, name: str, events):
        super().__init__(name)
        self.kind = "unit" if events else "nil"
        self.pending = deque(events)

    step = SourceNode.step
    final = INFINITE


class LiftNode(Node):
    """``lift``, ``time`` and plain variables: pointwise at events known on all inputs."""

    def __init__(self, name: str, fn):
        super().__init__(name)
        self.fn = fn
        self.kind = "lift"

    def step(self) -> bool:
        moved = any([q.drop_tokens() for q in self.inputs])
        heads = [q.head_time() for q in self.inputs]
        times = [t for t in heads if t is not None]
        if times:
            t = min(times)
            if all(q.avail().contains(t) for q in self.inputs):
                args = [BOTTOM] * len(self.inputs)
                for i, q in enumerate(self.inputs):
                    if heads[i] == t:
                        args[i] = q.items[0][2]
                r = self.fn(t, args)
                if r is not BOTTOM and not self.can_send():
                    return moved
                for i, q in enumerate(self.inputs):
                    if heads[i] == t:
                        q.pop_event()
                if r is not BOTTOM:
                    self.send_event(t, r)
                self.fired += 1
                return True
        return self.send_progress(min_progress(q.avail() for q in self.inputs)) or moved


class LastNode(Node):
    kind = "last"

    def __init__(self, name: str):
        super().__init__(name)
        self.value = BOTTOM        # the one stored value
        self.first_value_time = None

    def _take_value(self, q: Queue):
        t, v = q.pop_event()
        self.value = v
        if self.first_value_time is None:
            self.first_value_time = t

    def step(self) -> bool:
        values, trigger = self.inputs
        moved = values.drop_tokens() | trigger.drop_tokens()
        tv, tr = values.head_time(), trigger.head_time()
        if tr is not None:
            if tv is not None and tv < tr:
                self._take_value(values)
                return True
            if values.avail().known_before(tr):
                if self.value is not BOTTOM:
                    if not self.can_send():
                        return moved
                    self.send_event(tr, self.value)
                trigger.pop_event()
                self.fired += 1
                return True
        if tv is not None and trigger.avail().contains(tv) and (tr is None or tr > tv):
            self._take_value(values)
            return True
        main = Exclusive(tr) if tr is not None else trigger.known
        if self.first_value_time is not None:
            empty = Inclusive(self.first_value_time)
        elif tv is not None:
            empty = Inclusive(tv)
        else:
            empty = values.known.closure()
        return self.send_progress(max(main, empty)) or moved


class DelayNode(Node):
    kind = "delay"

    def __init__(self, name: str, horizon: Progress):
        super().__init__(name)
        self.pending = None      # absolute time of the armed timeout
        self.setting = None      # setting point waiting for its delay value
        self.last_set = None     # latest setting point, so a late reset at the same time is not counted twice
        self.horizon = horizon

    def _pop_delay(self, q: Queue):
        t, d = q.pop_event()
        if self.horizon.contains(t) and (not is_num(d) or d <= 0):
            raise NonPositiveDelay(t, d)
        return t, d

    def step(self) -> bool:
        delays, resets = self.inputs
        moved = delays.drop_tokens() | resets.drop_tokens()
        td = delays.head_time()
        if self.setting is not None:
            s = self.setting
            if td is not None and td < s:
                self._pop_delay(delays)
                return True
            if td == s:
                _, d = self._pop_delay(delays)
                self.pending = s + d
                self.setting = None
                return True
            if delays.avail().contains(s):
                self.pending = None
                self.setting = None
                return True
            return self.send_progress(min(Inclusive(s), self.horizon)) or moved
        nr = resets.head_time()
        # delay values that no future setting point can read are dropped
        if td is not None and (self.pending is None or td < self.pending) \
                and resets.avail().contains(td) and (nr is None or nr > td):
            self._pop_delay(delays)
            return True
        if self.pending is not None and (nr is None or self.pending <= nr):
            p = self.pending
            if self.horizon.contains(p) and resets.avail().known_before(p):
                if not self.can_send():
                    return moved
                self.send_event(p, UNIT)
                if nr == p:
                    resets.pop_event()
                self.setting = self.last_set = p
                self.pending = None
                self.fired += 1
                return True
            return self.send_progress(min(resets.avail().closure(), self.horizon)) or moved
        if nr is not None:
            resets.pop_event()
            if nr == self.last_set:
                # the timeout at this time already made it a setting point
                return True
            self.setting = self.last_set = nr
            self.fired += 1
            return True
        return self.send_progress(min(resets.avail().closure(), self.horizon)) or moved


class SinkNode(Node):
    kind = "sink"

    def __init__(self, name: str):
        super().__init__(name)
        self.events: list = []

    @property
    def progress(self) -> Progress:
        return self.inputs[0].known

    def step(self) -> bool:
        q = self.inputs[0]
        moved = False
        while q.items:
            moved = True
            if q.items[0][0] == "p":
                q.drop_tokens()
            else:
                self.events.append(q.pop_event())
        return moved


def _lift_fn(f):
    def fn(t, args):
        return terms.evaluate(f, args)
    return fn


def _time_fn(t, args):
    return t


def _id_fn(t, args):
    return args[0]


@dataclass
class Network:
    spec: CoreSpec
    nodes: Dict[str, Node]
    sources: Dict[str, SourceNode]
    sinks: Dict[str, SinkNode]
    queues: List[Queue]
    capacity: int
    horizon: Progress
    record: List[str] = field(default_factory=list)

    def occupancy(self) -> Dict[str, List[int]]:
        out: Dict[str, List[int]] = {}
        for n in list(self.sources.values()) + list(self.nodes.values()) + list(self.sinks.values()):
            out[f"{n.kind}:{n.name}"] = [len(q.items) for q in n.inputs]
        return out


def build_network(spec: CoreSpec, capacity: int = DEFAULT_CAPACITY, inputs: Optional[Mapping[str, EventStream]] = None,
                  record=None) -> Network:
    """One node per equation, one queue per argument position, one sink per recorded stream."""
    if capacity < 1:
        raise ValueError("queue capacity must be at least 1")
    if not spec.is_flat():
        spec = flatten(spec)
    require_well_formed(spec)
    inputs = dict(inputs or {})
    given = {n: s for n, s in inputs.items() if n in spec.inputs}
    default = min_progress(s.progress for s in given.values()) if given else INFINITE
    streams = {n: given.get(n, EventStream((), default)) for n in spec.inputs}
    horizon = min_progress(s.progress for s in streams.values())
    if record == "all":
        record = list(spec.equations)
    record = list(spec.outputs if record is None else record)

    sources = {n: SourceNode(n, s) for n, s in streams.items()}
    nodes: Dict[str, Node] = {}
    for name, e in spec.equations.items():
        if isinstance(e, Nil):
            nodes[name] = ConstNode(name, ())
        elif isinstance(e, UnitE):
            nodes[name] = ConstNode(name, [(Fraction(0), UNIT)])
        elif isinstance(e, Var):
            nodes[name] = LiftNode(name, _id_fn)
        elif isinstance(e, TimeE):
            nodes[name] = LiftNode(name, _time_fn)
        elif isinstance(e, Lift):
            nodes[name] = LiftNode(name, _lift_fn(e.f))
        elif isinstance(e, Last):
            nodes[name] = LastNode(name)
        elif isinstance(e, Delay):
            nodes[name] = DelayNode(name, horizon)
        else:
            raise TypeError(e)
    queues: List[Queue] = []

    def producer(n: str) -> Node:
        return sources[n] if n in sources else nodes[n]

    def connect(src: str, dst: Node):
        q = Queue(capacity, src)
        producer(src).subscribers.append(q)
        dst.inputs.append(q)
        queues.append(q)

    for name, e in spec.equations.items():
        if isinstance(e, Var):
            connect(e.name, nodes[name])
        elif isinstance(e, TimeE):
            connect(e.arg.name, nodes[name])
        elif isinstance(e, Lift):
            for a in e.args:
                connect(a.name, nodes[name])
        elif isinstance(e, Last):
            connect(e.values.name, nodes[name])
            connect(e.trigger.name, nodes[name])
        elif isinstance(e, Delay):
            connect(e.delays.name, nodes[name])
            connect(e.resets.name, nodes[name])
    sinks = {}
    for r in record:
        sinks[r] = SinkNode(r)
        connect(r, sinks[r])
    return Network(spec, nodes, sources, sinks, queues, capacity, horizon, record)


def _order(net: Network, schedule: str, rng: random.Random) -> List[Node]:
    base = sorted(list(net.sources.values()) + list(net.nodes.values()), key=lambda n: n.name)
    base += [net.sinks[n] for n in sorted(net.sinks)]
    if schedule == "round-robin":
        return base
    if schedule == "reversed":
        return base[::-1]
    if schedule == "random":
        rng.shuffle(base)
        return base
    raise ValueError(f"unknown schedule {schedule!r} (choose from {', '.join(SCHEDULES)})")


def _step_times(net: Network, upto: Progress):
    """Times at which the engine would run a step, with the 'generated' flag, up to ``upto``."""
    input_times = {t for s in net.sources.values() for t, _ in _source_events(s)}
    times = {0} | input_times
    delay_times = set()
    for n in net.nodes.values():
        if isinstance(n, DelayNode):
            delay_times.update(n.emitted_times)
    times |= delay_times
    return [(t, t != 0 and t not in input_times) for t in sorted(times) if upto.contains(t) and net.horizon.contains(t)]


def _source_events(s: SourceNode):
    return s.all_events


def _limit_cut(net: Network, upto: Progress, limits: Limits):
    """Replays the engine's stopping rule; returns ``(progress, limit)`` when it would halt."""
    counts: Dict = {}
    for name, sink in net.sinks.items():
        if name in net.spec.outputs:
            for t, _ in sink.events:
                counts[t] = counts.get(t, 0) + 1
    emitted = generated = 0
    prev = None
    for t, gen in _step_times(net, upto):
        for limit, value in ((limits.max_events, emitted), (limits.max_generated, generated)):
            if limit is not None and value >= limit:
                reached = min(net.horizon, Inclusive(prev)) if prev is not None else ZERO
                return reached, limit
        emitted += counts.get(t, 0)
        generated += 1 if gen else 0
        prev = t
    return None


def run_network(net: Network, schedule: str = "round-robin", seed: int = 0, limits: Optional[Limits] = None,
                max_rounds: Optional[int] = None) -> Dict[str, EventStream]:
    """Fire nodes until nothing moves; the recorded streams cut to the input progress."""
    limits = limits or Limits()
    rng = random.Random(seed)
    for s in net.sources.values():
        s.all_events = list(s.pending)
    for n in net.nodes.values():
        if isinstance(n, DelayNode):
            n.emitted_times = []
            _watch_delay(n)
    rounds = 0
    halt = None
    while True:
        rounds += 1
        moved = False
        for node in _order(net, schedule, rng):
            if node.step():
                moved = True
        if _limits_possible(net, limits):
            final = _final_progress(net)
            halt = _limit_cut(net, final, limits)
            if halt is not None:
                break
        if not moved:
            break
        if max_rounds is not None and rounds >= max_rounds:
            raise Deadlock(f"no quiescence after {max_rounds} rounds; queues: {net.occupancy()}")
    if halt is None:
        halt = _limit_cut(net, _final_progress(net), limits)
    progress = net.horizon if halt is None else halt[0]
    short = [n for n, s in net.sinks.items() if s.progress < progress]
    if short:
        raise Deadlock(f"stalled below {progress}: {', '.join(f'{n} at {net.sinks[n].progress}' for n in short)}; "
                       f"queues: {net.occupancy()}")
    out = {n: EventStream([(t, v) for t, v in net.sinks[n].events if progress.contains(t)], progress, check=False)
           for n in net.record}
    if halt is not None:
        raise EventLimitExceeded(halt[1], progress, out)
    return out


def _watch_delay(n: DelayNode):
    original = n.send_event

    def send_event(t, v):
        n.emitted_times.append(t)
        original(t, v)

    n.send_event = send_event


def _limits_possible(net: Network, limits: Limits) -> bool:
    if limits.max_events is not None and sum(len(s.events) for n, s in net.sinks.items()
                                             if n in net.spec.outputs) >= limits.max_events:
        return True
    if limits.max_generated is not None:
        gen = sum(len(n.emitted_times) for n in net.nodes.values() if isinstance(n, DelayNode))
        return gen >= limits.max_generated
    return False


def _final_progress(net: Network) -> Progress:
    """Everything below this is settled: sink contents and delay emissions."""
    ps = [s.progress for s in net.sinks.values()]
    ps += [n.sent for n in net.nodes.values() if isinstance(n, DelayNode)]
    return min_progress(ps)


def evaluate_dataflow(spec: CoreSpec, inputs: Mapping[str, EventStream], capacity: int = DEFAULT_CAPACITY,
                      schedule: str = "round-robin", seed: int = 0, limits: Optional[Limits] = None,
                      record=None) -> Dict[str, EventStream]:
    net = build_network(spec, capacity, inputs, record)
    return run_network(net, schedule, seed, limits)


__all__ = ["Queue", "Node", "Network", "build_network", "run_network", "evaluate_dataflow",
           "DEFAULT_CAPACITY", "SCHEDULES"]
