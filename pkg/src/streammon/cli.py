"""Command-line interface.

Exit codes: 0 success, 1 specification error, 2 trace error, 3 runtime error,
4 equivalence counterexample found, 5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import difflib
import logging
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, TextIO

from . import __version__
from .dataflow import DEFAULT_CAPACITY, SCHEDULES, evaluate_dataflow
from .depgraph import build_graph, require_well_formed, to_dot
from .engine import Limits, Monitor, evaluate
from .errors import EventLimitExceeded, FragmentError, MonitorError, SpecError, TraceError
from .frontend import compile_spec
from .ir import CoreSpec, flatten
from .traceio import parse_trace, read_chunks, serialize_trace
from .values import format_number, format_value

EXIT_OK, EXIT_SPEC, EXIT_TRACE, EXIT_RUNTIME, EXIT_COUNTEREXAMPLE, EXIT_MISMATCH = range(6)
log = logging.getLogger("streammon")


@dataclass
class CliConfig:
    command: str
    spec: Optional[str] = None
    trace: Optional[str] = None
    max_events: Optional[int] = None
    max_generated: Optional[int] = None
    queue_capacity: int = DEFAULT_CAPACITY
    output: Optional[str] = None


class _SpecFileError(SpecError):
    pass


class _TraceFileError(TraceError):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def _load_spec(path: str) -> CoreSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise _SpecFileError(f"cannot read {path}: {e.strerror}") from e
    return compile_spec(text)


def _read_trace_text(path: Optional[str], stdin: TextIO) -> str:
    if path is None or path == "-":
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _TraceFileError(f"cannot read {path}: {e.strerror}") from e


def _limits(args) -> Limits:
    d = Limits()
    return Limits(args.max_events if args.max_events is not None else d.max_events,
                  args.max_generated if args.max_generated is not None else d.max_generated)


def _event_lines(events: Dict[str, list], order: Sequence[str]) -> List[str]:
    rank = {n: i for i, n in enumerate(order)}
    rows = sorted(((t, rank[n], n, v) for n in order for t, v in events.get(n, [])), key=lambda r: r[:2])
    return [f"{format_number(t)}: {n} = {format_value(v)}" for t, _, n, v in rows]


# -- commands ----------------------------------------------------------------------

def cmd_run(args, out: TextIO, stdin: TextIO) -> int:
    spec = _load_spec(args.spec)
    order = list(spec.outputs)
    if args.follow:
        return _run_follow(spec, order, args, out, stdin)
    inputs = parse_trace(_read_trace_text(args.trace, stdin), list(spec.inputs))
    try:
        result = evaluate(spec, inputs, _limits(args))
    except EventLimitExceeded as e:
        out.write(serialize_trace(e.outputs, order))
        raise
    out.write(serialize_trace(result, order))
    return EXIT_OK


def _run_follow(spec: CoreSpec, order, args, out: TextIO, stdin: TextIO) -> int:
    mon = Monitor(spec, _limits(args))
    source = stdin if args.trace in (None, "-") else open(args.trace, encoding="utf-8")
    written = {n: 0 for n in order}

    def flush():
        new = {n: mon.events[n][written[n]:] for n in order}
        out.write("".join(line + "\n" for line in _event_lines(new, order)))
        written.update({n: len(mon.events[n]) for n in order})
        out.flush()

    try:
        for chunk in read_chunks(source, list(spec.inputs)):
            try:
                mon.advance(chunk)
            except EventLimitExceeded:
                # print what became definite before the limit stopped the run
                flush()
                _write_progress(mon.progress, out)
                raise
            flush()
    finally:
        if source is not stdin:
            source.close()
    _write_progress(mon.progress, out)
    return EXIT_OK


def _write_progress(p, out: TextIO):
    if not p.infinite:
        out.write(f"@progress {format_number(p.time)}{'' if p.inclusive else '!'}\n")


def cmd_check(args, out: TextIO, stdin: TextIO) -> int:
    spec = flatten(_load_spec(args.spec))
    order = require_well_formed(spec)
    out.write(f"ok: {len(spec.inputs)} inputs, {len(spec.equations)} equations, outputs {', '.join(spec.outputs)}\n")
    log.info("evaluation order: %s", " ".join(order))
    return EXIT_OK


def cmd_flatten(args, out: TextIO, stdin: TextIO) -> int:
    out.write(flatten(_load_spec(args.spec)).show() + "\n")
    return EXIT_OK


def cmd_graph(args, out: TextIO, stdin: TextIO) -> int:
    spec = flatten(_load_spec(args.spec))
    out.write(to_dot(build_graph(spec), spec.inputs))
    return EXIT_OK


def cmd_dfst(args, out: TextIO, stdin: TextIO) -> int:
    from .fragments import dump_dfst, to_dfst
    out.write(dump_dfst(to_dfst(_load_spec(args.spec)), max_states=args.max_states))
    return EXIT_OK


def _letter(letter) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(letter.items())) or "-"


def cmd_equiv(args, out: TextIO, stdin: TextIO) -> int:
    from .fragments import dfst_equivalent, to_dfst
    r1, r2 = to_dfst(_load_spec(args.spec)), to_dfst(_load_spec(args.spec2))
    res = dfst_equivalent(r1, r2)
    if res:
        out.write(f"equivalent ({res.explored} state pairs explored)\n")
        return EXIT_OK
    out.write(f"not equivalent; counterexample of length {len(res.counterexample)}:\n")
    for i, letter in enumerate(res.counterexample):
        out.write(f"  {i}: {_letter(letter)}\n")
    o1, o2 = res.outputs
    show = lambda o: o if isinstance(o, str) else _letter(dict(o))
    out.write(f"  first:  {show(o1)}\n  second: {show(o2)}\n")
    return EXIT_COUNTEREXAMPLE


def _outcome_text(f, order) -> str:
    try:
        return serialize_trace(f(), order)
    except EventLimitExceeded as e:
        return serialize_trace(e.outputs, order) + f"# {e}\n"


def cmd_oracle(args, out: TextIO, stdin: TextIO) -> int:
    spec = _load_spec(args.spec)
    order = list(spec.outputs)
    inputs = parse_trace(_read_trace_text(args.trace, stdin), list(spec.inputs))
    limits = _limits(args)
    a = _outcome_text(lambda: evaluate(spec, inputs, limits), order)
    b = _outcome_text(lambda: evaluate_dataflow(spec, inputs, args.queue_capacity, args.schedule, args.seed, limits),
                      order)
    if a == b:
        out.write(f"identical ({len(a.splitlines())} lines)\n")
        return EXIT_OK
    out.writelines(difflib.unified_diff(a.splitlines(True), b.splitlines(True), "engine", "dataflow"))
    return EXIT_MISMATCH


COMMANDS = {"run": cmd_run, "check": cmd_check, "flatten": cmd_flatten, "graph": cmd_graph, "dfst": cmd_dfst,
            "equiv": cmd_equiv, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="streammon", description="Evaluate and inspect stream specifications.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def limits(sp):
        sp.add_argument("--max-events", type=_positive, help="stop after this many output events")
        sp.add_argument("--max-generated", type=_positive, help="stop after this many timeout-only steps")

    sp = sub.add_parser("run", help="evaluate a spec on a trace and print the output trace")
    sp.add_argument("spec")
    sp.add_argument("trace", nargs="?", default="-", help="trace file, or - for stdin (default)")
    sp.add_argument("--follow", action="store_true", help="read the trace incrementally and print outputs early")
    limits(sp)
    for name, text in (("check", "type check and check well-formedness"), ("flatten", "print the flat core spec"),
                       ("graph", "print the dependency graph in DOT")):
        sub.add_parser(name, help=text).add_argument("spec")
    sp = sub.add_parser("dfst", help="print the transducer of a boolean-fragment spec as JSON")
    sp.add_argument("spec")
    sp.add_argument("--max-states", type=_positive, default=10_000)
    sp = sub.add_parser("equiv", help="decide equivalence of two boolean-fragment specs")
    sp.add_argument("spec")
    sp.add_argument("spec2")
    sp = sub.add_parser("oracle", help="compare the engine with the dataflow network")
    sp.add_argument("spec")
    sp.add_argument("trace", nargs="?", default="-")
    sp.add_argument("--queue-capacity", type=_positive, default=DEFAULT_CAPACITY)
    sp.add_argument("--schedule", choices=SCHEDULES, default="round-robin")
    sp.add_argument("--seed", type=int, default=0)
    limits(sp)
    return p


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, stdin: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    stdin = stdin or sys.stdin
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args, out, stdin)
    except (SpecError, FragmentError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SPEC
    except TraceError as e:
        print(f"trace error: {e}", file=sys.stderr)
        return EXIT_TRACE
    except (MonitorError, ValueError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except BrokenPipeError:
        # the reader went away (e.g. `| head`); stay quiet like other filters
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
