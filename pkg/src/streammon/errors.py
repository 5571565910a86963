"""Exception hierarchy. The CLI maps the four roots to exit codes 1, 2, 3 and 1."""


class SpecError(Exception):
    """Problems with a specification (syntax, types, well-formedness)."""


class TraceError(Exception):
    """Problems with an input trace."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class MonitorError(Exception):
    """Failures while evaluating a specification."""


class FragmentError(Exception):
    """Boolean fragment and transducer construction failures."""


# streams
class NonMonotonicTimestamps(ValueError):
    pass


class EventBeyondProgress(ValueError):
    pass


# frontend
class SurfaceSyntaxError(SpecError):
    def __init__(self, message, line, column, expected=()):
        self.line, self.column = line, column
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{exp}")


class UnknownMacro(SpecError):
    pass


class ArityMismatch(SpecError):
    pass


class RecursiveMacro(SpecError):
    pass


class SpecTypeError(SpecError):
    def __init__(self, message, expected=None, actual=None, pos=None):
        where = f"{pos[0]}:{pos[1]}: " if pos else ""
        super().__init__(where + message)
        self.expected, self.actual, self.pos = expected, actual, pos


class UndefinedStream(SpecError):
    pass


class DuplicateDefinition(SpecError):
    pass


# graph
class NotFlat(SpecError):
    pass


class NotWellFormed(SpecError):
    def __init__(self, cycle):
        super().__init__("dependency cycle without a delayed edge: " + " -> ".join(list(cycle) + cycle[:1]))
        self.cycle = list(cycle)


# trace-io
class TraceParseError(TraceError):
    pass


class NonMonotonicTrace(TraceError):
    pass


class UnknownValueSyntax(TraceError):
    pass


# engine
class NonPositiveDelay(MonitorError):
    def __init__(self, time, value):
        super().__init__(f"delay value {value} at time {time} is not positive")
        self.time, self.value = time, value


class EventLimitExceeded(MonitorError):
    """Raised when the event bound is hit; carries the truncated result."""

    def __init__(self, limit, progress, outputs):
        super().__init__(f"event limit {limit} reached; output known up to {progress}")
        self.limit, self.progress, self.outputs = limit, progress, outputs


class NonMonotonicChunk(MonitorError):
    pass


class Deadlock(MonitorError):
    def __init__(self, report):
        super().__init__("dataflow network deadlocked:\n" + report)
        self.report = report


# fragments
class NotBoolFragment(FragmentError):
    pass


class OutputNameClash(FragmentError):
    pass


class NoConsistentAssignment(FragmentError):
    def __init__(self, state, letter, detail=""):
        super().__init__(f"no consistent feedback assignment in state {state!r} for letter {letter!r}{detail}")
        self.state, self.letter = state, letter


class LetterNotInAlphabet(FragmentError):
    pass


class AlphabetMismatch(FragmentError):
    pass


class NotSingleDelay(FragmentError):
    pass
