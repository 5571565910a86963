import io
import json
import subprocess
import sys

import pytest

from conftest import BOOL, CORPUS, GOLDEN
from streammon.cli import (EXIT_COUNTEREXAMPLE, EXIT_OK, EXIT_RUNTIME, EXIT_SPEC, EXIT_TRACE, build_parser, main)


def run(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), out, io.StringIO(stdin))
    return code, out.getvalue()


def g(name, ext):
    return str(GOLDEN / f"{name}.{ext}")


@pytest.mark.parametrize("name", CORPUS)
def test_run_reproduces_expected_output(name):
    args = ["run", g(name, "spec"), g(name, "trace")] + (["--max-events", "4"] if name == "period" else [])
    code, text = run(*args)
    assert code == (EXIT_RUNTIME if name == "period" else EXIT_OK)
    assert text == (GOLDEN / f"{name}.expected").read_text(encoding="utf-8")


@pytest.mark.parametrize("name", CORPUS)
def test_follow_mode_prints_the_same_events(name):
    extra = ["--max-events", "4"] if name == "period" else []
    trace = (GOLDEN / f"{name}.trace").read_text(encoding="utf-8")
    _, once = run("run", g(name, "spec"), "-", *extra, stdin=trace)
    _, follow = run("run", g(name, "spec"), "-", "--follow", *extra, stdin=trace)
    assert follow == once


def test_run_reads_stdin_and_is_deterministic():
    trace = (GOLDEN / "temperature.trace").read_text(encoding="utf-8")
    results = {run("run", g("temperature", "spec"), stdin=trace)[1] for _ in range(3)}
    assert len(results) == 1


def test_check_accepts_and_rejects():
    assert run("check", g("diff", "spec"))[0] == EXIT_OK
    code, text = run("check", g("illformed", "spec"))
    assert code == EXIT_SPEC


def test_error_exit_codes(tmp_path):
    bad_spec = tmp_path / "bad.spec"
    bad_spec.write_text("def y := (")
    assert run("run", str(bad_spec), g("diff", "trace"))[0] == EXIT_SPEC
    assert run("run", str(tmp_path / "missing.spec"), g("diff", "trace"))[0] == EXIT_SPEC
    bad_trace = tmp_path / "bad.trace"
    bad_trace.write_text("5: write = ()\n2: write = ()\n")
    assert run("run", g("diff", "spec"), str(bad_trace))[0] == EXIT_TRACE
    neg = tmp_path / "neg.spec"
    neg.write_text("in x: Events[Num]\ndef d := delay(x, x)\nout d")
    assert run("run", str(neg), "-", stdin="1: x = -1\n")[0] == EXIT_RUNTIME
    assert run("dfst", g("diff", "spec"))[0] == 1


def test_flatten_and_graph():
    code, text = run("flatten", g("diff", "spec"))
    assert code == EXIT_OK and "_flat" in text
    code, text = run("graph", g("period", "spec"))
    assert code == EXIT_OK and text.startswith("digraph") and "dashed" in text


def test_dfst_dump():
    code, text = run("dfst", str(BOOL / "toggle.spec"))
    assert code == EXIT_OK and json.loads(text)["outputs"] == ["t"]


def test_equiv():
    assert run("equiv", str(BOOL / "and.spec"), str(BOOL / "demorgan.spec"))[0] == EXIT_OK
    code, text = run("equiv", str(BOOL / "negation.spec"), str(BOOL / "identity.spec"))
    assert code == EXIT_COUNTEREXAMPLE and "counterexample" in text.lower()


@pytest.mark.parametrize("schedule", ["round-robin", "reversed", "random"])
def test_oracle_agrees_on_the_corpus(schedule):
    for name in CORPUS:
        extra = ["--max-events", "4"] if name == "period" else []
        assert run("oracle", g(name, "spec"), g(name, "trace"), "--schedule", schedule, "--queue-capacity", "1",
                   *extra)[0] == EXIT_OK, name


def test_parser_rejects_bad_options():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["run", "x.spec", "--max-events", "0"])
    with pytest.raises(SystemExit):
        parser.parse_args([])


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "streammon", "run", g("diff", "spec"), g("diff", "trace")],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "diff.expected").read_text(encoding="utf-8")
