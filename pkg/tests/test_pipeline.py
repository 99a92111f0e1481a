"""Batch harness: configuration, external solvers, report rendering, and
the command line front end."""

import json
from pathlib import Path

import pytest

from chcslim.cli import main
from chcslim.corpus import corpus_dir, corpus_names
from chcslim.pipeline import (
    ConfigError, PipelineConfig, RunRecord, TABLE_LABELS, parse_json_lines,
    report, run_pipeline, solve_external,
)
from chcslim import parse_program, programs_isomorphic, nlr_transform

CORPUS = corpus_dir()


def config(tmp_path, names=("branch_unsafe",), **kw):
    inputs = [str(CORPUS / f"{n}.clp") for n in names]
    return PipelineConfig(inputs=inputs, out_dir=str(tmp_path / "out"), **kw)


@pytest.mark.parametrize("kw, fragment", [
    ({"inputs": []}, "input"),
    ({"stages": ("nlr", "bogus")}, "stage"),
    ({"stages": ("nlr", "nlr")}, "stage"),
    ({"timeout": 0}, "timeout"),
    ({"solver_cmd": "z3"}, "{file}"),
    ({"bound": 0}, "bound"),
])
def test_config_validation(tmp_path, kw, fragment):
    base = dict(inputs=[str(CORPUS / "branch_unsafe.clp")],
                out_dir=str(tmp_path))
    base.update(kw)
    with pytest.raises(ConfigError) as info:
        PipelineConfig(**base).validate()
    assert fragment in str(info.value)


@pytest.mark.parametrize("behavior, verdict", [
    ("sat", "sat"),
    ("unsat", "unsat"),
    ("garbage", "unknown"),
    ("empty", "unknown"),
    ("crash", "unknown"),
])
def test_solve_external_verdicts(tmp_path, fake_solver, behavior, verdict):
    smt = tmp_path / "q.smt2"
    smt.write_text("(check-sat)\n")
    got, elapsed = solve_external(str(smt), fake_solver(behavior), 10.0)
    assert got == verdict
    assert elapsed >= 0


def test_solve_external_timeout(tmp_path, fake_solver):
    smt = tmp_path / "q.smt2"
    smt.write_text("(check-sat)\n")
    got, elapsed = solve_external(str(smt), fake_solver("sleep"), 0.5)
    assert got == "timeout"
    assert elapsed == 0.5


def test_solve_external_missing_binary(tmp_path):
    smt = tmp_path / "q.smt2"
    smt.write_text("(check-sat)\n")
    got, elapsed = solve_external(str(smt), "/no/such/solver {file}", 5.0)
    assert got == "skipped"


def test_run_pipeline_produces_artifacts(tmp_path, fake_solver):
    cfg = config(tmp_path, names=("branch_unsafe", "chain_safe"),
                 solver_cmd=fake_solver("sat"), bound=None)
    records = run_pipeline(cfg)
    assert [r.name for r in records] == ["branch_unsafe", "chain_safe"]
    for record in records:
        assert record.verdict == "sat"
        assert record.classification == "safe"
        assert record.stages == ("nlr", "cfar")
        assert set(record.stage_times) == {"nlr", "cfar"}
        assert [Path(a).name for a in record.artifacts] == [
            f"{record.name}.nlr.clp", f"{record.name}.cfar.clp",
            f"{record.name}.smt2"]
        for path in record.artifacts:
            assert Path(path).exists()
        assert record.args_before is not None
        assert record.args_after is not None
        assert record.args_after <= record.args_before
        assert record.cfar_second_erasure == 0
        assert record.internal_error is None


def test_artifacts_reparse_and_preserve_arity_sums(tmp_path, fake_solver):
    cfg = config(tmp_path, names=("dead_argument",),
                 solver_cmd=fake_solver("unsat"))
    record = run_pipeline(cfg)[0]
    assert record.classification == "unsafe"
    nlr_art, cfar_art, smt = record.artifacts
    nlr_prog = parse_program(open(nlr_art).read())
    expected, _ = nlr_transform(parse_program(
        (CORPUS / "dead_argument.clp").read_text()))
    assert programs_isomorphic(nlr_prog, expected)
    assert open(smt).read().startswith("(set-logic HORN)")


def test_oracle_contradiction_marks_internal_error(tmp_path, fake_solver):
    # Bounded evaluation proves the query reachable; a solver claiming sat
    # (safe) is lying, and the run must say so rather than swallow it.
    cfg = config(tmp_path, names=("two_counters",),
                 solver_cmd=fake_solver("sat"), bound=32)
    records = run_pipeline(cfg)
    assert records[0].oracle == "holds"
    assert records[0].internal_error
    from chcslim.pipeline import invariant_failures
    assert invariant_failures(records)


def test_unreadable_input_becomes_error_record(tmp_path, fake_solver):
    cfg = PipelineConfig(
        inputs=[str(CORPUS / "branch_unsafe.clp"), str(tmp_path / "no.clp")],
        out_dir=str(tmp_path / "out"), solver_cmd=fake_solver("sat"))
    records = run_pipeline(cfg)
    assert records[0].verdict == "sat"
    assert records[1].verdict == "skipped"
    assert records[1].error


def test_stage_subset_skips_other_transform(tmp_path):
    cfg = config(tmp_path, stages=("nlr",))
    record = run_pipeline(cfg)[0]
    assert record.stages == ("nlr",)
    assert len(record.artifacts) == 2


def test_report_labels_and_arithmetic():
    a = RunRecord(name="a")
    a.verdict, a.classification, a.solve_time = "sat", "safe", 0.3
    a.stage_times = {"nlr": 0.1, "cfar": 0.2}
    b = RunRecord(name="b")
    b.verdict, b.classification, b.solve_time = "unsat", "unsafe", 0.5
    b.stage_times = {"nlr": 0.2, "cfar": 0.1}
    c = RunRecord(name="c")
    c.verdict = "timeout"
    text = report([a, b, c], json_lines=False)
    rows = dict(line.split(None, 1) for line in text.splitlines()
                if line and not line.startswith(("#", "{")))
    assert list(rows) == list(TABLE_LABELS)
    assert rows["c"] == "2"
    assert rows["s"] == "1"
    assert rows["u"] == "1"
    assert rows["to"] == "1"
    assert rows["n"] == "3"
    assert rows["t_NLR"] == "0.300"
    assert rows["t_cFAR"] == "0.300"
    assert rows["st"] == "0.800"
    assert rows["tt"] == "1.400"
    assert rows["at"] == "0.700"


def test_report_with_no_definitive_runs_prints_dashes():
    r = RunRecord(name="x")
    text = report([r], json_lines=False)
    rows = dict(line.split(None, 1) for line in text.splitlines() if line)
    assert rows["c"] == "0"
    assert rows["at"] == "--"


def test_report_idempotence_comment():
    a = RunRecord(name="a")
    a.cfar_second_erasure = 2
    b = RunRecord(name="b")
    b.cfar_second_erasure = 0
    text = report([a, b], json_lines=False)
    comments = [l for l in text.splitlines() if l.startswith("#")]
    assert comments == ["# cfar re-run produced a non-empty erasure "
                        "on 1 of 2 problems"]


def test_report_json_lines_round_trip(tmp_path, fake_solver):
    cfg = config(tmp_path, names=("branch_unsafe", "always_safe"),
                 solver_cmd=fake_solver("unsat"))
    records = run_pipeline(cfg)
    text = report(records)
    back = parse_json_lines(text)
    assert [r.to_json() for r in back] == [r.to_json() for r in records]
    summary = [json.loads(l) for l in text.splitlines()
               if l.startswith("{") and "summary" in l][-1]
    assert summary["summary"]["n"] == 2


def test_cli_parse_ok_and_error(tmp_path, capsys):
    good = CORPUS / "branch_unsafe.clp"
    assert main(["parse", str(good)]) == 0
    bad = tmp_path / "bad.clp"
    bad.write_text("p(X :- X=1.\n")
    assert main(["parse", str(bad)]) == 1
    out = capsys.readouterr()
    assert "ok" in out.out
    assert "expected" in out.out + out.err


def test_cli_nlr_writes_output(tmp_path, capsys):
    target = tmp_path / "out.clp"
    rc = main(["nlr", str(CORPUS / "nonlinking_call.clp"), "-o", str(target)])
    assert rc == 0
    produced = parse_program(target.read_text())
    expected, _ = nlr_transform(parse_program(
        (CORPUS / "nonlinking_call.clp").read_text()))
    assert programs_isomorphic(produced, expected)
    err = capsys.readouterr().err
    assert "arguments" in err


def test_cli_cfar_prints_erasure_on_stderr(capsys):
    rc = main(["cfar", str(CORPUS / "dead_argument.clp")])
    assert rc == 0
    out = capsys.readouterr()
    assert "p/2 2" in out.err
    assert parse_program(out.out)


def test_cli_eval_output(capsys):
    rc = main(["eval", str(CORPUS / "branch_unsafe.clp"), "--bound", "32"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "unsafe: holds"
    assert "rounds: 5" in lines
    assert "clipped: false" in lines


def test_cli_eval_budget_exhaustion(capsys):
    rc = main(["eval", str(CORPUS / "interval_loop_safe.clp"),
               "--bound", "32", "--budget", "10"])
    assert rc == 1
    assert "exceeded" in capsys.readouterr().err


def test_cli_solve_prints_verdict_and_time(tmp_path, fake_solver, capsys):
    rc = main(["solve", str(CORPUS / "chain_safe.clp"),
               "--solver-cmd", fake_solver("sat")])
    assert rc == 0
    verdict, elapsed = capsys.readouterr().out.split()
    assert verdict == "sat"
    assert float(elapsed) >= 0


def test_cli_pipeline_json_and_report_rerender(tmp_path, fake_solver, capsys):
    files = [str(CORPUS / f"{n}.clp") for n in ("branch_unsafe", "chain_safe")]
    rc = main(["pipeline", *files, "--out-dir", str(tmp_path / "o"),
               "--solver-cmd", fake_solver("unsat"), "--json"])
    assert rc == 0
    out = capsys.readouterr().out
    json_path = tmp_path / "r.jsonl"
    json_path.write_text(out)
    assert all(l.startswith("{") for l in out.splitlines() if l)
    rc = main(["report", str(json_path)])
    assert rc == 0
    table = capsys.readouterr().out
    assert "u      2" in table


def test_cli_pipeline_contradiction_exits_2(tmp_path, fake_solver, capsys):
    rc = main(["pipeline", str(CORPUS / "two_counters.clp"),
               "--out-dir", str(tmp_path / "o"),
               "--solver-cmd", fake_solver("sat"), "--bound", "32"])
    assert rc == 2
    assert "invariant failure" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["pipeline", "x.clp", "--stages", "bogus"],
    ["pipeline"],
    ["eval", "/no/such/file.clp"],
    ["bogus-command"],
])
def test_cli_usage_errors_exit_1(tmp_path, argv, capsys):
    assert main(argv) == 1


def test_cli_pipeline_without_solver_skips_everything(tmp_path, capsys):
    files = [str(CORPUS / f"{n}.clp") for n in corpus_names()]
    rc = main(["pipeline", *files, "--out-dir", str(tmp_path / "o")])
    assert rc == 0
    out = capsys.readouterr().out
    rows = dict(line.split(None, 1) for line in out.splitlines()
                if line and not line.startswith(("#", "{")))
    assert rows["n"] == str(len(files))
    assert rows["c"] == "0"
