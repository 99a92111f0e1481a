"""Batch harness: transform problems, emit artifacts, run a solver, report.

A pipeline run takes a list of ``.clp`` problems, applies the configured
transformation stages to each, writes the transformed program and its
SMT-LIB rendering next to each other in the output directory, and
optionally hands the SMT-LIB file to an external Horn solver.  Nothing
about a particular solver is assumed beyond a command template and the
convention that the first token on standard output is the status.

The report mirrors the usual benchmark-table shape: correct answers (c),
safe (s), unsafe (u), timeouts (to), problem count (n), per-stage times,
solving time (st), total time (tt) and average time per correct answer
(at).  Time rows sum over definitively answered problems only, so tt is
comparable with c and at = tt / c.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bounded import EvalError, derives_unsafe
from .cfar import cfar_transform
from .constraints import TriState
from .emit import SmtEmitError, emit_clp, emit_smtlib_horn
from .nlr import nlr_transform
from .parser import ParseError, parse_program
from .syntax import Program

STAGES = ("nlr", "cfar")
VERDICTS = ("sat", "unsat", "unknown", "timeout", "skipped")
TABLE_LABELS = ("c", "s", "u", "to", "n", "t_NLR", "t_cFAR", "st", "tt", "at")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    inputs: list[Path]
    out_dir: Path
    stages: tuple[str, ...] = STAGES
    solver_cmd: str | None = None
    timeout: float = 300.0
    bound: int | None = None
    eval_budget: int = 2_000_000

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("no input files")
        self.out_dir = Path(self.out_dir)
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        bad = [s for s in self.stages if s not in STAGES]
        if bad:
            raise ConfigError(f"unknown stages: {', '.join(bad)}")
        if len(set(self.stages)) != len(self.stages):
            raise ConfigError("duplicate stages")
        if self.solver_cmd is not None and "{file}" not in self.solver_cmd:
            raise ConfigError("solver command must contain the {file} placeholder")
        if self.bound is not None and self.bound < 1:
            raise ConfigError("bound must be positive")


@dataclass
class RunRecord:
    name: str
    stages: tuple[str, ...] = ()
    stage_times: dict[str, float] = field(default_factory=dict)
    verdict: str = "skipped"
    solve_time: float = 0.0
    classification: str = "undetermined"
    args_before: int | None = None
    args_after: int | None = None
    clauses_before: int | None = None
    clauses_after: int | None = None
    oracle: str | None = None
    cfar_second_erasure: int | None = None
    artifacts: list[str] = field(default_factory=list)
    error: str | None = None
    internal_error: str | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "stages": list(self.stages),
            "stage_times": {k: round(v, 6) for k, v in self.stage_times.items()},
            "verdict": self.verdict,
            "solve_time": round(self.solve_time, 6),
            "classification": self.classification,
            "args_before": self.args_before,
            "args_after": self.args_after,
            "clauses_before": self.clauses_before,
            "clauses_after": self.clauses_after,
            "oracle": self.oracle,
            "cfar_second_erasure": self.cfar_second_erasure,
            "artifacts": self.artifacts,
            "error": self.error,
            "internal_error": self.internal_error,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunRecord":
        rec = cls(data["name"])
        rec.stages = tuple(data.get("stages", ()))
        rec.stage_times = dict(data.get("stage_times", {}))
        rec.verdict = data.get("verdict", "skipped")
        rec.solve_time = float(data.get("solve_time", 0.0))
        rec.classification = data.get("classification",
                                      classification_for(rec.verdict))
        rec.args_before = data.get("args_before")
        rec.args_after = data.get("args_after")
        rec.clauses_before = data.get("clauses_before")
        rec.clauses_after = data.get("clauses_after")
        rec.oracle = data.get("oracle")
        rec.cfar_second_erasure = data.get("cfar_second_erasure")
        rec.artifacts = list(data.get("artifacts", []))
        rec.error = data.get("error")
        rec.internal_error = data.get("internal_error")
        return rec


def classification_for(verdict: str) -> str:
    # unsat clauses mean the unsafe query is derivable, sat means it is not
    return {"sat": "safe", "unsat": "unsafe"}.get(verdict, "undetermined")


def solve_external(smt_path: Path, command: str,
                   timeout: float) -> tuple[str, float]:
    """Run ``command`` (a shell-style template with ``{file}``) on the file
    and classify the first stdout token; returns (verdict, elapsed)."""
    if "{file}" not in command:
        raise ConfigError("solver command must contain the {file} placeholder")
    argv = [tok.replace("{file}", str(smt_path)) for tok in shlex.split(command)]
    start = time.perf_counter()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=timeout)
    except subprocess.TimeoutExpired:
        return "timeout", float(timeout)
    except OSError:
        return "skipped", 0.0
    elapsed = time.perf_counter() - start
    tokens = proc.stdout.split()
    token = tokens[0] if tokens else ""
    verdict = token if token in ("sat", "unsat") else "unknown"
    return verdict, elapsed


def run_pipeline(cfg: PipelineConfig) -> list[RunRecord]:
    """Process every input; per-problem failures are recorded, not raised."""
    cfg.validate()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for path in cfg.inputs:
        records.append(_run_one(Path(path), cfg))
    return records


def _run_one(path: Path, cfg: PipelineConfig) -> RunRecord:
    rec = RunRecord(path.stem, stages=tuple(cfg.stages))
    for stage in cfg.stages:
        rec.stage_times[stage] = 0.0
    try:
        text = path.read_text()
    except OSError as exc:
        rec.error = f"unreadable input: {exc}"
        return rec
    try:
        prog = parse_program(text)
    except ParseError as exc:
        rec.error = f"parse error: {exc}"
        return rec

    rec.args_before = prog.total_args()
    rec.clauses_before = len(prog.clauses)
    current = prog
    try:
        for stage in cfg.stages:
            start = time.perf_counter()
            if stage == "nlr":
                current, _ = nlr_transform(current)
            else:
                current, _, _ = cfar_transform(current)
            rec.stage_times[stage] = time.perf_counter() - start
            clp_path = cfg.out_dir / f"{rec.name}.{stage}.clp"
            clp_path.write_text(emit_clp(current))
            rec.artifacts.append(str(clp_path))
            problem = _recheck_artifact(clp_path)
            if problem:
                rec.internal_error = problem
                return rec
        if "cfar" in cfg.stages:
            _, second, _ = cfar_transform(current)
            rec.cfar_second_erasure = len(second)
        rec.args_after = current.total_args()
        rec.clauses_after = len(current.clauses)
    except Exception as exc:  # a transformation bug, not an input problem
        rec.internal_error = f"transform failed: {exc}"
        return rec

    try:
        smt_path = cfg.out_dir / f"{rec.name}.smt2"
        smt_path.write_text(emit_smtlib_horn(current, arrays=True))
        rec.artifacts.append(str(smt_path))
    except SmtEmitError as exc:
        rec.error = f"emit error: {exc}"
        return rec

    if cfg.solver_cmd is not None:
        rec.verdict, rec.solve_time = solve_external(smt_path, cfg.solver_cmd,
                                                     cfg.timeout)
    rec.classification = classification_for(rec.verdict)

    if cfg.bound is not None:
        rec.oracle = _oracle_verdict(current, cfg.bound, cfg.eval_budget)
        clash = _contradiction(rec.verdict, rec.oracle)
        if clash:
            rec.internal_error = clash
    return rec


def _recheck_artifact(path: Path) -> str | None:
    try:
        again = parse_program(path.read_text())
    except ParseError as exc:
        return f"artifact {path.name} does not re-parse: {exc}"
    problems = again.validate()
    if problems:
        return f"artifact {path.name} invalid: {'; '.join(problems)}"
    return None


def _oracle_verdict(prog: Program, bound: int, budget: int) -> str:
    try:
        result = derives_unsafe(prog, bound, budget=budget)
    except EvalError:
        return "unknown"
    return {TriState.HOLDS: "holds", TriState.FAILS: "fails",
            TriState.UNKNOWN: "unknown"}[result]


def _contradiction(verdict: str, oracle: str) -> str | None:
    # a derivation of unsafe makes the clauses unsat; an exact empty
    # query relation makes them sat
    if verdict == "sat" and oracle == "holds":
        return "oracle derives unsafe but solver reports sat"
    if verdict == "unsat" and oracle == "fails":
        return "oracle refutes unsafe exactly but solver reports unsat"
    return None


def invariant_failures(records: list[RunRecord]) -> list[str]:
    return [f"{r.name}: {r.internal_error}" for r in records if r.internal_error]


def report(records: list[RunRecord], *, json_lines: bool = True) -> str:
    """Fixed-label summary table, an idempotence note, then one JSON line
    per record and a JSON summary line."""
    s = sum(1 for r in records if r.verdict == "sat")
    u = sum(1 for r in records if r.verdict == "unsat")
    to = sum(1 for r in records if r.verdict == "timeout")
    c = s + u
    n = len(records)
    definitive = [r for r in records if r.verdict in ("sat", "unsat")]
    t_nlr = sum(r.stage_times.get("nlr", 0.0) for r in definitive)
    t_cfar = sum(r.stage_times.get("cfar", 0.0) for r in definitive)
    st = sum(r.solve_time for r in definitive)
    tt = t_nlr + t_cfar + st
    at = tt / c if c else None

    rows = [
        ("c", str(c)), ("s", str(s)), ("u", str(u)), ("to", str(to)),
        ("n", str(n)),
        ("t_NLR", f"{t_nlr:.3f}"), ("t_cFAR", f"{t_cfar:.3f}"),
        ("st", f"{st:.3f}"), ("tt", f"{tt:.3f}"),
        ("at", f"{at:.3f}" if at is not None else "--"),
    ]
    lines = [f"{label:<7}{value}" for label, value in rows]

    rerun = [r for r in records if r.cfar_second_erasure is not None]
    if rerun:
        nonempty = sum(1 for r in rerun if r.cfar_second_erasure)
        lines.append(f"# cfar re-run produced a non-empty erasure on "
                     f"{nonempty} of {len(rerun)} problems")
    if json_lines:
        for r in records:
            lines.append(json.dumps(r.to_json(), sort_keys=True))
        summary = {"c": c, "s": s, "u": u, "to": to, "n": n,
                   "t_NLR": round(t_nlr, 6), "t_cFAR": round(t_cfar, 6),
                   "st": round(st, 6), "tt": round(tt, 6),
                   "at": round(at, 6) if at is not None else None}
        lines.append(json.dumps({"summary": summary}, sort_keys=True))
    return "\n".join(lines) + "\n"


def parse_json_lines(text: str) -> list[RunRecord]:
    """Rebuild records from the JSON lines of a previous report."""
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("{"):
            continue
        data = json.loads(line)
        if "summary" in data:
            continue
        records.append(RunRecord.from_json(data))
    return records