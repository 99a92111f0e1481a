"""Shared fixtures: the counter worked example at each stage of the
pipeline, and fake solver scripts for exercising the harness without a
real HORN solver installed."""

import sys
import textwrap

import pytest

from chcslim import parse_program

P1_TEXT = textwrap.dedent("""\
    unsafe :- X1>=0, Y2=<0, newp1(X1,Y1,X2,Y2).
    newp1(X1,Y1,X2,Z2) :- Z1=X1+1, newp2(X1,Y1,Z1,X2,Y2,Z2).
    newp2(X1,Y1,Z1,X2,Y2,Z2) :- Z1=<9, Z3=Z1+1, newp2(X1,Y1,Z3,X2,Y2,Z2).
    newp2(X1,Y1,Z1,X1,Y1,Z1) :- Z1>=10.
    """)

P2_TEXT = textwrap.dedent("""\
    unsafe :- X1>=0, Y2=<0, newp3(X1,Y2).
    newp3(X1,Z2) :- Z1=X1+1, newp4(X1,Z1,Z2).
    newp4(X1,Z1,Z2) :- Z1=<9, Z3=Z1+1, newp4(X1,Z3,Z2).
    newp4(X1,Z1,Z1) :- Z1>=10.
    """)

P3_TEXT = textwrap.dedent("""\
    unsafe :- X1>=0, Y2=<0, newp3(X1,Y2).
    newp3(X1,Z2) :- Z1=X1+1, newp4(Z1,Z2).
    newp4(Z1,Z2) :- Z1=<9, Z3=Z1+1, newp4(Z3,Z2).
    newp4(Z1,Z1) :- Z1>=10.
    """)


@pytest.fixture
def counter_p1():
    return parse_program(P1_TEXT)


@pytest.fixture
def counter_p2():
    return parse_program(P2_TEXT)


@pytest.fixture
def counter_p3():
    return parse_program(P3_TEXT)


acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)


SOLVER_BODIES = {
    "sat": 'print("sat")',
    "unsat": 'print("unsat")',
    "garbage": 'print("flibber jabber")',
    "empty": 'pass',
    "crash": 'import sys; sys.exit(3)',
    "sleep": 'import time; time.sleep(30); print("sat")',
}


@pytest.fixture
def fake_solver(tmp_path):
    """Factory returning a solver command template with the given canned
    behavior; the script receives the problem file as its argument."""

    def make(behavior):
        script = tmp_path / f"solver_{behavior}.py"
        script.write_text("import sys\n" + SOLVER_BODIES[behavior] + "\n")
        return f"{sys.executable} {script} {{file}}"

    return make
