"""Bounded bottom-up evaluation of clause programs.

Facts are computed semi-naively over the finite domain [-B, B]: each round
grounds every clause with at least one body atom matched against the facts
new in the previous round.  Constraint variables are enumerated lazily,
conjunct by conjunct, narrowing each variable through the conjuncts where
it is the last unbound one.

The ``clipped`` flag records possible incompleteness with respect to the
unbounded least model: it is set when a satisfying assignment touches the
domain edge, when a derived fact carries a value at or beyond it, or when a
variable's feasible interval had to be truncated to fit the domain.  An
unclipped run is exact, so the query verdict can be trusted; a clipped one
only certifies derivations, not their absence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import TriState
from .syntax import QUERY, Atom, Clause, Const, Program, RelCon, Var


class EvalError(Exception):
    pass


class EvalBudgetError(EvalError):
    pass


@dataclass
class BoundedModel:
    facts: dict[str, set[tuple[int, ...]]]
    clipped: bool
    bound: int
    rounds: int

    def derived(self, pred: str = QUERY) -> bool:
        return bool(self.facts.get(pred))

    def size(self) -> int:
        return sum(len(s) for s in self.facts.values())


class _State:
    __slots__ = ("steps", "budget", "clipped", "bound")

    def __init__(self, budget: int, bound: int):
        self.steps = 0
        self.budget = budget
        self.clipped = False
        self.bound = bound

    def tick(self, cost: int = 1) -> None:
        self.steps += cost
        if self.steps > self.budget:
            raise EvalBudgetError(f"evaluation exceeded {self.budget} steps")


def bounded_least_model(prog: Program, bound: int = 32, *,
                        budget: int = 2_000_000,
                        until_query: bool = False) -> BoundedModel:
    """Least model of ``prog`` over [-bound, bound].

    With ``until_query`` the fixpoint stops as soon as the query is
    derived (the returned model may then be partial, but a derivation is a
    derivation).  Raises EvalError on array constraints and
    EvalBudgetError when grounding work exceeds ``budget`` steps.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    problems = prog.validate()
    if problems:
        raise EvalError("invalid program: " + "; ".join(problems))
    for i, clause in enumerate(prog.clauses):
        if clause.constraint.has_arrays():
            raise EvalError(f"clause {i}: array constraints are not evaluable")

    state = _State(budget, bound)
    facts: dict[str, set[tuple[int, ...]]] = {p: set() for p in prog.arities}

    base = [c for c in prog.clauses if not c.body]
    recursive = [c for c in prog.clauses if c.body]

    delta: dict[str, set[tuple[int, ...]]] = {p: set() for p in prog.arities}
    for clause in base:
        for fact in _ground(clause, facts, None, None, state):
            if fact not in facts[clause.head.pred]:
                facts[clause.head.pred].add(fact)
                delta[clause.head.pred].add(fact)
    rounds = 0
    while any(delta.values()):
        rounds += 1
        if until_query and facts.get(QUERY):
            break
        new_delta: dict[str, set[tuple[int, ...]]] = {p: set() for p in prog.arities}
        for clause in recursive:
            for i, atom in enumerate(clause.body):
                if not delta[atom.pred]:
                    continue
                for fact in _ground(clause, facts, i, delta, state):
                    pred = clause.head.pred
                    if fact not in facts[pred] and fact not in new_delta[pred]:
                        new_delta[pred].add(fact)
        for pred, new in new_delta.items():
            facts[pred] |= new
        delta = new_delta
    return BoundedModel(facts, state.clipped, bound, rounds)


def derives_unsafe(prog: Program, bound: int = 32, *,
                   budget: int = 2_000_000) -> TriState:
    """Tri-state query verdict: holds when the query is derived (sound even
    when clipped), fails when it is not and the run was exact, unknown when
    absence might be an artifact of the bound."""
    model = bounded_least_model(prog, bound, budget=budget, until_query=True)
    if model.derived():
        return TriState.HOLDS
    if model.clipped:
        return TriState.UNKNOWN
    return TriState.FAILS


def _ground(clause: Clause, facts: dict, delta_index: int | None,
            delta: dict | None, state: _State):
    """Yield head tuples for every satisfying clause instantiation; the
    atom at delta_index (when given) matches only last-round facts."""
    conjuncts = [c for c in clause.constraint.conjuncts if isinstance(c, RelCon)]
    assignment: dict[str, int] = {}

    atoms = list(enumerate(clause.body))
    if delta_index is not None:
        atoms.sort(key=lambda pair: pair[0] != delta_index)

    def check_ready(pending: list[RelCon]) -> "list[RelCon] | None":
        remaining = []
        for con in pending:
            if con.vars() <= assignment.keys():
                state.tick()
                if not con.holds_for(assignment):
                    return None
            else:
                remaining.append(con)
        return remaining

    def match_atoms(todo: list, pending: list[RelCon]):
        if not todo:
            yield from enumerate_vars(pending)
            return
        # most-bound atom first keeps the join narrow
        todo = sorted(todo, key=lambda pair: _unbound_count(pair[1], assignment))
        (index, atom), rest = todo[0], todo[1:]
        source = delta[atom.pred] if (delta is not None and index == delta_index) \
            else facts[atom.pred]
        for fact in source:
            state.tick()
            bound_here: list[str] = []
            ok = True
            for t, value in zip(atom.args, fact):
                if isinstance(t, Const):
                    if t.value != value:
                        ok = False
                        break
                elif t.name in assignment:
                    if assignment[t.name] != value:
                        ok = False
                        break
                else:
                    assignment[t.name] = value
                    bound_here.append(t.name)
            if ok:
                after = check_ready(pending)
                if after is not None:
                    yield from match_atoms(rest, after)
            for name in bound_here:
                del assignment[name]

    def enumerate_vars(pending: list[RelCon]):
        unbound: dict[str, None] = {}
        for name in clause.vars():
            if name not in assignment:
                unbound.setdefault(name)
        if not unbound:
            if not pending:
                yield _head_tuple()
            return
        name, lo, hi = _choose_var(list(unbound), pending)
        for value in range(lo, hi + 1):
            state.tick()
            assignment[name] = value
            after = check_ready(pending)
            if after is not None:
                yield from enumerate_vars(after)
            del assignment[name]

    def _choose_var(names: list[str], pending: list[RelCon]) -> tuple[str, int, int]:
        best: tuple[int, str, int, int, bool] | None = None
        for name in names:
            interval = _interval_for(name, pending)
            if interval is None:
                continue
            lo, hi, truncated = interval
            width = hi - lo
            if best is None or width < best[0]:
                best = (width, name, lo, hi, truncated)
        if best is None:
            # no conjunct pins any variable down; take the first in clause
            # order over the whole domain
            name = names[0]
            return name, -state.bound, state.bound
        _, name, lo, hi, truncated = best
        if truncated:
            state.clipped = True
        return name, lo, hi

    def _interval_for(name: str, pending: list[RelCon]) -> tuple[int, int, bool] | None:
        lo: "int | None" = None
        hi: "int | None" = None
        usable = False
        for con in pending:
            missing = con.vars() - assignment.keys()
            if missing != {name}:
                continue
            diff = con.lhs.sub(con.rhs)
            a = diff.coeff(name)
            if a == 0:
                continue
            usable = True
            rest = diff.const + sum(c * assignment[n] for n, c in diff.terms
                                    if n != name)
            # a*name + rest  REL  0
            if con.rel == "=":
                if rest % a != 0:
                    return (1, 0, False)  # empty interval
                v = -rest // a
                lo = v if lo is None else max(lo, v)
                hi = v if hi is None else min(hi, v)
                continue
            shift = 0
            rel = con.rel
            if rel == "<":
                rel, shift = "=<", -1
            elif rel == ">":
                rel, shift = ">=", 1
            target = -rest + shift
            if (rel == "=<") == (a > 0):
                v = _floor_div(target, a)
                hi = v if hi is None else min(hi, v)
            else:
                v = _ceil_div(target, a)
                lo = v if lo is None else max(lo, v)
        if not usable:
            return None
        # values lost to the domain cut only matter when the raw interval
        # actually contains some of them
        nonempty = lo is None or hi is None or lo <= hi
        spills = (lo is None or lo < -state.bound) or (hi is None or hi > state.bound)
        truncated = nonempty and spills
        lo = -state.bound if lo is None else max(lo, -state.bound)
        hi = state.bound if hi is None else min(hi, state.bound)
        return lo, hi, truncated

    def _head_tuple() -> tuple[int, ...]:
        values = []
        touched = any(abs(v) == state.bound for v in assignment.values())
        for t in clause.head.args:
            v = t.value if isinstance(t, Const) else assignment[t.name]
            values.append(v)
            if abs(v) >= state.bound:
                touched = True
        if touched:
            state.clipped = True
        return tuple(values)

    initial = check_ready(conjuncts)
    if initial is not None:
        yield from match_atoms(atoms, initial)


def _unbound_count(atom: Atom, assignment: dict) -> int:
    return sum(1 for t in atom.args
               if isinstance(t, Var) and t.name not in assignment)


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)