"""Constrained argument erasure.

Starting from the full erasure (every argument position of every
predicate), positions are removed until every remaining pair (p, k)
satisfies, in every clause with head p(X1,...,Xn) :- c, G:

  (i)   the k-th head argument is a variable X_k and
        ``forall X_k . exists (vars(c) minus X_k) . c`` holds;
  (ii)  X_k is not constrained-to any other variable of the head;
  (iii) X_k is not constrained-to any variable of the erased body G|_E,
        does not itself occur in G|_E, and does not occur at any other
        head argument position.

The occurrence checks in (iii) go beyond the constrained-to relation: a
variable flowing unguarded into a surviving body position, or duplicated
across head positions, carries information the erased program would lose.
Removals only expose more body positions, so the set shrinks monotonically
to a greatest fixpoint that is independent of scan order.  Erasing a
position under these conditions leaves membership of every surviving-atom
projection unchanged, in particular the query verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import TriState, constrained_to, forall_exists_valid
from .syntax import QUERY, Atom, Clause, Const, Constraint, Program, Var

Pair = tuple[str, int]
Erasure = frozenset[Pair]

CONDITIONS = ("i-not-variable", "i-forall-exists", "ii-head-constrained",
              "iii-body-constrained")


@dataclass(frozen=True)
class Violation:
    pair: Pair
    clause_index: int
    condition: str  # one of CONDITIONS
    detail: str = ""


def full_erasure(prog: Program) -> Erasure:
    """Every (predicate, position) pair in the program; query excluded by
    virtue of being nullary."""
    return frozenset((pred, k) for pred, arity in prog.arities.items()
                     for k in range(1, arity + 1))


def erase_atom(atom: Atom, e: Erasure, names: dict[str, str] | None = None) -> Atom:
    """Drop the atom's erased argument positions; rename its predicate via
    ``names`` when given (predicates with erased positions get new names so
    the reduced-arity symbol cannot collide with a surviving one)."""
    args = tuple(t for k, t in enumerate(atom.args, start=1)
                 if (atom.pred, k) not in e)
    pred = atom.pred
    if names and len(args) != len(atom.args):
        pred = names.get(atom.pred, atom.pred)
    return Atom(pred, args)


def erased_names(prog: Program, e: Erasure, rename: bool = True) -> dict[str, str]:
    """Fresh names for predicates with at least one erased position:
    p with positions {1,3} erased becomes p__1_3 (suffixing underscores on
    collision).  With rename disabled every predicate keeps its name."""
    names: dict[str, str] = {}
    if not rename:
        return names
    taken = set(prog.arities)
    for pred in prog.predicates():
        positions = sorted(k for (p, k) in e if p == pred)
        if not positions:
            continue
        candidate = pred + "__" + "_".join(str(k) for k in positions)
        while candidate in taken:
            candidate += "_"
        names[pred] = candidate
        taken.add(candidate)
    return names


def check_pair(pair: Pair, e: Erasure, prog: Program) -> Violation | None:
    """First violation of the erasability conditions for ``pair`` under the
    candidate erasure ``e``, scanning clauses in program order and the
    conditions in their numbered order; None when the pair is safe."""
    pred, k = pair
    for index, clause in enumerate(prog.clauses):
        if clause.head.pred != pred:
            continue
        violation = _check_clause(pair, e, clause, index)
        if violation is not None:
            return violation
    return None


def _check_clause(pair: Pair, e: Erasure, clause: Clause,
                  index: int) -> Violation | None:
    pred, k = pair
    term = clause.head.args[k - 1]
    if isinstance(term, Const):
        return Violation(pair, index, "i-not-variable",
                         f"head argument {k} is the constant {term.value}")
    x = term.name
    c = clause.constraint
    if forall_exists_valid(x, c) is not TriState.HOLDS:
        return Violation(pair, index, "i-forall-exists",
                         f"forall {x} . exists rest . {c if c.conjuncts else 'true'} "
                         f"not validated")
    for other in clause.head.args:
        if isinstance(other, Var) and other.name != x \
                and constrained_to(x, other.name, c):
            return Violation(pair, index, "ii-head-constrained",
                             f"{x} is constrained to head variable {other.name}")
    for j, other in enumerate(clause.head.args, start=1):
        if j != k and isinstance(other, Var) and other.name == x:
            return Violation(pair, index, "iii-body-constrained",
                             f"{x} also occurs at head position {j}")
    for atom in clause.body:
        for pos, t in enumerate(atom.args, start=1):
            if (atom.pred, pos) in e or not isinstance(t, Var):
                continue
            if t.name == x:
                return Violation(pair, index, "iii-body-constrained",
                                 f"{x} occurs at surviving position {pos} "
                                 f"of {atom.pred}")
            if constrained_to(x, t.name, c):
                return Violation(pair, index, "iii-body-constrained",
                                 f"{x} is constrained to {t.name} at surviving "
                                 f"position {pos} of {atom.pred}")
    return None


@dataclass
class CfarReport:
    pairs_initial: int = 0
    pairs_kept: int = 0
    removals: int = 0
    removals_by_condition: dict = field(default_factory=dict)
    args_before: int = 0
    args_after: int = 0
    renamed: dict = field(default_factory=dict)
    erasure: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pairs_initial": self.pairs_initial,
            "pairs_kept": self.pairs_kept,
            "removals": self.removals,
            "removals_by_condition": self.removals_by_condition,
            "args_before": self.args_before,
            "args_after": self.args_after,
            "renamed": self.renamed,
            "erasure": self.erasure,
        }

    def text(self) -> str:
        lines = [
            f"candidate pairs: {self.pairs_initial}",
            f"removed: {self.removals}",
        ]
        for condition in CONDITIONS:
            count = self.removals_by_condition.get(condition, 0)
            if count:
                lines.append(f"  by {condition}: {count}")
        lines.append(f"erased: {self.pairs_kept}")
        lines += [f"  {line}" for line in self.erasure]
        for old, new in self.renamed.items():
            lines.append(f"renamed: {old} -> {new}")
        lines.append(f"arguments: {self.args_before} -> {self.args_after}")
        return "\n".join(lines)


def erasure_lines(e: Erasure, arities: dict[str, int]) -> list[str]:
    """Serialize as one ``p/arity k`` line per pair, sorted."""
    return [f"{pred}/{arities[pred]} {k}" for pred, k in sorted(e)]


def parse_erasure_lines(lines: "list[str]") -> Erasure:
    pairs = []
    for line in lines:
        if not line.strip():
            continue
        head, k = line.split()
        pred = head.split("/")[0]
        pairs.append((pred, int(k)))
    return frozenset(pairs)


def cfar_transform(prog: Program,
                   rename: bool = True) -> tuple[Program, Erasure, CfarReport]:
    """Greatest safe erasure of ``prog`` and the erased program.

    The candidate set starts full and loses violating pairs until a full
    pass removes nothing; a removal can expose body occurrences for other
    pairs, hence the repeated passes.
    """
    problems = prog.validate()
    if problems:
        raise ValueError("invalid program: " + "; ".join(problems))
    e = set(full_erasure(prog))
    report = CfarReport(pairs_initial=len(e), args_before=prog.total_args())

    changed = True
    while changed:
        changed = False
        for pair in sorted(e):
            violation = check_pair(pair, frozenset(e), prog)
            if violation is not None:
                e.discard(pair)
                report.removals += 1
                by = report.removals_by_condition
                by[violation.condition] = by.get(violation.condition, 0) + 1
                changed = True

    erasure = frozenset(e)
    names = erased_names(prog, erasure, rename=rename)
    out = Program(tuple(
        Clause(erase_atom(c.head, erasure, names), c.constraint,
               tuple(erase_atom(a, erasure, names) for a in c.body))
        for c in prog.clauses))
    problems = out.validate()
    if problems:
        raise RuntimeError("erased program invalid: " + "; ".join(problems))

    report.pairs_kept = len(erasure)
    report.erasure = erasure_lines(erasure, prog.arities)
    report.renamed = dict(sorted(names.items()))
    report.args_after = out.total_args()
    return out, erasure, report


def verify_safe_erasure(prog: Program, e: Erasure) -> list[Violation]:
    """Re-validate every erased pair against the original program,
    written as a direct restatement of the erasability conditions rather
    than through the fixpoint machinery.  Returns all violations found;
    an empty list certifies the erasure."""
    violations: list[Violation] = []
    for index, clause in enumerate(prog.clauses):
        head = clause.head
        c = clause.constraint
        surviving_body_vars: set[str] = set()
        for atom in clause.body:
            for pos, t in enumerate(atom.args, start=1):
                if (atom.pred, pos) not in e and isinstance(t, Var):
                    surviving_body_vars.add(t.name)
        for k in range(1, head.arity + 1):
            pair = (head.pred, k)
            if pair not in e:
                continue
            term = head.args[k - 1]
            if not isinstance(term, Var):
                violations.append(Violation(pair, index, "i-not-variable"))
                continue
            x = term.name
            if forall_exists_valid(x, c) is not TriState.HOLDS:
                violations.append(Violation(pair, index, "i-forall-exists"))
            head_vars = {t.name for t in head.args
                         if isinstance(t, Var) and t.name != x}
            if any(constrained_to(x, y, c) for y in head_vars):
                violations.append(Violation(pair, index, "ii-head-constrained"))
            occurrences = sum(1 for t in head.args
                              if isinstance(t, Var) and t.name == x)
            if (occurrences > 1 or x in surviving_body_vars
                    or any(constrained_to(x, y, c) for y in surviving_body_vars)):
                violations.append(Violation(pair, index, "iii-body-constrained"))
    return violations
