"""Abstract syntax for constrained Horn clause programs.

A program is a list of clauses ``H :- c, A1, ..., An`` where H and the Ai are
atoms over integer-valued terms and c is a conjunction of linear arithmetic
constraints (plus opaque array pseudo-constraints).  The distinguished query
predicate is the nullary ``unsafe``; a program is safe when ``unsafe`` is not
in its least model.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

QUERY = "unsafe"

RELATIONS = ("=", "<", "=<", ">", ">=")

ARRAY_KINDS = {"read": 3, "write": 4}


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


Term = Var | Const


@dataclass(frozen=True)
class LinExpr:
    """Integer linear expression: sum of coeff*var pairs plus a constant.

    ``terms`` is normalized: first-occurrence order, no zero coefficients,
    each variable at most once.
    """

    terms: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def make(pairs: "list[tuple[str, int]] | tuple[tuple[str, int], ...]" = (),
             const: int = 0) -> "LinExpr":
        coeffs: dict[str, int] = {}
        for name, coeff in pairs:
            coeffs[name] = coeffs.get(name, 0) + coeff
        return LinExpr(tuple((n, c) for n, c in coeffs.items() if c != 0), const)

    @staticmethod
    def of(term: Term) -> "LinExpr":
        if isinstance(term, Var):
            return LinExpr(((term.name, 1),), 0)
        return LinExpr((), term.value)

    def vars(self) -> set[str]:
        return {name for name, _ in self.terms}

    def coeff(self, name: str) -> int:
        for n, c in self.terms:
            if n == name:
                return c
        return 0

    def sub(self, other: "LinExpr") -> "LinExpr":
        pairs = list(self.terms) + [(n, -c) for n, c in other.terms]
        return LinExpr.make(pairs, self.const - other.const)

    def subst(self, mapping: "dict[str, Term]") -> "LinExpr":
        pairs: list[tuple[str, int]] = []
        const = self.const
        for name, coeff in self.terms:
            image = mapping.get(name)
            if image is None:
                pairs.append((name, coeff))
            elif isinstance(image, Var):
                pairs.append((image.name, coeff))
            else:
                const += coeff * image.value
        return LinExpr.make(pairs, const)

    def eval(self, assignment: "dict[str, int]") -> int:
        return self.const + sum(c * assignment[n] for n, c in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return str(self.const)
        out = []
        for i, (name, coeff) in enumerate(self.terms):
            if coeff == 1:
                piece = name
            elif coeff == -1:
                piece = "-" + name
            else:
                piece = f"{coeff}*{name}"
            if i > 0 and not piece.startswith("-"):
                piece = "+" + piece
            out.append(piece)
        if self.const > 0:
            out.append(f"+{self.const}")
        elif self.const < 0:
            out.append(str(self.const))
        return "".join(out)


@dataclass(frozen=True)
class RelCon:
    """Atomic relational constraint ``lhs rel rhs`` with rel in RELATIONS."""

    rel: str
    lhs: LinExpr
    rhs: LinExpr

    def vars(self) -> set[str]:
        return self.lhs.vars() | self.rhs.vars()

    def subst(self, mapping: "dict[str, Term]") -> "RelCon":
        return RelCon(self.rel, self.lhs.subst(mapping), self.rhs.subst(mapping))

    def holds_for(self, assignment: "dict[str, int]") -> bool:
        a, b = self.lhs.eval(assignment), self.rhs.eval(assignment)
        return {"=": a == b, "<": a < b, "=<": a <= b, ">": a > b, ">=": a >= b}[self.rel]

    def __str__(self) -> str:
        return f"{self.lhs}{self.rel}{self.rhs}"


@dataclass(frozen=True)
class ArrayCon:
    """Opaque array pseudo-constraint: read(A,I,V) or write(A,I,V,B).

    Parsed and carried through transformations; the arithmetic oracle treats
    any constraint containing one conservatively.
    """

    kind: str
    args: tuple[Term, ...]

    def vars(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def subst(self, mapping: "dict[str, Term]") -> "ArrayCon":
        return ArrayCon(self.kind, tuple(_subst_term(t, mapping) for t in self.args))

    def __str__(self) -> str:
        return f"{self.kind}({','.join(str(a) for a in self.args)})"


AtomicCon = RelCon | ArrayCon


@dataclass(frozen=True)
class Constraint:
    """Conjunction of atomic constraints; empty conjunction is true."""

    conjuncts: tuple[AtomicCon, ...] = ()

    def vars(self) -> set[str]:
        out: set[str] = set()
        for con in self.conjuncts:
            out |= con.vars()
        return out

    def is_true(self) -> bool:
        return not self.conjuncts

    def has_arrays(self) -> bool:
        return any(isinstance(c, ArrayCon) for c in self.conjuncts)

    def subst(self, mapping: "dict[str, Term]") -> "Constraint":
        return Constraint(tuple(c.subst(mapping) for c in self.conjuncts))

    def __str__(self) -> str:
        return ", ".join(str(c) for c in self.conjuncts)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def vars(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}

    def subst(self, mapping: "dict[str, Term]") -> "Atom":
        return Atom(self.pred, tuple(_subst_term(t, mapping) for t in self.args))

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Atom
    constraint: Constraint = Constraint()
    body: tuple[Atom, ...] = ()

    def vars(self) -> list[str]:
        """Clause variables in first-occurrence order (head, constraint, body)."""
        seen: dict[str, None] = {}
        for t in self.head.args:
            if isinstance(t, Var):
                seen.setdefault(t.name, None)
        for con in self.constraint.conjuncts:
            if isinstance(con, RelCon):
                for name, _ in con.lhs.terms + con.rhs.terms:
                    seen.setdefault(name, None)
            else:
                for t in con.args:
                    if isinstance(t, Var):
                        seen.setdefault(t.name, None)
        for atom in self.body:
            for t in atom.args:
                if isinstance(t, Var):
                    seen.setdefault(t.name, None)
        return list(seen)

    def subst(self, mapping: "dict[str, Term]") -> "Clause":
        return Clause(self.head.subst(mapping), self.constraint.subst(mapping),
                      tuple(a.subst(mapping) for a in self.body))

    def __str__(self) -> str:
        items = [str(c) for c in self.constraint.conjuncts] + [str(a) for a in self.body]
        if not items:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(items)}."


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()

    @cached_property
    def arities(self) -> dict[str, int]:
        """Predicate -> arity over every head and body occurrence."""
        out: dict[str, int] = {}
        for atom in self.atoms():
            out.setdefault(atom.pred, atom.arity)
        return out

    def atoms(self):
        for clause in self.clauses:
            yield clause.head
            yield from clause.body

    def predicates(self) -> list[str]:
        """Predicates in first-occurrence order."""
        seen: dict[str, None] = {}
        for atom in self.atoms():
            seen.setdefault(atom.pred, None)
        return list(seen)

    def defined_predicates(self) -> set[str]:
        return {c.head.pred for c in self.clauses}

    def clauses_for(self, pred: str) -> list[Clause]:
        return [c for c in self.clauses if c.head.pred == pred]

    def total_args(self) -> int:
        """Sum of arities over non-query predicates."""
        return sum(a for p, a in self.arities.items() if p != QUERY)

    def validate(self) -> list[str]:
        """Arity consistency and query discipline; empty list means valid."""
        problems: list[str] = []
        arities: dict[str, int] = {}
        for i, clause in enumerate(self.clauses):
            for atom in (clause.head, *clause.body):
                known = arities.setdefault(atom.pred, atom.arity)
                if known != atom.arity:
                    problems.append(
                        f"clause {i}: {atom.pred} used with arity {atom.arity}, "
                        f"previously {known}")
            for atom in clause.body:
                if atom.pred == QUERY:
                    problems.append(f"clause {i}: {QUERY} must be head-only")
            for con in clause.constraint.conjuncts:
                if isinstance(con, ArrayCon) and len(con.args) != ARRAY_KINDS[con.kind]:
                    problems.append(f"clause {i}: {con.kind} expects "
                                    f"{ARRAY_KINDS[con.kind]} arguments")
        if arities.get(QUERY, 0) != 0:
            problems.append(f"{QUERY} must be nullary, got arity {arities[QUERY]}")
        return problems

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.clauses)


def _subst_term(term: Term, mapping: "dict[str, Term]") -> Term:
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    return term


def rename_clause(clause: Clause, renaming: "dict[str, str]") -> Clause:
    return clause.subst({old: Var(new) for old, new in renaming.items()})


def rename_apart(clause: Clause, taken: set[str]) -> tuple[Clause, dict[str, str]]:
    """Rename clause variables away from ``taken``, keeping names readable."""
    used = set(taken)
    renaming: dict[str, str] = {}
    for name in clause.vars():
        fresh = name
        i = 0
        while fresh in used:
            i += 1
            fresh = f"{name}_{i}"
        renaming[name] = fresh
        used.add(fresh)
    return rename_clause(clause, renaming), renaming


def variant_of(a: Atom, b: Atom) -> dict[str, str] | None:
    """Bijective variable renaming making a equal to b, or None.

    Constants must match exactly; the variable occurrence patterns must be
    isomorphic (same positions share a variable in a iff they do in b).
    """
    if a.pred != b.pred or a.arity != b.arity:
        return None
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}
    for ta, tb in zip(a.args, b.args):
        if isinstance(ta, Const) or isinstance(tb, Const):
            if ta != tb:
                return None
            continue
        if fwd.setdefault(ta.name, tb.name) != tb.name:
            return None
        if bwd.setdefault(tb.name, ta.name) != ta.name:
            return None
    return fwd


def atom_variant_key(atom: Atom) -> tuple:
    """Hashable key identifying the atom's class modulo variable renaming."""
    numbering: dict[str, int] = {}
    shape: list[object] = []
    for t in atom.args:
        if isinstance(t, Const):
            shape.append(("c", t.value))
        else:
            shape.append(numbering.setdefault(t.name, len(numbering)))
    return (atom.pred, tuple(shape))


def mgu_atoms(a: Atom, b: Atom) -> "dict[str, Term] | None":
    """Most general unifier of two atoms over variables and constants.

    With no compound terms this is plain union-find over argument pairs; the
    returned substitution is idempotent.
    """
    if a.pred != b.pred or a.arity != b.arity:
        return None
    parent: dict[str, str] = {}
    value: dict[str, int] = {}

    def find(name: str) -> str:
        root = name
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(name, name) != name:
            parent[name], name = root, parent[name]
        return root

    for ta, tb in zip(a.args, b.args):
        if isinstance(ta, Const) and isinstance(tb, Const):
            if ta.value != tb.value:
                return None
        elif isinstance(ta, Const):
            root = find(tb.name)
            if value.setdefault(root, ta.value) != ta.value:
                return None
        elif isinstance(tb, Const):
            root = find(ta.name)
            if value.setdefault(root, tb.value) != tb.value:
                return None
        else:
            ra, rb = find(ta.name), find(tb.name)
            if ra != rb:
                va, vb = value.get(ra), value.get(rb)
                if va is not None and vb is not None and va != vb:
                    return None
                parent[ra] = rb
                if va is not None:
                    value[rb] = va
    sub: dict[str, Term] = {}
    for name in set(parent) | set(value):
        root = find(name)
        sub[name] = Const(value[root]) if root in value else Var(root)
    return {n: t for n, t in sub.items() if not (isinstance(t, Var) and t.name == n)}


def clause_variant(a: Clause, b: Clause) -> bool:
    """Structural equality of two clauses modulo a variable renaming."""
    if a.head.pred != b.head.pred or len(a.body) != len(b.body):
        return False
    if len(a.constraint.conjuncts) != len(b.constraint.conjuncts):
        return False
    return _canonical_clause(a) == _canonical_clause(b)


def _canonical_clause(clause: Clause, pred_map: "dict[str, str] | None" = None) -> tuple:
    numbering: dict[str, int] = {}

    def num(name: str) -> int:
        return numbering.setdefault(name, len(numbering))

    def canon_term(t: Term):
        return ("c", t.value) if isinstance(t, Const) else ("v", num(t.name))

    def canon_expr(e: LinExpr):
        return (tuple((num(n), c) for n, c in e.terms), e.const)

    def canon_atom(a: Atom):
        pred = pred_map.get(a.pred, a.pred) if pred_map else a.pred
        return (pred, tuple(canon_term(t) for t in a.args))

    head = canon_atom(clause.head)
    cons = []
    for con in clause.constraint.conjuncts:
        if isinstance(con, RelCon):
            cons.append((con.rel, canon_expr(con.lhs), canon_expr(con.rhs)))
        else:
            cons.append((con.kind, tuple(canon_term(t) for t in con.args)))
    return (head, tuple(cons), tuple(canon_atom(a) for a in clause.body))


def programs_isomorphic(p: Program, q: Program) -> bool:
    """Clause-by-clause match under a predicate renaming plus per-clause
    variable renamings.  Clause order is significant; the predicate renaming
    is fixed incrementally by first use and must stay bijective."""
    if len(p.clauses) != len(q.clauses):
        return False
    fwd: dict[str, str] = {QUERY: QUERY}
    bwd: dict[str, str] = {QUERY: QUERY}
    for cp, cq in zip(p.clauses, q.clauses):
        for ap, aq in zip((cp.head, *cp.body), (cq.head, *cq.body)):
            if fwd.setdefault(ap.pred, aq.pred) != aq.pred:
                return False
            if bwd.setdefault(aq.pred, ap.pred) != ap.pred:
                return False
        if _canonical_clause(cp, fwd) != _canonical_clause(cq):
            return False
    return True


_NEWP_RE = re.compile(r"^newp(\d+)$")


def fresh_predicate_counter(program: Program) -> "itertools.count[int]":
    """Counter continuing after the largest existing newpN in the program."""
    top = 0
    for pred in program.arities:
        m = _NEWP_RE.match(pred)
        if m:
            top = max(top, int(m.group(1)))
    return itertools.count(top + 1)
