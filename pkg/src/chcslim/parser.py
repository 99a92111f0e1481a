"""Parser for Edinburgh-style .clp clause files.

Syntax accepted::

    % comment to end of line
    unsafe :- X1>=0, Y2=<0, newp1(X1,Y1,X2,Y2).
    newp1(X1,Y1,X2,Z2) :- Z1=X1+1, newp2(X1,Y1,Z1,X2,Y2,Z2).
    p(0).

Variables begin with an uppercase letter or underscore, predicates with a
lowercase letter; the only terms are variables and integer constants.
Relations are ``= < =< > >=`` (``<=`` is accepted as an alias of ``=<``).
``read(A,I,V)`` and ``write(A,I,V,B)`` in a body parse as array
pseudo-constraints, ``true`` as the empty constraint.  Constraints and atoms
may interleave; clauses are normalized to constraint-first form preserving
the relative order of each kind.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (ARRAY_KINDS, QUERY, ArrayCon, Atom, AtomicCon, Clause, Const,
                     Constraint, LinExpr, Program, RelCon, Term, Var)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<op>:-|=<|<=|>=|[=<>.,()*+-])
""", re.VERBOSE)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, bol = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - bol + 1)
        kind = m.lastgroup or ""
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, pos - bol + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            bol = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, len(text) - bol + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def here(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str) -> "ParseError":
        return ParseError(message, self.here.line, self.here.col)

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.here
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise self.fail(f"expected {want!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def at_op(self, text: str) -> bool:
        return self.here.kind == "op" and self.here.text == text

    # --- terms and expressions -------------------------------------------

    def parse_term(self) -> Term:
        tok = self.here
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        if tok.kind == "int":
            self.advance()
            return Const(int(tok.text))
        if self.at_op("-"):
            self.advance()
            value = self.expect("int")
            return Const(-int(value.text))
        raise self.fail(f"expected a variable or integer, found {tok.text!r}")

    def parse_linexpr(self) -> LinExpr:
        pairs: list[tuple[str, int]] = []
        const = 0
        sign = 1
        if self.at_op("-"):
            self.advance()
            sign = -1
        elif self.at_op("+"):
            self.advance()
        while True:
            tok = self.here
            if tok.kind == "int":
                self.advance()
                coeff = sign * int(tok.text)
                if self.at_op("*"):
                    self.advance()
                    var = self.expect("var")
                    pairs.append((var.text, coeff))
                else:
                    const += coeff
            elif tok.kind == "var":
                self.advance()
                coeff = sign
                if self.at_op("*"):
                    self.advance()
                    num = self.expect("int")
                    coeff *= int(num.text)
                pairs.append((tok.text, coeff))
            else:
                raise self.fail(f"expected a term, found {tok.text or 'end of input'!r}")
            if self.at_op("+"):
                self.advance()
                sign = 1
            elif self.at_op("-"):
                self.advance()
                sign = -1
            else:
                return LinExpr.make(pairs, const)

    def parse_relcon(self) -> RelCon:
        lhs = self.parse_linexpr()
        tok = self.here
        if tok.kind != "op" or tok.text not in ("=", "<", "=<", "<=", ">", ">="):
            raise self.fail(f"expected a relation, found {tok.text or 'end of input'!r}")
        self.advance()
        rel = "=<" if tok.text == "<=" else tok.text
        rhs = self.parse_linexpr()
        return RelCon(rel, lhs, rhs)

    # --- atoms and clauses ------------------------------------------------

    def parse_args(self) -> tuple[Term, ...]:
        self.expect("op", "(")
        args = [self.parse_term()]
        while self.at_op(","):
            self.advance()
            args.append(self.parse_term())
        self.expect("op", ")")
        return tuple(args)

    def parse_atom(self) -> Atom:
        name = self.expect("ident")
        if self.at_op("("):
            return Atom(name.text, self.parse_args())
        return Atom(name.text)

    def parse_body_item(self) -> "AtomicCon | Atom | None":
        tok = self.here
        if tok.kind == "ident":
            if tok.text == "true" and not self.tokens[self.pos + 1].text == "(":
                self.advance()
                return None
            if tok.text in ARRAY_KINDS and self.tokens[self.pos + 1].text == "(":
                self.advance()
                args = self.parse_args()
                if len(args) != ARRAY_KINDS[tok.text]:
                    raise ParseError(f"{tok.text} expects {ARRAY_KINDS[tok.text]} "
                                     f"arguments, got {len(args)}", tok.line, tok.col)
                return ArrayCon(tok.text, args)
            atom = self.parse_atom()
            if self.here.kind == "op" and self.here.text in ("=", "<", "=<", "<=", ">",
                                                             ">=", "+", "-", "*"):
                raise self.fail("compound terms are not supported")
            return atom
        return self.parse_relcon()

    def parse_clause(self) -> Clause:
        head_tok = self.here
        head = self.parse_atom()
        conjuncts: list[AtomicCon] = []
        body: list[Atom] = []
        if self.at_op(":-"):
            self.advance()
            while True:
                item = self.parse_body_item()
                if isinstance(item, Atom):
                    body.append(item)
                elif item is not None:
                    conjuncts.append(item)
                if self.at_op(","):
                    self.advance()
                else:
                    break
        self.expect("op", ".")
        if head.pred in ARRAY_KINDS:
            raise ParseError(f"{head.pred} is reserved for array constraints",
                             head_tok.line, head_tok.col)
        return Clause(head, Constraint(tuple(conjuncts)), tuple(body))

    def parse_program(self) -> Program:
        clauses: list[Clause] = []
        arities: dict[str, tuple[int, _Token]] = {}
        while self.here.kind != "eof":
            tok = self.here
            clause = self.parse_clause()
            for atom in (clause.head, *clause.body):
                known = arities.setdefault(atom.pred, (atom.arity, tok))
                if known[0] != atom.arity:
                    raise ParseError(
                        f"{atom.pred} used with arity {atom.arity}, previously "
                        f"{known[0]} (line {known[1].line})", tok.line, tok.col)
            for atom in clause.body:
                if atom.pred == QUERY:
                    raise ParseError(f"{QUERY} must be head-only", tok.line, tok.col)
            if clause.head.pred == QUERY and clause.head.arity != 0:
                raise ParseError(f"{QUERY} must be nullary", tok.line, tok.col)
            clauses.append(clause)
        return Program(tuple(clauses))


def parse_program(text: str) -> Program:
    return _Parser(text).parse_program()


def parse_constraint(text: str) -> Constraint:
    """Parse a comma-separated conjunction, e.g. ``"Z1=X1+1, Z1=<9"``."""
    parser = _Parser(text)
    conjuncts: list[AtomicCon] = []
    if parser.here.kind != "eof":
        while True:
            item = parser.parse_body_item()
            if isinstance(item, Atom):
                raise parser.fail(f"{item.pred} is not a constraint")
            if item is not None:
                conjuncts.append(item)
            if parser.at_op(","):
                parser.advance()
            else:
                break
    parser.expect("eof")
    return Constraint(tuple(conjuncts))


def parse_clause(text: str) -> Clause:
    """Parse a single clause, mainly a convenience for tests and the CLI."""
    parser = _Parser(text)
    clause = parser.parse_clause()
    parser.expect("eof")
    return clause
