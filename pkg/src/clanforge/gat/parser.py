"""Line-oriented parser for the theory DSL.

Grammar (one axiom per line, ``#`` starts a comment):

    theory <name>
    sort <Name>(<var>: <SortExpr>, ...)
    op <name>(<telescope>) : <SortExpr>
    eq <name>(<telescope>) : <term> = <term> [= <term> ...]
    sorteq <name>(<telescope>) : <SortExpr> = <SortExpr>

A telescope entry is ``<var>: <SortExpr>``; whitespace within a line is
insignificant.  Equation chains keep all sides in a single axiom so that a
chained law counts as one equation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    App,
    Context,
    EqDecl,
    OpDecl,
    SortDecl,
    SortEqDecl,
    SortExpr,
    Term,
    Theory,
    Var,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


_TOKEN_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_']*|[(),:=]|\S)")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")

_KEYWORDS = {"theory", "sort", "op", "eq", "sorteq"}


@dataclass
class _Tok:
    text: str
    column: int


class _Line:
    def __init__(self, tokens: list[_Tok], line_no: int):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].text
        return None

    def next(self) -> _Tok:
        if self.pos >= len(self.tokens):
            raise ParseError("unexpected end of line", self.line_no,
                             self.tokens[-1].column + 1 if self.tokens else 0)
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", self.line_no, t.column)
        return t

    def ident(self) -> _Tok:
        t = self.next()
        if not _IDENT_RE.match(t.text):
            raise ParseError(f"expected an identifier, found {t.text!r}", self.line_no, t.column)
        return t

    def done(self):
        if self.pos != len(self.tokens):
            t = self.tokens[self.pos]
            raise ParseError(f"unexpected trailing token {t.text!r}", self.line_no, t.column)


def _tokenize_line(text: str, line_no: int) -> list[_Tok]:
    # strip comments first
    cut = text.find("#")
    if cut >= 0:
        text = text[:cut]
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            break
        tok = m.group(1)
        col = m.start(1) + 1
        if tok not in "(),:=" and not _IDENT_RE.match(tok):
            raise ParseError(f"bad token {tok!r}", line_no, col)
        toks.append(_Tok(tok, col))
        pos = m.end()
    return toks


def _parse_term(line: _Line, var_index: dict[str, int]) -> Term:
    t = line.ident()
    if line.peek() == "(":
        line.expect("(")
        args: list[Term] = []
        if line.peek() != ")":
            args.append(_parse_term(line, var_index))
            while line.peek() == ",":
                line.expect(",")
                args.append(_parse_term(line, var_index))
        line.expect(")")
        return App(t.text, tuple(args))
    if t.text in var_index:
        return Var(var_index[t.text])
    # a bare identifier that is not a variable is a nullary application
    return App(t.text, ())


def _parse_sort(line: _Line, var_index: dict[str, int]) -> SortExpr:
    t = line.ident()
    args: list[Term] = []
    if line.peek() == "(":
        line.expect("(")
        if line.peek() != ")":
            args.append(_parse_term(line, var_index))
            while line.peek() == ",":
                line.expect(",")
                args.append(_parse_term(line, var_index))
        line.expect(")")
    return SortExpr(t.text, tuple(args))


def _parse_telescope(line: _Line) -> tuple[Context, dict[str, int]]:
    line.expect("(")
    names: list[str] = []
    sorts: list[SortExpr] = []
    var_index: dict[str, int] = {}
    if line.peek() != ")":
        while True:
            v = line.ident()
            if v.text in var_index:
                raise ParseError(f"duplicate variable {v.text!r} in telescope",
                                 line.line_no, v.column)
            line.expect(":")
            s = _parse_sort(line, var_index)
            var_index[v.text] = len(names)
            names.append(v.text)
            sorts.append(s)
            if line.peek() == ",":
                line.expect(",")
                continue
            break
    line.expect(")")
    return Context(tuple(names), tuple(sorts)), var_index


def parse_theory(text: str) -> Theory:
    """Parse DSL source into a Theory, preserving axiom order.

    Raises ParseError with line/column info; duplicate axiom identifiers
    are rejected here (the checker re-validates everything else).
    """
    name = ""
    axioms = []
    seen_names: dict[str, int] = {}
    saw_theory = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, line_no)
        if not tokens:
            continue
        line = _Line(tokens, line_no)
        head = line.next()
        if head.text == "theory":
            if saw_theory:
                raise ParseError("duplicate theory header", line_no, head.column)
            name = line.ident().text
            line.done()
            saw_theory = True
            continue
        if head.text not in _KEYWORDS:
            raise ParseError(
                f"expected one of {sorted(_KEYWORDS)}, found {head.text!r}",
                line_no, head.column)
        ax_name_tok = line.ident()
        ax_name = ax_name_tok.text
        if ax_name in seen_names:
            raise ParseError(
                f"duplicate identifier {ax_name!r} (first declared on line "
                f"{seen_names[ax_name]})", line_no, ax_name_tok.column)
        ctx, var_index = _parse_telescope(line)
        if head.text == "sort":
            line.done()
            axioms.append(SortDecl(ax_name, ctx, line=line_no))
        elif head.text == "op":
            line.expect(":")
            result = _parse_sort(line, var_index)
            line.done()
            axioms.append(OpDecl(ax_name, ctx, result, line=line_no))
        elif head.text == "eq":
            line.expect(":")
            sides = [_parse_term(line, var_index)]
            while line.peek() == "=":
                line.expect("=")
                sides.append(_parse_term(line, var_index))
            line.done()
            if len(sides) < 2:
                raise ParseError("equation needs at least two sides", line_no,
                                 ax_name_tok.column)
            axioms.append(EqDecl(ax_name, ctx, tuple(sides), line=line_no))
        else:  # sorteq
            line.expect(":")
            lhs = _parse_sort(line, var_index)
            line.expect("=")
            rhs = _parse_sort(line, var_index)
            line.done()
            axioms.append(SortEqDecl(ax_name, ctx, lhs, rhs, line=line_no))
        seen_names[ax_name] = line_no
    return Theory(name, tuple(axioms))
