"""Core syntax for dependently sorted algebraic theories.

Terms are first-order trees (variables and operation applications); there
are no binders inside terms, so simultaneous substitution is capture-free
by construction.  Variables are positional: ``Var(i)`` refers to the i-th
entry of the ambient context (a telescope), which makes alpha-equivalence
structural equality.  Surface names are kept alongside for diagnostics
only and never influence equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Var:
    index: int

    def __repr__(self):
        return f"Var({self.index})"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __repr__(self):
        if not self.args:
            return f"App({self.op!r})"
        return f"App({self.op!r}, {list(self.args)!r})"


Term = Union[Var, App]


@dataclass(frozen=True)
class SortExpr:
    head: str
    args: tuple[Term, ...] = ()


def term_vars(t: Term) -> set[int]:
    if isinstance(t, Var):
        return {t.index}
    out: set[int] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    if not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def subst_term(t: Term, terms: tuple[Term, ...]) -> Term:
    """Simultaneous substitution: replace Var(i) by terms[i]."""
    if isinstance(t, Var):
        return terms[t.index]
    if not t.args:
        return t
    return App(t.op, tuple(subst_term(a, terms) for a in t.args))


def subst_sort(s: SortExpr, terms: tuple[Term, ...]) -> SortExpr:
    return SortExpr(s.head, tuple(subst_term(a, terms) for a in s.args))


def shift_term(t: Term, by: int) -> Term:
    """Weakening: shift all variable indices up by `by`."""
    if isinstance(t, Var):
        return Var(t.index + by)
    if not t.args:
        return t
    return App(t.op, tuple(shift_term(a, by) for a in t.args))


def shift_sort(s: SortExpr, by: int) -> SortExpr:
    return SortExpr(s.head, tuple(shift_term(a, by) for a in s.args))


@dataclass(frozen=True)
class Context:
    """A telescope: entry i's sort may mention only Var(j) for j < i."""

    names: tuple[str, ...] = ()
    sorts: tuple[SortExpr, ...] = ()

    def __len__(self):
        return len(self.sorts)

    def __iter__(self) -> Iterator[tuple[str, SortExpr]]:
        return iter(zip(self.names, self.sorts))

    def extend(self, name: str, sort: SortExpr) -> "Context":
        return Context(self.names + (name,), self.sorts + (sort,))

    def vars(self) -> tuple[Term, ...]:
        return tuple(Var(i) for i in range(len(self.sorts)))

    def telescope_ok(self) -> bool:
        for i, s in enumerate(self.sorts):
            for a in s.args:
                if any(v >= i for v in term_vars(a)):
                    return False
        return True


EMPTY_CONTEXT = Context()


# ---------------------------------------------------------------------------
# Axioms and theories


@dataclass(frozen=True)
class SortDecl:
    name: str
    context: Context
    line: int = 0


@dataclass(frozen=True)
class OpDecl:
    name: str
    context: Context
    result: SortExpr
    line: int = 0


@dataclass(frozen=True)
class EqDecl:
    """A term-equation axiom; `sides` is a chain t0 = t1 = ... (len >= 2)."""

    name: str
    context: Context
    sides: tuple[Term, ...]
    line: int = 0


@dataclass(frozen=True)
class SortEqDecl:
    name: str
    context: Context
    lhs: SortExpr
    rhs: SortExpr
    line: int = 0


Axiom = Union[SortDecl, OpDecl, EqDecl, SortEqDecl]


@dataclass(frozen=True)
class Theory:
    name: str
    axioms: tuple[Axiom, ...] = ()

    def counts(self) -> dict[str, int]:
        c = {"sorts": 0, "ops": 0, "eqs": 0, "sort_eqs": 0}
        for ax in self.axioms:
            if isinstance(ax, SortDecl):
                c["sorts"] += 1
            elif isinstance(ax, OpDecl):
                c["ops"] += 1
            elif isinstance(ax, EqDecl):
                c["eqs"] += 1
            else:
                c["sort_eqs"] += 1
        return c


# ---------------------------------------------------------------------------
# Judgments

@dataclass(frozen=True)
class SortJudgment:
    context: Context
    sort: SortExpr


@dataclass(frozen=True)
class TermJudgment:
    context: Context
    term: Term
    sort: SortExpr


@dataclass(frozen=True)
class EqJudgment:
    context: Context
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class SortEqJudgment:
    context: Context
    lhs: SortExpr
    rhs: SortExpr


Judgment = Union[SortJudgment, TermJudgment, EqJudgment, SortEqJudgment]


# ---------------------------------------------------------------------------
# Substitutions

class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class Substitution:
    """A list of source-context terms, one per target-context entry.

    Categorically an arrow source -> target of the syntactic category.
    """

    source: Context
    target: Context
    terms: tuple[Term, ...]

    def __post_init__(self):
        if len(self.terms) != len(self.target):
            raise SubstitutionError(
                f"substitution has {len(self.terms)} terms for a target of "
                f"length {len(self.target)}"
            )
        n = len(self.source)
        for t in self.terms:
            for v in term_vars(t):
                if v >= n:
                    raise SubstitutionError(
                        f"term {t} mentions Var({v}) outside the source context"
                    )

    def apply_term(self, t: Term) -> Term:
        return subst_term(t, self.terms)

    def apply_sort(self, s: SortExpr) -> SortExpr:
        return subst_sort(s, self.terms)


def identity_subst(ctx: Context) -> Substitution:
    return Substitution(ctx, ctx, ctx.vars())


def compose_subst(s2: Substitution, s1: Substitution) -> Substitution:
    """The substitution s2 after s1 (s1: G -> D, s2: D -> T gives G -> T).

    Contexts are compared structurally here; the checker exposes a variant
    that compares them up to derivable equality.
    """
    if s1.target.sorts != s2.source.sorts:
        raise SubstitutionError("compose_subst: s1.target != s2.source")
    return Substitution(s1.source, s2.target, tuple(s1.apply_term(t) for t in s2.terms))


def substitute(j: Judgment, s: Substitution) -> Judgment:
    """Apply a substitution to a judgment formed in s.target."""
    if isinstance(j, SortJudgment):
        if j.context.sorts != s.target.sorts:
            raise SubstitutionError("judgment context does not match substitution target")
        return SortJudgment(s.source, s.apply_sort(j.sort))
    if isinstance(j, TermJudgment):
        if j.context.sorts != s.target.sorts:
            raise SubstitutionError("judgment context does not match substitution target")
        return TermJudgment(s.source, s.apply_term(j.term), s.apply_sort(j.sort))
    if isinstance(j, EqJudgment):
        if j.context.sorts != s.target.sorts:
            raise SubstitutionError("judgment context does not match substitution target")
        return EqJudgment(s.source, s.apply_term(j.lhs), s.apply_term(j.rhs))
    if isinstance(j, SortEqJudgment):
        if j.context.sorts != s.target.sorts:
            raise SubstitutionError("judgment context does not match substitution target")
        return SortEqJudgment(s.source, s.apply_sort(j.lhs), s.apply_sort(j.rhs))
    raise TypeError(f"not a judgment: {j!r}")


# ---------------------------------------------------------------------------
# Budgets

@dataclass(frozen=True)
class EqBudget:
    """Bounds for the derivable-equality search."""

    max_steps: int = 400
    max_depth: int = 8

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_depth <= 0:
            raise ValueError("budget bounds must be positive")


DEFAULT_BUDGET = EqBudget()


# ---------------------------------------------------------------------------
# Pretty printing (diagnostics only)

def show_term(t: Term, names: tuple[str, ...]) -> str:
    if isinstance(t, Var):
        if t.index < len(names):
            return names[t.index]
        return f"#{t.index}"
    if not t.args:
        return t.op
    return f"{t.op}({', '.join(show_term(a, names) for a in t.args)})"


def show_sort(s: SortExpr, names: tuple[str, ...]) -> str:
    if not s.args:
        return s.head
    return f"{s.head}({', '.join(show_term(a, names) for a in s.args)})"


def show_context(ctx: Context) -> str:
    parts = []
    for i, (n, s) in enumerate(ctx):
        parts.append(f"{n}: {show_sort(s, ctx.names[:i])}")
    return ", ".join(parts)
