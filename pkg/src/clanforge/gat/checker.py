"""Well-formedness checking for theories, and judgmental equality.

Axioms are checked strictly in declaration order: each axiom must be
well-formed over its predecessors only, and equations become rewrite rules
for checking the axioms after them.  Sort-equality side conditions are
discharged by the bounded equality engine; running out of budget yields an
`unknown` outcome distinct from rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .rewrite import (
    Distinct,
    Equal,
    Rule,
    RewriteSystem,
    Step,
    Unknown,
    Verdict,
    decode_sort,
    encode_sort,
    orient,
)
from .syntax import (
    App,
    Axiom,
    Context,
    EqBudget,
    EqDecl,
    EqJudgment,
    Judgment,
    OpDecl,
    SortDecl,
    SortEqDecl,
    SortEqJudgment,
    SortExpr,
    SortJudgment,
    Substitution,
    SubstitutionError,
    Term,
    TermJudgment,
    Theory,
    Var,
    compose_subst,
    identity_subst,
    show_context,
    show_sort,
    show_term,
    subst_sort,
    subst_term,
)


def _key_budget() -> "_KeyBudget":
    return _KeyBudget()


class _KeyBudget:
    """Small fixed budget for sort-key normalization during enumeration."""

    __slots__ = ("steps_left", "max_depth")

    def __init__(self):
        self.steps_left = 64
        self.max_depth = 16

    def spend(self, n: int = 1) -> bool:
        if self.steps_left < n:
            self.steps_left = 0
            return False
        self.steps_left -= n
        return True


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "unknown"
    axiom: str
    line: int
    message: str

    def __str__(self):
        return f"[{self.severity}] line {self.line} ({self.axiom}): {self.message}"


@dataclass
class CheckResult:
    status: str  # "accepted" | "rejected" | "unknown"
    diagnostics: list[Diagnostic]
    checked: Optional["CheckedTheory"]

    @property
    def ok(self) -> bool:
        return self.status == "accepted"


class CheckedTheory:
    """A theory that passed check_theory, with its symbol tables and rules."""

    def __init__(self, theory: Theory):
        self.theory = theory
        self.sort_decls: dict[str, SortDecl] = {}
        self.op_decls: dict[str, OpDecl] = {}
        self.sort_order: list[str] = []
        self.op_order: list[str] = []
        self.rules: list[Rule] = []
        # equations where the two sides use different variable sets; these
        # only act through per-context ground instances
        self.defective: list[tuple[Context, Term, Term, str]] = []
        self.system = RewriteSystem([])
        self._local_cache: dict = {}

    # -- symbol bookkeeping (used while checking) ---------------------------

    def _declare_sort(self, ax: SortDecl):
        self.sort_decls[ax.name] = ax
        self.sort_order.append(ax.name)

    def _declare_op(self, ax: OpDecl):
        self.op_decls[ax.name] = ax
        self.op_order.append(ax.name)

    def _add_rules(self, new: list[Rule], defective=()):
        self.rules.extend(new)
        self.defective.extend(defective)
        self.system = RewriteSystem(self.rules, suppress_distinct=bool(self.defective))
        self._local_cache.clear()

    # -- term enumeration ---------------------------------------------------

    def _norm_sort_key(self, s: SortExpr) -> Term:
        nf, _, _ = self.system.normalize(encode_sort(s), _key_budget())
        return nf

    def enumerate_terms(self, ctx: Context, sort: SortExpr, max_depth: int,
                        cap: int = 4000) -> list[Term]:
        """All terms of the given sort over ctx, to depth, deterministic order.

        Sorts are compared by schematic normal form, which is enough for the
        bundled corpora; deeper equalities only add duplicates, never lose
        well-typed terms of structurally-equal sort.
        """
        want = self._norm_sort_key(sort)
        pool = self._term_pool(ctx, max_depth, cap)
        return [t for t, k in pool if k == want]

    def _term_pool(self, ctx: Context, max_depth: int, cap: int) -> list[tuple[Term, Term]]:
        key = ("pool", ctx.sorts, max_depth, cap)
        hit = self._local_cache.get(key)
        if hit is not None:
            return hit
        # by_depth: list of (term, normalized sort key)
        pool: list[tuple[Term, Term]] = []
        seen: set[Term] = set()
        for i in range(len(ctx)):
            t = Var(i)
            pool.append((t, self._norm_sort_key(ctx.sorts[i])))
            seen.add(t)
        frontier = list(pool)
        for _ in range(max_depth):
            new: list[tuple[Term, Term]] = []
            for op_name in self.op_order:
                decl = self.op_decls[op_name]
                for args in self._arg_tuples(decl.context, pool, cap):
                    t = App(op_name, args)
                    if t in seen:
                        continue
                    seen.add(t)
                    new.append((t, self._norm_sort_key(subst_sort(decl.result, args))))
                    if len(pool) + len(new) >= cap:
                        break
                if len(pool) + len(new) >= cap:
                    break
            if not new:
                break
            pool.extend(new)
            if len(pool) >= cap:
                break
        self._local_cache[key] = pool
        return pool

    def _arg_tuples(self, tele: Context, pool: list[tuple[Term, Term]],
                    cap: int, loose=None) -> list[tuple[Term, ...]]:
        """Tuples from the pool matching a telescope, instantiated entrywise.

        With `loose` set, sort keys are also compared up to equality in that
        rewrite system (used when instantiating context-dependent rules).
        """
        outs: list[tuple[Term, ...]] = [()]
        for i in range(len(tele)):
            nxt: list[tuple[Term, ...]] = []
            for prefix in outs:
                want = self._norm_sort_key(subst_sort(tele.sorts[i], prefix))
                for t, k in pool:
                    hit = k == want
                    if not hit and loose is not None:
                        hit = isinstance(loose.equal(k, want, EqBudget(64, 12)),
                                         Equal)
                    if hit:
                        nxt.append(prefix + (t,))
                        if len(nxt) > cap:
                            break
                if len(nxt) > cap:
                    break
            outs = nxt
            if not outs:
                break
        return outs

    def enumerate_substitutions(self, source: Context, target: Context,
                                max_depth: int, cap: int = 4000) -> list[Substitution]:
        pool = self._term_pool(source, max_depth, cap)
        subs = []
        for terms in self._arg_tuples(target, pool, cap):
            subs.append(Substitution(source, target, terms))
        return subs

    # -- context-local rules ------------------------------------------------

    def local_system(self, ctx: Context, budget: EqBudget) -> RewriteSystem:
        """Schematic rules plus ground instances of defective equations.

        Two instantiation rounds: the second matches instantiation sorts up
        to the equalities contributed by the first, so rules whose telescopes
        only typecheck modulo earlier reflection still fire.
        """
        if not self.defective:
            return self.system
        inst_depth = min(2, budget.max_depth)
        key = ("local", ctx.sorts, inst_depth)
        hit = self._local_cache.get(key)
        if hit is not None:
            return hit
        ground: list[Rule] = []
        seen = set()
        loose = None
        for _round in range(2):
            pool = self._term_pool(ctx, inst_depth, 4000)
            for (ectx, lhs, rhs, name) in self.defective:
                tuples = self._arg_tuples(ectx, pool, 4000, loose=loose)
                for j, terms in enumerate(tuples):
                    gl = subst_term(lhs, terms)
                    gr = subst_term(rhs, terms)
                    if gl == gr or (gl, gr) in seen:
                        continue
                    seen.add((gl, gr))
                    ground.append(Rule(f"{name}@{_round}.{j}", 0, gl, gr,
                                       oriented=False, ground=True))
            loose = RewriteSystem(self.rules + ground, suppress_distinct=True)
        sys = loose if loose is not None else \
            RewriteSystem(self.rules + ground, suppress_distinct=True)
        self._local_cache[key] = sys
        return sys

    # -- equality -----------------------------------------------------------

    def term_equal(self, t1: Term, t2: Term, budget: EqBudget,
                   ctx: Optional[Context] = None) -> Verdict:
        sys = self.local_system(ctx, budget) if ctx is not None else self.system
        return sys.equal(t1, t2, budget)

    def sort_equal(self, s1: SortExpr, s2: SortExpr, budget: EqBudget,
                   ctx: Optional[Context] = None) -> Verdict:
        sys = self.local_system(ctx, budget) if ctx is not None else self.system
        return sys.equal(encode_sort(s1), encode_sort(s2), budget)

    def context_equal(self, c1: Context, c2: Context, budget: EqBudget) -> Verdict:
        if len(c1) != len(c2):
            return Distinct(encode_sort(SortExpr("<len%d>" % len(c1))),
                            encode_sort(SortExpr("<len%d>" % len(c2))))
        trace: list[Step] = []
        for i, (s1, s2) in enumerate(zip(c1.sorts, c2.sorts)):
            prefix = Context(c1.names[:i], c1.sorts[:i])
            v = self.sort_equal(s1, s2, budget, ctx=prefix)
            if isinstance(v, Equal):
                trace.extend(v.trace)
                continue
            return v
        return Equal(trace)

    # -- typing -------------------------------------------------------------

    def infer_sort(self, ctx: Context, t: Term, budget: EqBudget,
                   diags: Optional[list[Diagnostic]] = None,
                   where: tuple[str, int] = ("?", 0)) -> Optional[SortExpr]:
        """Infer the sort of t in ctx; records diagnostics on failure."""
        name, line = where
        if isinstance(t, Var):
            if t.index >= len(ctx):
                if diags is not None:
                    diags.append(Diagnostic("error", name, line,
                                            f"variable #{t.index} out of scope"))
                return None
            return ctx.sorts[t.index]
        decl = self.op_decls.get(t.op)
        if decl is None:
            if diags is not None:
                diags.append(Diagnostic("error", name, line,
                                        f"unknown operation {t.op!r}"))
            return None
        if len(t.args) != len(decl.context):
            if diags is not None:
                diags.append(Diagnostic(
                    "error", name, line,
                    f"{t.op!r} expects {len(decl.context)} arguments, got {len(t.args)}"))
            return None
        for i, arg in enumerate(t.args):
            got = self.infer_sort(ctx, arg, budget, diags, where)
            if got is None:
                return None
            expected = subst_sort(decl.context.sorts[i], t.args[:i])
            v = self.sort_equal(got, expected, budget, ctx=ctx)
            if isinstance(v, Distinct):
                if diags is not None:
                    diags.append(Diagnostic(
                        "error", name, line,
                        f"sort mismatch in argument {i + 1} of {t.op!r}: expected "
                        f"{show_sort(decode_sort(v.nf_rhs), ctx.names)}, got "
                        f"{show_sort(decode_sort(v.nf_lhs), ctx.names)}"))
                return None
            if isinstance(v, Unknown):
                if diags is not None:
                    diags.append(Diagnostic(
                        "unknown", name, line,
                        f"could not decide sort equality for argument {i + 1} of "
                        f"{t.op!r} within budget"))
                return None
        return subst_sort(decl.result, t.args)

    def sort_wf(self, ctx: Context, s: SortExpr, budget: EqBudget,
                diags: Optional[list[Diagnostic]] = None,
                where: tuple[str, int] = ("?", 0)) -> bool:
        name, line = where
        decl = self.sort_decls.get(s.head)
        if decl is None:
            if diags is not None:
                diags.append(Diagnostic("error", name, line,
                                        f"unknown sort {s.head!r}"))
            return False
        if len(s.args) != len(decl.context):
            if diags is not None:
                diags.append(Diagnostic(
                    "error", name, line,
                    f"sort {s.head!r} expects {len(decl.context)} arguments, "
                    f"got {len(s.args)}"))
            return False
        for i, arg in enumerate(s.args):
            got = self.infer_sort(ctx, arg, budget, diags, where)
            if got is None:
                return False
            expected = subst_sort(decl.context.sorts[i], s.args[:i])
            v = self.sort_equal(got, expected, budget, ctx=ctx)
            if isinstance(v, Distinct):
                if diags is not None:
                    diags.append(Diagnostic(
                        "error", name, line,
                        f"sort mismatch in index {i + 1} of sort {s.head!r}"))
                return False
            if isinstance(v, Unknown):
                if diags is not None:
                    diags.append(Diagnostic(
                        "unknown", name, line,
                        f"could not decide index sort equality for {s.head!r}"))
                return False
        return True

    def context_wf(self, ctx: Context, budget: EqBudget,
                   diags: Optional[list[Diagnostic]] = None,
                   where: tuple[str, int] = ("?", 0)) -> bool:
        if not ctx.telescope_ok():
            if diags is not None:
                diags.append(Diagnostic(
                    "error", where[0], where[1],
                    f"ill-formed telescope: ({show_context(ctx)})"))
            return False
        for i in range(len(ctx)):
            prefix = Context(ctx.names[:i], ctx.sorts[:i])
            if not self.sort_wf(prefix, ctx.sorts[i], budget, diags, where):
                return False
        return True

    # -- substitutions ------------------------------------------------------

    def check_substitution(self, s: Substitution, budget: EqBudget) -> Verdict:
        """Verify the pairing rule for every entry of s."""
        trace: list[Step] = []
        for i, t in enumerate(s.terms):
            got = self.infer_sort(s.source, t, budget)
            if got is None:
                return Unknown(f"entry {i} does not typecheck")
            expected = subst_sort(s.target.sorts[i], s.terms[:i])
            v = self.sort_equal(got, expected, budget, ctx=s.source)
            if isinstance(v, Equal):
                trace.extend(v.trace)
                continue
            return v
        return Equal(trace)

    def compose_subst(self, s2: Substitution, s1: Substitution,
                      budget: EqBudget) -> Substitution:
        """compose_subst with context matching up to derivable equality."""
        if s1.target.sorts != s2.source.sorts:
            v = self.context_equal(s1.target, s2.source, budget)
            if not isinstance(v, Equal):
                raise SubstitutionError("compose_subst: contexts do not match")
        return Substitution(s1.source, s2.target,
                            tuple(s1.apply_term(t) for t in s2.terms))

    # -- judgmental equality ------------------------------------------------

    def judg_equal(self, j1: Judgment, j2: Judgment, budget: EqBudget) -> Verdict:
        """Compare two judgments of the same form in the same context."""
        if type(j1) is not type(j2):
            return Unknown("judgments have different forms")
        parts: list[tuple[Term, Term]] = []
        if isinstance(j1, SortJudgment):
            parts = [(encode_sort(j1.sort), encode_sort(j2.sort))]
        elif isinstance(j1, TermJudgment):
            parts = [(j1.term, j2.term),
                     (encode_sort(j1.sort), encode_sort(j2.sort))]
        elif isinstance(j1, EqJudgment):
            parts = [(j1.lhs, j2.lhs), (j1.rhs, j2.rhs)]
        elif isinstance(j1, SortEqJudgment):
            parts = [(encode_sort(j1.lhs), encode_sort(j2.lhs)),
                     (encode_sort(j1.rhs), encode_sort(j2.rhs))]
        sys = self.local_system(j1.context, budget)
        trace: list[Step] = []
        for a, b in parts:
            v = sys.equal(a, b, budget)
            if isinstance(v, Equal):
                trace.extend(v.trace)
                continue
            return v
        return Equal(trace)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        def term_json(t: Term):
            if isinstance(t, Var):
                return {"var": t.index}
            return {"op": t.op, "args": [term_json(a) for a in t.args]}

        def sort_json(s: SortExpr):
            return {"head": s.head, "args": [term_json(a) for a in s.args]}

        def ctx_json(c: Context):
            return [{"name": n, "sort": sort_json(s)} for n, s in c]

        axioms = []
        for ax in self.theory.axioms:
            if isinstance(ax, SortDecl):
                axioms.append({"kind": "sort", "name": ax.name,
                               "telescope": ctx_json(ax.context)})
            elif isinstance(ax, OpDecl):
                axioms.append({"kind": "op", "name": ax.name,
                               "telescope": ctx_json(ax.context),
                               "result": sort_json(ax.result)})
            elif isinstance(ax, EqDecl):
                axioms.append({"kind": "eq", "name": ax.name,
                               "telescope": ctx_json(ax.context),
                               "sides": [term_json(t) for t in ax.sides]})
            else:
                axioms.append({"kind": "sorteq", "name": ax.name,
                               "telescope": ctx_json(ax.context),
                               "lhs": sort_json(ax.lhs), "rhs": sort_json(ax.rhs)})
        return {"theory": self.theory.name, "axioms": axioms}


def term_vars_differ(lhs: Term, rhs: Term) -> bool:
    """True when the equation is unusable in either schematic direction.

    Such equations (e.g. equality reflection, where each side is a distinct
    variable) act only through per-context ground instances.
    """
    from .syntax import term_vars
    lv, rv = term_vars(lhs), term_vars(rhs)
    return not (rv <= lv) and not (lv <= rv)


def check_theory(theory: Theory, budget: EqBudget = EqBudget()) -> CheckResult:
    """Check every axiom over its predecessors; see module docstring."""
    ct = CheckedTheory(Theory(theory.name, ()))
    diags: list[Diagnostic] = []
    accepted: list[Axiom] = []
    for ax in theory.axioms:
        where = (ax.name, ax.line)
        if ax.name in ct.sort_decls or ax.name in ct.op_decls:
            diags.append(Diagnostic("error", ax.name, ax.line,
                                    f"duplicate identifier {ax.name!r}"))
            break
        if not ct.context_wf(ax.context, budget, diags, where):
            break
        before = len(diags)
        if isinstance(ax, SortDecl):
            ct._declare_sort(ax)
        elif isinstance(ax, OpDecl):
            if not ct.sort_wf(ax.context, ax.result, budget, diags, where):
                break
            ct._declare_op(ax)
        elif isinstance(ax, EqDecl):
            side_sorts = []
            bad = False
            for t in ax.sides:
                s = ct.infer_sort(ax.context, t, budget, diags, where)
                if s is None:
                    bad = True
                    break
                side_sorts.append(s)
            if bad:
                break
            for i in range(len(side_sorts) - 1):
                v = ct.sort_equal(side_sorts[i], side_sorts[i + 1], budget,
                                  ctx=ax.context)
                if isinstance(v, Distinct):
                    diags.append(Diagnostic(
                        "error", ax.name, ax.line,
                        "sort mismatch between equation sides "
                        f"{i + 1} and {i + 2}: "
                        f"{show_sort(decode_sort(v.nf_lhs), ax.context.names)} vs "
                        f"{show_sort(decode_sort(v.nf_rhs), ax.context.names)}"))
                    bad = True
                    break
                if isinstance(v, Unknown):
                    diags.append(Diagnostic(
                        "unknown", ax.name, ax.line,
                        f"equation sides {i + 1} and {i + 2} have sorts not "
                        "decided equal within budget"))
            if bad:
                break
            new_rules = []
            defective = []
            n = len(ax.context)
            for i in range(len(ax.sides) - 1):
                lhs, rhs = ax.sides[i], ax.sides[i + 1]
                new_rules.append(orient(f"{ax.name}#{i}", lhs, rhs, n))
                if term_vars_differ(lhs, rhs):
                    defective.append((ax.context, lhs, rhs, f"{ax.name}#{i}"))
            ct._add_rules(new_rules, defective)
        elif isinstance(ax, SortEqDecl):
            if not ct.sort_wf(ax.context, ax.lhs, budget, diags, where):
                break
            if not ct.sort_wf(ax.context, ax.rhs, budget, diags, where):
                break
            el, er = encode_sort(ax.lhs), encode_sort(ax.rhs)
            defective = []
            if term_vars_differ(el, er):
                defective.append((ax.context, el, er, f"{ax.name}#0"))
            ct._add_rules([orient(f"{ax.name}#0", el, er, len(ax.context))],
                          defective)
        if any(d.severity == "error" for d in diags[before:]):
            break
        accepted.append(ax)
        ct.theory = Theory(theory.name, tuple(accepted))

    if any(d.severity == "error" for d in diags):
        return CheckResult("rejected", diags, None)
    if any(d.severity == "unknown" for d in diags):
        return CheckResult("unknown", diags, None)
    return CheckResult("accepted", diags, ct)


def judg_equal(ct: CheckedTheory, j1: Judgment, j2: Judgment,
               budget: EqBudget) -> Verdict:
    return ct.judg_equal(j1, j2, budget)
