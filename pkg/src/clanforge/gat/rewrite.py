"""Bounded derivable-equality engine.

Equations are compiled to rewrite rules.  A rule is oriented left-to-right
when its left side is not a bare variable and covers all right-side
variables; the remaining equations stay bidirectional.  Equality queries
first compare oriented normal forms, then run a bounded bidirectional
breadth-first search over single rewrite steps at arbitrary positions.

Verdicts are three-valued.  ``Equal`` carries a replayable step trace.
``Distinct`` is only produced when both normal forms were reached within
budget, they differ, and the rule system passed a confluence check on the
instance (all one-step reducts of every term in both forward cones rejoin,
and no bidirectional rule touches the cones).  Everything else is
``Unknown``; running out of budget is a verdict, not an error.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .syntax import App, EqBudget, SortExpr, Term, Var, term_depth, term_vars

SORT_MARK = "§"  # prefix distinguishing sort heads from op heads


def encode_sort(s: SortExpr) -> Term:
    return App(SORT_MARK + s.head, s.args)


def decode_sort(t: Term) -> SortExpr:
    assert isinstance(t, App) and t.op.startswith(SORT_MARK)
    return SortExpr(t.op[len(SORT_MARK):], t.args)


@dataclass(frozen=True)
class Rule:
    name: str
    n_vars: int
    lhs: Term
    rhs: Term
    oriented: bool
    # ground rules come from instantiating an equation over a specific
    # context; their Var nodes are context constants, not pattern variables
    ground: bool = False


@dataclass(frozen=True)
class Step:
    """One rewrite step: `before` at `pos` via `rule` (forward or not)."""

    rule: str
    pos: tuple[int, ...]
    forward: bool
    before: Term
    after: Term


@dataclass
class Equal:
    trace: list[Step]


@dataclass
class Distinct:
    nf_lhs: Term
    nf_rhs: Term


@dataclass
class Unknown:
    reason: str = ""


Verdict = Equal | Distinct | Unknown


def orient(name: str, lhs: Term, rhs: Term, n_vars: int) -> Rule:
    """Apply the orientation policy to one equation side pair."""
    oriented = not isinstance(lhs, Var) and term_vars(rhs) <= term_vars(lhs)
    return Rule(name, n_vars, lhs, rhs, oriented)


def _match(pattern: Term, subject: Term, binding: dict[int, Term]) -> bool:
    if isinstance(pattern, Var):
        seen = binding.get(pattern.index)
        if seen is None:
            binding[pattern.index] = subject
            return True
        return seen == subject
    if not isinstance(subject, App) or subject.op != pattern.op:
        return False
    if len(subject.args) != len(pattern.args):
        return False
    for p, s in zip(pattern.args, subject.args):
        if not _match(p, s, binding):
            return False
    return True


def _instantiate(t: Term, binding: dict[int, Term]) -> Term:
    if isinstance(t, Var):
        return binding[t.index]
    if not t.args:
        return t
    return App(t.op, tuple(_instantiate(a, binding) for a in t.args))


def _subterms(t: Term, pos: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Term]]:
    yield pos, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from _subterms(a, pos + (i,))


def _replace(t: Term, pos: tuple[int, ...], new: Term) -> Term:
    if not pos:
        return new
    assert isinstance(t, App)
    i = pos[0]
    args = list(t.args)
    args[i] = _replace(args[i], pos[1:], new)
    return App(t.op, tuple(args))


class _Budget:
    __slots__ = ("steps_left", "max_depth")

    def __init__(self, budget: EqBudget, steps: Optional[int] = None):
        self.steps_left = budget.max_steps if steps is None else steps
        self.max_depth = budget.max_depth

    def spend(self, n: int = 1) -> bool:
        if self.steps_left < n:
            self.steps_left = 0
            return False
        self.steps_left -= n
        return True


def _rename_rule(rule: Rule, offset: int) -> tuple[Term, Term]:
    def sh(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.index + offset)
        return App(t.op, tuple(sh(a) for a in t.args))

    return sh(rule.lhs), sh(rule.rhs)


def _unify(a: Term, b: Term, sub: dict[int, Term]) -> Optional[dict[int, Term]]:
    def walk(t: Term) -> Term:
        while isinstance(t, Var) and t.index in sub:
            t = sub[t.index]
        return t

    def occurs(i: int, t: Term) -> bool:
        t = walk(t)
        if isinstance(t, Var):
            return t.index == i
        return any(occurs(i, x) for x in t.args)

    def go(x: Term, y: Term) -> bool:
        x, y = walk(x), walk(y)
        if isinstance(x, Var) and isinstance(y, Var) and x.index == y.index:
            return True
        if isinstance(x, Var):
            if occurs(x.index, y):
                return False
            sub[x.index] = y
            return True
        if isinstance(y, Var):
            return go(y, x)
        if x.op != y.op or len(x.args) != len(y.args):
            return False
        return all(go(p, q) for p, q in zip(x.args, y.args))

    return sub if go(a, b) else None


def _resolve(t: Term, sub: dict[int, Term]) -> Term:
    if isinstance(t, Var):
        if t.index in sub:
            return _resolve(sub[t.index], sub)
        return t
    if not t.args:
        return t
    return App(t.op, tuple(_resolve(a, sub) for a in t.args))


class RewriteSystem:
    def __init__(self, rules: list[Rule], suppress_distinct: bool = False):
        self.rules = list(rules)
        self.has_unoriented = any(not r.oriented for r in rules)
        # set when the theory contains equations whose two sides have
        # different variable sets; those cannot be applied schematically in
        # every direction, so Distinct verdicts would be unsound
        self.suppress_distinct = suppress_distinct
        self.all_oriented = all(r.oriented for r in rules)
        self._joinable: Optional[bool] = None
        self._nf_cache: dict[Term, tuple[Term, tuple, bool]] = {}

    def globally_joinable(self) -> bool:
        """All critical pairs among the oriented rules rejoin (cached).

        Together with completed normalizations on the instance this licenses
        fast Distinct verdicts without a per-instance cone search.
        """
        if not self.all_oriented:
            return False
        if self._joinable is None:
            self._joinable = self._check_critical_pairs()
        return self._joinable

    def _check_critical_pairs(self) -> bool:
        budget = EqBudget(600, 24)
        for r1 in self.rules:
            off = r1.n_vars
            for r2 in self.rules:
                l2, rr2 = _rename_rule(r2, off)
                for pos, sub in _subterms(r1.lhs):
                    if isinstance(sub, Var):
                        continue
                    if pos == () and r1 is r2:
                        continue  # trivial self-overlap
                    mgu = _unify(sub, l2, {})
                    if mgu is None:
                        continue
                    peak_a = _resolve(r1.rhs, mgu)
                    peak_b = _resolve(_replace(r1.lhs, pos, rr2), mgu)
                    nf_a, _, ok_a = self.normalize(peak_a, _Budget(budget))
                    nf_b, _, ok_b = self.normalize(peak_b, _Budget(budget))
                    if not (ok_a and ok_b) or nf_a != nf_b:
                        return False
        return True

    # -- single steps -------------------------------------------------------

    def _apply_side(self, rule: Rule, src: Term, dst: Term, subject: Term,
                    pos: tuple[int, ...], sub: Term) -> Optional[Term]:
        if rule.ground:
            if sub != src:
                return None
            return _replace(subject, pos, dst)
        # a step src->dst is applicable only if dst's variables are covered
        if not term_vars(dst) <= term_vars(src):
            return None
        binding: dict[int, Term] = {}
        if not _match(src, sub, binding):
            return None
        return _replace(subject, pos, _instantiate(dst, binding))

    def forward_steps(self, t: Term) -> Iterator[tuple[Rule, tuple[int, ...], Term]]:
        """Oriented rules applied left-to-right anywhere in t."""
        for pos, sub in _subterms(t):
            for rule in self.rules:
                if not rule.oriented:
                    continue
                out = self._apply_side(rule, rule.lhs, rule.rhs, t, pos, sub)
                if out is not None:
                    yield rule, pos, out

    def all_steps(self, t: Term, max_depth: int) -> Iterator[Step]:
        """Every rule in both directions, depth-capped, deterministic order."""
        for pos, sub in _subterms(t):
            for rule in self.rules:
                out = self._apply_side(rule, rule.lhs, rule.rhs, t, pos, sub)
                if out is not None and term_depth(out) <= max_depth:
                    yield Step(rule.name, pos, True, t, out)
                out = self._apply_side(rule, rule.rhs, rule.lhs, t, pos, sub)
                if out is not None and term_depth(out) <= max_depth:
                    yield Step(rule.name, pos, False, t, out)

    def unoriented_applicable(self, t: Term) -> bool:
        for pos, sub in _subterms(t):
            for rule in self.rules:
                if rule.oriented:
                    continue
                if rule.ground:
                    if sub == rule.lhs or sub == rule.rhs:
                        return True
                    continue
                b: dict[int, Term] = {}
                if _match(rule.lhs, sub, dict(b)) or _match(rule.rhs, sub, b):
                    return True
        return False

    # -- normalization ------------------------------------------------------

    def normalize(self, t: Term, budget: _Budget) -> tuple[Term, list[Step], bool]:
        """Leftmost-innermost reduction by the first applicable oriented rule."""
        hit = self._nf_cache.get(t)
        if hit is not None:
            return hit[0], list(hit[1]), hit[2]
        start = t
        steps: list[Step] = []
        cur = t
        while True:
            if not budget.spend():
                return cur, steps, False
            nxt = None
            # innermost: visit positions by decreasing path length, then lex
            positions = sorted(_subterms(cur), key=lambda ps: (-len(ps[0]), ps[0]))
            for pos, sub in positions:
                for rule in self.rules:
                    if not rule.oriented:
                        continue
                    out = self._apply_side(rule, rule.lhs, rule.rhs, cur, pos, sub)
                    if out is not None:
                        nxt = Step(rule.name, pos, True, cur, out)
                        break
                if nxt:
                    break
            if nxt is None:
                if len(self._nf_cache) < 100_000:
                    self._nf_cache[start] = (cur, tuple(steps), True)
                return cur, steps, True
            steps.append(nxt)
            cur = nxt.after

    def _forward_cone(self, t: Term, budget: _Budget) -> Optional[set[Term]]:
        """All terms reachable by oriented steps; None if budget ran out."""
        seen = {t}
        queue = deque([t])
        while queue:
            cur = queue.popleft()
            if not budget.spend():
                return None
            for _, _, out in self.forward_steps(cur):
                if out not in seen:
                    seen.add(out)
                    queue.append(out)
        return seen

    def _instance_confluent(self, t: Term, budget: _Budget) -> bool:
        """Check the cone of t: unique normal forms for all one-step reducts."""
        cone = self._forward_cone(t, budget)
        if cone is None:
            return False
        for term in sorted(cone, key=repr):
            if self.has_unoriented and self.unoriented_applicable(term):
                return False
            nfs = set()
            for _, _, out in self.forward_steps(term):
                nf, _, complete = self.normalize(out, budget)
                if not complete:
                    return False
                nfs.add(nf)
            if len(nfs) > 1:
                return False
        return True

    # -- equality -----------------------------------------------------------

    def equal(self, t1: Term, t2: Term, budget: EqBudget) -> Verdict:
        # each phase gets its own slice of the step budget so that a looping
        # normalization cannot starve the search
        if t1 == t2:
            return Equal([])
        quarter = max(1, budget.max_steps // 4)
        nf1, steps1, ok1 = self.normalize(t1, _Budget(budget, quarter))
        nf2, steps2, ok2 = self.normalize(t2, _Budget(budget, quarter))
        if ok1 and ok2 and nf1 == nf2:
            trace = steps1 + [
                Step(s.rule, s.pos, not s.forward, s.after, s.before)
                for s in reversed(steps2)
            ]
            return Equal(trace)
        if ok1 and ok2 and nf1 != nf2 and not self.suppress_distinct \
                and self.globally_joinable():
            # complete, jointly confluent system: distinct normal forms are
            # conclusive, no search needed
            return Distinct(nf1, nf2)
        found = self._bfs_connect(t1, t2, _Budget(budget, 2 * quarter),
                                  budget.max_depth)
        if found is not None:
            return Equal(found)
        if ok1 and ok2 and nf1 != nf2 and not self.suppress_distinct:
            conf = _Budget(budget, 2 * quarter)
            if self._instance_confluent(t1, conf) and self._instance_confluent(t2, conf):
                return Distinct(nf1, nf2)
            return Unknown("normal forms differ but confluence not established")
        return Unknown("budget exhausted" if not (ok1 and ok2)
                       else "normal forms differ but theory has context-dependent equations")

    def _bfs_connect(self, t1: Term, t2: Term, tracker: _Budget,
                     max_depth: int) -> Optional[list[Step]]:
        """Meet-in-the-middle search; returns a forward trace t1 -> t2."""
        if t1 == t2:
            return []
        # parent maps: term -> (prev term, step) on the respective side
        left: dict[Term, Optional[tuple[Term, Step]]] = {t1: None}
        right: dict[Term, Optional[tuple[Term, Step]]] = {t2: None}
        ql, qr = deque([t1]), deque([t2])

        def path_from(table, t):
            out = []
            cur = t
            while table[cur] is not None:
                prev, step = table[cur]
                out.append(step)
                cur = prev
            out.reverse()
            return out

        def join(meet: Term) -> list[Step]:
            fwd = path_from(left, meet)
            back = path_from(right, meet)
            back_rev = [Step(s.rule, s.pos, not s.forward, s.after, s.before)
                        for s in reversed(back)]
            return fwd + back_rev

        while ql or qr:
            # expand the smaller frontier first; ties go left
            if qr and (not ql or len(qr) < len(ql)):
                queue, table, other = qr, right, left
            else:
                queue, table, other = ql, left, right
            cur = queue.popleft()
            if not tracker.spend():
                return None
            for step in self.all_steps(cur, max_depth):
                nxt = step.after
                if nxt in table:
                    continue
                table[nxt] = (cur, step)
                if nxt in other:
                    return join(nxt)
                queue.append(nxt)
        return None

    # -- trace replay -------------------------------------------------------

    def replay(self, t1: Term, t2: Term, trace: list[Step]) -> bool:
        """Re-verify an Equal trace step by step."""
        cur = t1
        by_name = {}
        for r in self.rules:
            by_name[r.name] = r
        for step in trace:
            if step.before != cur:
                return False
            rule = by_name.get(step.rule)
            if rule is None:
                return False
            # verify in the rule's forward orientation so pattern variables
            # are always bound by the matched side
            subject, expect = (cur, step.after) if step.forward else (step.after, cur)
            subs = dict(_subterms(subject))
            if step.pos not in subs:
                return False
            out = self._apply_side(rule, rule.lhs, rule.rhs, subject, step.pos,
                                   subs[step.pos])
            if out != expect:
                return False
            cur = step.after
        return cur == t2
