"""Hom-models of a theory and bounded flatness verdicts.

The hom-model at a context has as fibers the terms of each sort over that
context modulo derivable equality; it is computed by saturating normal
forms under the operations, which terminates exactly when those term
classes are finite (a cap guards divergence).

Flatness of a model is a property of its category of elements.  The
verdict is three-valued: a model recognized as a hom-model is flat; a
finite diagram in the truncated category of elements with no cocone among
contexts of bounded size refutes filteredness up to that bound; otherwise
the answer is unknown.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .gat.checker import CheckedTheory
from .gat.rewrite import Equal, _Budget
from .gat.syntax import App, Context, EqBudget, SortExpr, Substitution, Term, Var
from .models import TheoryModel, models_isomorphic


class HomModelOverflow(RuntimeError):
    pass


def _nf(ct: CheckedTheory, ctx: Context, t: Term, budget: EqBudget) -> Term:
    sys = ct.local_system(ctx, budget)
    nf, _, complete = sys.normalize(t, _Budget(budget))
    if not complete:
        raise HomModelOverflow("normalization did not complete within budget")
    return nf


def hom_model(ct: CheckedTheory, ctx: Context, budget: EqBudget = EqBudget(),
              cap: int = 512) -> TheoryModel:
    """The model of terms over ctx, with elements the normal forms.

    Requires a complete (all-oriented, critical-pair-joinable) rule system
    so normal forms decide equality; raises HomModelOverflow otherwise or
    when saturation exceeds the cap.
    """
    sys = ct.local_system(ctx, budget)
    if not (sys.all_oriented and sys.globally_joinable()):
        raise HomModelOverflow(
            "hom-model needs a complete rewrite system for its term classes")

    def sort_key_of(term: Term) -> tuple[str, tuple]:
        s = ct.infer_sort(ctx, term, budget)
        if s is None:
            raise HomModelOverflow("untypable term during saturation")
        return s.head, tuple(_nf(ct, ctx, a, budget) for a in s.args)

    carriers: dict[str, dict[tuple, list]] = {s: {} for s in ct.sort_order}

    def register(term: Term) -> bool:
        head, key = sort_key_of(term)
        fib = carriers[head].setdefault(key, [])
        if term in fib:
            return False
        fib.append(term)
        if sum(len(f) for t in carriers.values() for f in t.values()) > cap:
            raise HomModelOverflow("saturation exceeded the element cap")
        return True

    for i in range(len(ctx)):
        register(Var(i))

    ops: dict[str, dict[tuple, Term]] = {o: {} for o in ct.op_order}
    changed = True
    while changed:
        changed = False
        if sum(len(f) for t in carriers.values() for f in t.values()) > cap:
            raise HomModelOverflow("saturation exceeded the element cap")
        snapshot = TheoryModel(ct, {s: {k: tuple(v) for k, v in t.items()}
                                    for s, t in carriers.items()}, ops)
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env in snapshot.envs(decl.context):
                if env in ops[o]:
                    continue
                val = _nf(ct, ctx, App(o, env), budget)
                ops[o][env] = val
                if register(val):
                    changed = True
    # make sure every valid environment has a carrier key, even when empty
    final = TheoryModel(ct, {s: {k: tuple(v) for k, v in t.items()}
                             for s, t in carriers.items()}, ops)
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        for env in final.envs(decl.context):
            carriers[s].setdefault(env, [])
    return TheoryModel(ct, {s: {k: tuple(v) for k, v in t.items()}
                            for s, t in carriers.items()}, ops)


def universal_env(ctx: Context) -> tuple:
    return tuple(Var(i) for i in range(len(ctx)))


# ---------------------------------------------------------------------------
# Bounded contexts and the category of elements


def bounded_contexts(ct: CheckedTheory, max_len: int, depth: int,
                     sort_filter: Optional[frozenset] = None,
                     cap: int = 64) -> list[Context]:
    out = [Context()]
    frontier = [Context()]
    for _ in range(max_len):
        nxt = []
        for ctx in frontier:
            for s in ct.sort_order:
                if sort_filter and s not in sort_filter:
                    continue
                decl = ct.sort_decls[s]
                pool = ct._term_pool(ctx, depth, 512)
                for args in ct._arg_tuples(decl.context, pool, 512):
                    ext = ctx.extend(f"v{len(ctx)}", SortExpr(s, args))
                    nxt.append(ext)
                    out.append(ext)
                    if len(out) > cap:
                        return out
        frontier = nxt
    return out


@dataclass
class FlatWitness:
    context: Context
    note: str = "isomorphic to the hom-model at this context"


@dataclass
class NoConeUpTo:
    bound: int
    diagram: dict


@dataclass
class FlatUnknown:
    reason: str


def _subst_action(m: TheoryModel, u: Substitution, env: tuple) -> tuple:
    """A(u): A(source of u) -> A(target-as-context)... concretely evaluate
    each term of u in the given environment of u's source."""
    return tuple(m.eval_term(t, env) for t in u.terms)


def is_flat(ct: CheckedTheory, a: TheoryModel, k: int,
            budget: EqBudget = EqBudget(), term_depth: int = 2):
    """Flatness verdict for a; sound for exactly what each verdict claims.

    FlatWitness: a is isomorphic to a hom-model at a context of length <= k.
    NoConeUpTo(k, d): the finite diagram d in El(a) has no cocone among
    element-category objects with contexts of length <= k.
    """
    ctxs = bounded_contexts(ct, k, term_depth)
    a_size = sum(a.total_size().values())
    for ctx in ctxs:
        try:
            # anything bigger than a cannot be isomorphic to it
            h = hom_model(ct, ctx, budget, cap=a_size)
        except HomModelOverflow:
            continue
        if models_isomorphic(a, h):
            return FlatWitness(ctx)

    # objects of the truncated category of elements
    objects: list[tuple[int, tuple]] = []
    for ci, ctx in enumerate(ctxs):
        for env in a.envs(ctx):
            objects.append((ci, env))

    # an arrow (G,x) -> (D,y) is a substitution u: D -> G with A(u)(y) = x
    def arrows_between(gi, x, di, y):
        subs = ct.enumerate_substitutions(ctxs[di], ctxs[gi], term_depth)
        seen = set()
        out = []
        for u in subs:
            if _subst_action(a, u, y) != x:
                continue
            key = tuple(_nf(ct, ctxs[di], t, budget) for t in u.terms)
            if key in seen:
                continue
            seen.add(key)
            out.append(u)
        return out

    # parallel-pair coequalization within the bound
    for gi, x in objects:
        for di, y in objects:
            pairs = arrows_between(gi, x, di, y)
            if len(pairs) < 2:
                continue
            for u, v in itertools.combinations(pairs, 2):
                if _has_coequalizing_arrow(ct, a, ctxs, di, y, u, v, budget,
                                           term_depth):
                    continue
                return NoConeUpTo(k, {
                    "kind": "parallel-pair",
                    "source_context": repr(ctxs[gi].sorts),
                    "source_element": repr(x),
                    "target_context": repr(ctxs[di].sorts),
                    "target_element": repr(y),
                    "u": [repr(t) for t in u.terms],
                    "v": [repr(t) for t in v.terms],
                })
    return FlatUnknown(
        "not recognized as a hom-model; no filteredness failure up to the bound")


def _has_coequalizing_arrow(ct, a, ctxs, di, y, u, v, budget, term_depth) -> bool:
    for ti, theta in enumerate(ctxs):
        subs = ct.enumerate_substitutions(theta, ctxs[di], term_depth)
        if not subs:
            continue
        envs = a.envs(theta)
        for s in subs:
            us = ct.compose_subst(u, s, budget)
            vs = ct.compose_subst(v, s, budget)
            same = True
            for t1, t2 in zip(us.terms, vs.terms):
                ver = ct.term_equal(t1, t2, budget, ctx=theta)
                if not isinstance(ver, Equal):
                    same = False
                    break
            if not same:
                continue
            for z in envs:
                if _subst_action(a, s, z) == y:
                    return True
    return False
