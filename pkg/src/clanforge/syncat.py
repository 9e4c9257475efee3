"""Bounded syntactic categories of checked theories.

Objects are enumerated contexts up to a length bound, quotiented by
derivable context equality; arrows are substitutions up to derivable
equality with terms of bounded depth.  Pairs whose equality comes back
Unknown are kept distinct and flagged, so the bounded category may refine
the true one but never wrongly merges.  Display arrows are recognized as
projection-composites precomposed with an isomorphism, and carry that
decomposition as a witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .fincat import FinCat, FinClan
from .gat.checker import CheckedTheory
from .gat.rewrite import Distinct, Equal, Unknown
from .gat.syntax import (
    Context,
    EqBudget,
    SortExpr,
    Substitution,
    Term,
    Var,
)


class SynCatOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class SynCatBounds:
    max_ctx_len: int
    max_term_depth: int
    budget: EqBudget = EqBudget()
    sort_filter: Optional[frozenset[str]] = None
    max_objects: int = 128
    max_arrows: int = 4096

    def __post_init__(self):
        if self.max_ctx_len < 0 or self.max_term_depth < 0:
            raise ValueError("bounds must be nonnegative")


@dataclass
class DisplayWitness:
    via_context: int      # object index of the extended context
    iso: int              # arrow index of the isomorphism part
    projection: int       # arrow index of the variable-projection part


class SynCat:
    """The bounded syntactic category, with clan structure and flags."""

    def __init__(self, ct: CheckedTheory, bounds: SynCatBounds):
        self.ct = ct
        self.bounds = bounds
        self.contexts: list[Context] = []        # class representatives
        self.context_classes: list[list[Context]] = []
        self.arrows: list[tuple[int, int, Substitution]] = []
        self._arrow_classes: list[list[Substitution]] = []
        self.unknown_flags: list[dict] = []
        self._hom: dict[tuple[int, int], list[int]] = {}
        self.comp: dict[tuple[int, int], int] = {}
        self.ids: list[int] = []
        self.displays: dict[int, DisplayWitness] = {}
        self._build()

    # -- construction -------------------------------------------------------

    def _build(self):
        self._enumerate_objects()
        self._enumerate_arrows()
        self._compose_all()
        self._find_displays()

    def _enumerate_objects(self):
        b = self.bounds
        frontier = [Context()]
        all_ctxs = [Context()]
        for _ in range(b.max_ctx_len):
            nxt = []
            for ctx in frontier:
                for sort in self._sorts_over(ctx):
                    ext = ctx.extend(f"v{len(ctx)}", sort)
                    nxt.append(ext)
                    all_ctxs.append(ext)
                    if len(all_ctxs) > b.max_objects:
                        raise SynCatOverflow("object bound exceeded")
            frontier = nxt
        # quotient by derivable context equality (Equal verdicts only)
        for ctx in all_ctxs:
            placed = False
            for i, rep in enumerate(self.contexts):
                if len(rep) != len(ctx):
                    continue
                v = self.ct.context_equal(rep, ctx, b.budget)
                if isinstance(v, Equal):
                    self.context_classes[i].append(ctx)
                    placed = True
                    break
                if isinstance(v, Unknown):
                    self.unknown_flags.append(
                        {"kind": "context", "lhs": i, "rhs": repr(ctx.sorts)})
            if not placed:
                self.contexts.append(ctx)
                self.context_classes.append([ctx])

    def _sorts_over(self, ctx: Context) -> list[SortExpr]:
        out = []
        for s in self.ct.sort_order:
            if self.bounds.sort_filter and s not in self.bounds.sort_filter:
                continue
            decl = self.ct.sort_decls[s]
            pool = self.ct._term_pool(ctx, self.bounds.max_term_depth, 2048)
            for args in self.ct._arg_tuples(decl.context, pool, 2048):
                out.append(SortExpr(s, args))
        return out

    def _system_for(self, i: int):
        return self.ct.local_system(self.contexts[i], self.bounds.budget)

    def _trusted(self, i: int) -> bool:
        """Normal-form keys decide equality classes outright for a complete
        (all-oriented, critical-pair-joinable) system."""
        sys = self._system_for(i)
        return sys.all_oriented and not sys.suppress_distinct and \
            sys.globally_joinable()

    def _nf_key(self, i: int, s: Substitution) -> tuple:
        from .gat.rewrite import _Budget
        sys = self._system_for(i)
        out = []
        for t in s.terms:
            nf, _, complete = sys.normalize(t, _Budget(self.bounds.budget))
            if not complete:
                return ()
            out.append(nf)
        return tuple(out)

    def _enumerate_arrows(self):
        b = self.bounds
        self._key_ix: dict[tuple[int, int, tuple], int] = {}
        for i, src in enumerate(self.contexts):
            trusted = self._trusted(i)
            for j, tgt in enumerate(self.contexts):
                subs = self.ct.enumerate_substitutions(src, tgt,
                                                       b.max_term_depth)
                classes: list[Substitution] = []
                members: list[list[Substitution]] = []
                keys: list[tuple] = []
                for s in subs:
                    key = self._nf_key(i, s)
                    placed = False
                    for k, rep in enumerate(classes):
                        if key and key == keys[k]:
                            members[k].append(s)
                            placed = True
                            break
                        if trusted and key and keys[k]:
                            continue  # distinct normal forms are conclusive
                        v = self._subst_equal(rep, s)
                        if isinstance(v, Equal):
                            members[k].append(s)
                            placed = True
                            break
                        if isinstance(v, Unknown):
                            self.unknown_flags.append(
                                {"kind": "arrow", "src": i, "tgt": j,
                                 "lhs": repr(rep.terms), "rhs": repr(s.terms)})
                    if not placed:
                        classes.append(s)
                        members.append([s])
                        keys.append(key)
                for rep, mem, key in zip(classes, members, keys):
                    ix = len(self.arrows)
                    if ix >= b.max_arrows:
                        raise SynCatOverflow("arrow bound exceeded")
                    self.arrows.append((i, j, rep))
                    self._arrow_classes.append(mem)
                    self._hom.setdefault((i, j), []).append(ix)
                    if key:
                        self._key_ix[(i, j, key)] = ix

    def _subst_equal(self, s1: Substitution, s2: Substitution):
        for t1, t2 in zip(s1.terms, s2.terms):
            v = self.ct.term_equal(t1, t2, self.bounds.budget, ctx=s1.source)
            if not isinstance(v, Equal):
                return v
        return Equal([])

    def _class_of(self, i: int, j: int, s: Substitution) -> Optional[int]:
        key = self._nf_key(i, s)
        if key:
            hit = self._key_ix.get((i, j, key))
            if hit is not None:
                return hit
            if self._trusted(i):
                return None
        cand = Substitution(s.source, s.target, key) if key else s
        for ix in self._hom.get((i, j), []):
            rep = self.arrows[ix][2]
            v = self._subst_equal(rep, cand)
            if isinstance(v, Equal):
                return ix
        return None

    def _compose_all(self):
        self.ids = []
        self.escaped: list[tuple[int, int]] = []
        for i, ctx in enumerate(self.contexts):
            ident = Substitution(ctx, ctx, ctx.vars())
            ix = self._class_of(i, i, ident)
            if ix is None:
                raise SynCatOverflow("identity escaped the bounded fragment")
            self.ids.append(ix)
        for f, (i, j, sf) in enumerate(self.arrows):
            for g, (j2, k, sg) in enumerate(self.arrows):
                if j2 != j:
                    continue
                comp = self.ct.compose_subst(sg, sf, self.bounds.budget)
                ix = self._class_of(i, k, comp)
                if ix is None:
                    # the composite's terms exceed the depth bound (hom-sets
                    # of the unbounded category can be infinite); recorded,
                    # never silently dropped
                    self.escaped.append((g, f))
                    continue
                self.comp[(g, f)] = ix

    def _find_displays(self):
        isos = {}
        for f, (i, j, _) in enumerate(self.arrows):
            for g in self._hom.get((j, i), []):
                if self.comp.get((g, f)) == self.ids[i] and \
                   self.comp.get((f, g)) == self.ids[j]:
                    isos[f] = g
                    break
        self._isos = isos
        for u, (i, j, _) in enumerate(self.arrows):
            if u in self.displays:
                continue
            tgt_rep = self.contexts[j]
            for k, ext in enumerate(self.contexts):
                if len(ext) < len(tgt_rep):
                    continue
                if ext.sorts[:len(tgt_rep)] != tgt_rep.sorts:
                    continue
                proj_sub = Substitution(ext, tgt_rep, tgt_rep.vars())
                p = self._class_of(k, j, proj_sub)
                if p is None:
                    continue
                for f in self._hom.get((i, k), []):
                    if f not in isos:
                        continue
                    if self.comp.get((p, f)) == u:
                        self.displays[u] = DisplayWitness(k, f, p)
                        break
                if u in self.displays:
                    break

    # -- views ---------------------------------------------------------------

    def hom(self, i: int, j: int) -> list[int]:
        return self._hom.get((i, j), [])

    def find_context(self, ctx: Context) -> Optional[int]:
        for i, rep in enumerate(self.contexts):
            if len(rep) != len(ctx):
                continue
            if isinstance(self.ct.context_equal(rep, ctx, self.bounds.budget),
                          Equal):
                return i
        return None

    def to_fincat(self) -> FinCat:
        if self.escaped:
            raise SynCatOverflow(
                f"{len(self.escaped)} composites escape the bounds; "
                "the fragment is not composition-closed")
        arrows = [(i, j) for (i, j, _) in self.arrows]
        names = [f"s{ix}" for ix in range(len(self.arrows))]

        def ctx_name(c: Context) -> str:
            from .gat.syntax import show_context
            return f"({show_context(c)})"

        return FinCat(len(self.contexts), arrows, self.comp, self.ids,
                      obj_names=[ctx_name(c) for c in self.contexts],
                      arrow_names=names)

    def to_finclan(self) -> FinClan:
        return FinClan(self.to_fincat(), frozenset(self.displays), check=False)

    def _raw_fincat(self) -> FinCat:
        arrows = [(i, j) for (i, j, _) in self.arrows]
        return FinCat(len(self.contexts), arrows, self.comp, self.ids,
                      check=False)

    def check_clan_bounded(self) -> dict:
        """Clan axioms inside the fragment; pullbacks that would exceed the
        context-length bound are skipped and counted, as are composites that
        escaped the depth bound."""
        from .fincat import _is_limit_cone
        cat = self._raw_fincat()
        displays = set(self.displays)
        violations = []
        skipped = len(self.escaped)
        for f in range(cat.n_arr()):
            if f in self._isos and f not in displays:
                violations.append({"axiom": "iso-closure", "arrow": f})
        for p in sorted(displays):
            for q in sorted(displays):
                if cat.tgt(q) == cat.src(p):
                    c = cat.comp.get((p, q))
                    if c is None:
                        skipped += 1
                    elif c not in displays:
                        violations.append({"axiom": "composition-closure",
                                           "pair": [q, p]})
        t = cat.terminal()
        if t is None:
            violations.append({"axiom": "terminal"})
        else:
            for o in range(cat.n_obj):
                if cat.hom(o, t)[0] not in displays:
                    violations.append({"axiom": "terminal-projection",
                                       "object": o})
        def cone_ok(p, s, apex, sp, q):
            if cat.comp.get((p, sp)) is None or cat.comp.get((s, q)) is None:
                return None
            if cat.comp[(p, sp)] != cat.comp[(s, q)]:
                return False
            for x in range(cat.n_obj):
                for b in cat.hom(x, cat.src(p)):
                    for a in cat.hom(x, cat.src(s)):
                        cb, ca = cat.comp.get((p, b)), cat.comp.get((s, a))
                        if cb is None or ca is None:
                            return None
                        if cb != ca:
                            continue
                        meds = []
                        for h in cat.hom(x, apex):
                            m1, m2 = cat.comp.get((sp, h)), cat.comp.get((q, h))
                            if m1 is None or m2 is None:
                                return None
                            if m1 == b and m2 == a:
                                meds.append(h)
                        if len(meds) != 1:
                            return False
            return True

        for p in sorted(displays):
            w = self.displays[p]
            ext_len = len(self.contexts[w.via_context])
            base_len = len(self.contexts[self.arrows[p][1]])
            for s in range(cat.n_arr()):
                if cat.tgt(s) != cat.tgt(p):
                    continue
                need = len(self.contexts[self.arrows[s][0]]) + ext_len - base_len
                if need > self.bounds.max_ctx_len:
                    skipped += 1
                    continue
                found = False
                partial = False
                for apex in range(cat.n_obj):
                    for sp in cat.hom(apex, cat.src(p)):
                        for q in cat.hom(apex, cat.src(s)):
                            if q not in displays:
                                continue
                            r = cone_ok(p, s, apex, sp, q)
                            if r is None:
                                partial = True
                            elif r:
                                found = True
                                break
                        if found:
                            break
                    if found:
                        break
                if not found:
                    if partial:
                        skipped += 1
                    else:
                        violations.append({"axiom": "display-pullback",
                                           "display": p, "along": s})
        return {"ok": not violations, "violations": violations,
                "skipped_pullbacks": skipped,
                "unknown_flags": len(self.unknown_flags)}

    def to_json(self) -> dict:
        from .gat.syntax import show_context, show_term
        return {
            "objects": [show_context(c) for c in self.contexts],
            "arrows": [
                {"src": i, "tgt": j,
                 "substitution": [show_term(t, self.contexts[i].names)
                                  for t in rep.terms]}
                for (i, j, rep) in self.arrows],
            "identities": self.ids,
            "displays": {str(u): {"via": w.via_context, "iso": w.iso,
                                  "projection": w.projection}
                         for u, w in sorted(self.displays.items())},
            "unknown_flags": self.unknown_flags,
        }


def build_syncat(ct: CheckedTheory, bounds: SynCatBounds) -> SynCat:
    return SynCat(ct, bounds)
