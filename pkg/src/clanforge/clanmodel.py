"""Set-valued models of explicit finite clans, and categories of elements.

A model of a finite clan is a functor into finite sets preserving the
terminal object and pullbacks of display maps; everything is stored as
tables and checked exhaustively.  The category of elements construction
puts a coclan structure on pairs (object, element), with co-display maps
the arrows lying over display maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .fincat import FinCat, FinClan, check_clan, pullback


class ClanModel:
    """A functor clan.cat -> FinSet given by element lists and arrow tables."""

    def __init__(self, clan: FinClan, ob: list[list], ar: list[dict],
                 check: bool = True):
        self.clan = clan
        self.ob = [list(xs) for xs in ob]
        self.ar = [dict(t) for t in ar]
        if check:
            bad = self.violations()
            if bad:
                raise ValueError(f"not a clan model: {bad[0]}")

    def violations(self) -> list[str]:
        cat = self.clan.cat
        out = []
        for f, (s, t) in enumerate(cat.arrows):
            table = self.ar[f]
            if sorted(table.keys(), key=repr) != sorted(self.ob[s], key=repr):
                out.append(f"arrow {f} table not total on its source")
                return out
            for x in self.ob[s]:
                if table[x] not in self.ob[t]:
                    out.append(f"arrow {f} leaves the target set")
                    return out
        for o in range(cat.n_obj):
            for x in self.ob[o]:
                if self.ar[cat.ids[o]][x] != x:
                    out.append(f"identity of object {o} not pointwise identity")
        for f in range(cat.n_arr()):
            for g in range(cat.n_arr()):
                if cat.tgt(f) != cat.src(g):
                    continue
                h = cat.comp[(g, f)]
                for x in self.ob[cat.src(f)]:
                    if self.ar[g][self.ar[f][x]] != self.ar[h][x]:
                        out.append(f"functoriality fails at ({g},{f})")
                        return out
        t = cat.terminal()
        if t is None or len(self.ob[t]) != 1:
            out.append("terminal object not sent to a singleton")
        for p in sorted(self.clan.displays):
            for s in range(cat.n_arr()):
                if cat.tgt(s) != cat.tgt(p):
                    continue
                pb = pullback(cat, p, s)
                if pb is None:
                    continue
                apex, sp, q = pb["apex"], pb["to_dom_p"], pb["to_dom_s"]
                want = {(self.ar[q][z], self.ar[sp][z]) for z in self.ob[apex]}
                got = {(d, gp) for d in self.ob[cat.src(s)]
                       for gp in self.ob[cat.src(p)]
                       if self.ar[s][d] == self.ar[p][gp]}
                if want != got or len(self.ob[apex]) != len(got):
                    out.append(f"display pullback of {p} along {s} not preserved")
                    return out
        return out

    def to_json(self):
        return {"objects": [[repr(x) for x in xs] for xs in self.ob],
                "arrows": [[[repr(k), repr(v)] for k, v in
                            sorted(t.items(), key=repr)] for t in self.ar]}


def terminal_clan_model(clan: FinClan) -> ClanModel:
    cat = clan.cat
    ob = [[0] for _ in range(cat.n_obj)]
    ar = [{0: 0} for _ in range(cat.n_arr())]
    return ClanModel(clan, ob, ar)


def hom_clan_model(clan: FinClan, g: int) -> ClanModel:
    """The model sending x to hom(g, x), acting by postcomposition."""
    cat = clan.cat
    ob = [sorted(cat.hom(g, x)) for x in range(cat.n_obj)]
    ar = []
    for f in range(cat.n_arr()):
        s = cat.src(f)
        ar.append({u: cat.comp[(f, u)] for u in cat.hom(g, s)})
    return ClanModel(clan, ob, ar)


class ClanModelMorphism:
    """A natural transformation between models of the same clan."""

    def __init__(self, src: ClanModel, dst: ClanModel, comps: list[dict],
                 check: bool = True):
        self.src = src
        self.dst = dst
        self.comps = [dict(c) for c in comps]
        if check and not self.is_natural():
            raise ValueError("not natural")

    def is_natural(self) -> bool:
        cat = self.src.clan.cat
        for o in range(cat.n_obj):
            for x in self.src.ob[o]:
                if self.comps[o].get(x) not in self.dst.ob[o]:
                    return False
        for f, (s, t) in enumerate(cat.arrows):
            for x in self.src.ob[s]:
                if self.comps[t][self.src.ar[f][x]] != \
                   self.dst.ar[f][self.comps[s][x]]:
                    return False
        return True

    def __eq__(self, other):
        return isinstance(other, ClanModelMorphism) and \
            [sorted(c.items(), key=repr) for c in self.comps] == \
            [sorted(c.items(), key=repr) for c in other.comps]

    def __hash__(self):
        return hash(tuple(tuple(sorted(c.items(), key=repr))
                          for c in self.comps))


def clan_hom_set(a: ClanModel, b: ClanModel) -> list[ClanModelMorphism]:
    """All natural transformations a -> b, deterministic order."""
    cat = a.clan.cat
    out = []
    slots = [(o, x) for o in range(cat.n_obj) for x in a.ob[o]]
    assign: dict[tuple[int, object], object] = {}

    def consistent() -> bool:
        for f, (s, t) in enumerate(cat.arrows):
            for x in a.ob[s]:
                lx = assign.get((s, x))
                if lx is None:
                    continue
                ly = assign.get((t, a.ar[f][x]))
                if ly is None:
                    continue
                if b.ar[f][lx] != ly:
                    return False
        return True

    def bt(i):
        if i == len(slots):
            comps = [dict() for _ in range(cat.n_obj)]
            for (o, x), y in assign.items():
                comps[o][x] = y
            out.append(ClanModelMorphism(a, b, comps, check=False))
            return
        o, x = slots[i]
        for y in b.ob[o]:
            assign[(o, x)] = y
            if consistent():
                bt(i + 1)
            del assign[(o, x)]

    bt(0)
    return out


def clan_model_full(f: ClanModelMorphism) -> tuple[bool, Optional[dict]]:
    """Weak-pullback condition at every display of the underlying clan."""
    clan = f.src.clan
    cat = clan.cat
    for p in sorted(clan.displays):
        gp, g = cat.src(p), cat.tgt(p)
        for a in f.src.ob[g]:
            fa = f.comps[g][a]
            for bp in f.dst.ob[gp]:
                if f.dst.ar[p][bp] != fa:
                    continue
                if not any(f.src.ar[p][ap] == a and f.comps[gp][ap] == bp
                           for ap in f.src.ob[gp]):
                    return False, {"display": p, "base_element": a,
                                   "target_element": bp}
    return True, None


# ---------------------------------------------------------------------------
# Category of elements


@dataclass
class ElCoclan:
    """El(A) as a finite category with co-display arrows.

    Objects are pairs (clan object, element); an arrow (G,x) -> (D,y) is a
    clan arrow u: D -> G with A(u)(y) = x, so the projection lands in the
    opposite of the clan.  Co-displays are the arrows over displays.
    """

    cat: FinCat
    codisplays: frozenset[int]
    objects: list[tuple[int, object]]
    arrow_under: list[int]

    def dual_clan_report(self):
        return check_clan(self.cat.op(), self.codisplays)


def el_coclan(a: ClanModel) -> ElCoclan:
    clan = a.clan
    cat = clan.cat
    objects = [(o, x) for o in range(cat.n_obj) for x in a.ob[o]]
    ix = {ox: i for i, ox in enumerate(objects)}
    arrows = []
    under = []
    names = []
    arrow_ix: dict[tuple[int, int, int], int] = {}
    for i, (g, x) in enumerate(objects):
        for j, (d, y) in enumerate(objects):
            for u in cat.hom(d, g):
                if a.ar[u][y] == x:
                    arrow_ix[(i, j, u)] = len(arrows)
                    arrows.append((i, j))
                    under.append(u)
                    names.append(f"{cat.arrow_names[u]}@{i}->{j}")
    comp = {}
    for (i, j, u), e1 in arrow_ix.items():
        for (j2, k, v), e2 in arrow_ix.items():
            if j2 != j:
                continue
            comp[(e2, e1)] = arrow_ix[(i, k, cat.comp[(u, v)])]
    ids = [arrow_ix[(i, i, cat.ids[o])] for i, (o, x) in enumerate(objects)]
    el = FinCat(len(objects), arrows, comp, ids,
                obj_names=[f"({cat.obj_names[o]},{x!r})" for o, x in objects],
                arrow_names=names)
    codisp = frozenset(e for (i, j, u), e in arrow_ix.items()
                       if u in clan.displays)
    return ElCoclan(el, codisp, objects, under)
