"""Explicit finite categories, functors, and display-map (clan) structure.

Everything here is checked exhaustively: composition tables are validated
for associativity and units, pullbacks are found by brute-force search
over candidate cones with lexicographic tie-breaking, and the clan axioms
are verified with concrete witnesses on failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


class FinCatError(ValueError):
    pass


class FinCat:
    """A finite category: object/arrow lists and a total composition table."""

    def __init__(self, n_obj: int, arrows: list[tuple[int, int]],
                 comp: dict[tuple[int, int], int], ids: list[int],
                 obj_names: Optional[list[str]] = None,
                 arrow_names: Optional[list[str]] = None,
                 check: bool = True):
        self.n_obj = n_obj
        self.arrows = list(arrows)
        self.comp = dict(comp)
        self.ids = list(ids)
        self.obj_names = obj_names or [f"o{i}" for i in range(n_obj)]
        self.arrow_names = arrow_names or [f"a{i}" for i in range(len(arrows))]
        self._hom: dict[tuple[int, int], list[int]] = {}
        for i, (s, t) in enumerate(self.arrows):
            self._hom.setdefault((s, t), []).append(i)
        if check:
            bad = self.violations()
            if bad:
                raise FinCatError("; ".join(bad[:3]))

    # -- basic structure ----------------------------------------------------

    def src(self, f: int) -> int:
        return self.arrows[f][0]

    def tgt(self, f: int) -> int:
        return self.arrows[f][1]

    def n_arr(self) -> int:
        return len(self.arrows)

    def hom(self, a: int, b: int) -> list[int]:
        return self._hom.get((a, b), [])

    def then(self, f: int, g: int) -> int:
        """g after f (f: a->b, g: b->c)."""
        return self.comp[(g, f)]

    def violations(self) -> list[str]:
        out = []
        if len(self.ids) != self.n_obj:
            out.append("missing identities")
            return out
        for o, i in enumerate(self.ids):
            if self.arrows[i] != (o, o):
                out.append(f"id of object {o} has wrong endpoints")
        for f in range(self.n_arr()):
            for g in range(self.n_arr()):
                if self.tgt(f) == self.src(g):
                    h = self.comp.get((g, f))
                    if h is None:
                        out.append(f"composition undefined for ({g},{f})")
                        continue
                    if self.arrows[h] != (self.src(f), self.tgt(g)):
                        out.append(f"composite ({g},{f}) has wrong endpoints")
                elif (g, f) in self.comp:
                    out.append(f"composition defined for non-composable ({g},{f})")
        if out:
            return out
        for f in range(self.n_arr()):
            if self.comp.get((f, self.ids[self.src(f)])) != f:
                out.append(f"right unit fails at arrow {f}")
            if self.comp.get((self.ids[self.tgt(f)], f)) != f:
                out.append(f"left unit fails at arrow {f}")
        for f in range(self.n_arr()):
            for g in range(self.n_arr()):
                if self.tgt(f) != self.src(g):
                    continue
                for h in range(self.n_arr()):
                    if self.tgt(g) != self.src(h):
                        continue
                    if self.comp[(h, self.comp[(g, f)])] != \
                       self.comp[(self.comp[(h, g)], f)]:
                        out.append(f"associativity fails at ({h},{g},{f})")
        return out

    # -- derived notions ----------------------------------------------------

    def inverse(self, f: int) -> Optional[int]:
        a, b = self.arrows[f]
        for g in self.hom(b, a):
            if self.comp[(g, f)] == self.ids[a] and self.comp[(f, g)] == self.ids[b]:
                return g
        return None

    def is_iso(self, f: int) -> bool:
        return self.inverse(f) is not None

    def isos(self) -> list[int]:
        return [f for f in range(self.n_arr()) if self.is_iso(f)]

    def terminal(self) -> Optional[int]:
        for o in range(self.n_obj):
            if all(len(self.hom(x, o)) == 1 for x in range(self.n_obj)):
                return o
        return None

    def initial(self) -> Optional[int]:
        for o in range(self.n_obj):
            if all(len(self.hom(o, x)) == 1 for x in range(self.n_obj)):
                return o
        return None

    def idempotents(self) -> list[int]:
        return [f for f in range(self.n_arr())
                if self.src(f) == self.tgt(f) and self.comp[(f, f)] == f
                and f != self.ids[self.src(f)]]

    def op(self) -> "FinCat":
        arrows = [(t, s) for (s, t) in self.arrows]
        comp = {(f, g): h for (g, f), h in self.comp.items()}
        return FinCat(self.n_obj, arrows, comp, list(self.ids),
                      list(self.obj_names), list(self.arrow_names), check=False)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        n = self.n_arr()
        flat = [-1] * (n * n)
        for (g, f), h in self.comp.items():
            flat[g * n + f] = h
        return {
            "objects": list(self.obj_names),
            "arrows": [{"name": self.arrow_names[i], "src": s, "tgt": t}
                       for i, (s, t) in enumerate(self.arrows)],
            "identities": list(self.ids),
            "composition": flat,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FinCat":
        objs = data["objects"]
        arrows = [(a["src"], a["tgt"]) for a in data["arrows"]]
        names = [a.get("name", f"a{i}") for i, a in enumerate(data["arrows"])]
        n = len(arrows)
        comp = {}
        flat = data["composition"]
        for g in range(n):
            for f in range(n):
                h = flat[g * n + f]
                if h >= 0:
                    comp[(g, f)] = h
        return cls(len(objs), arrows, comp, data["identities"],
                   obj_names=list(objs), arrow_names=names)


def pullback(cat: FinCat, p: int, s: int) -> Optional[dict]:
    """A pullback of the cospan (p: G'->G, s: D->G), or None.

    Returns {"apex", "to_dom_p" (the leg over s, landing in src p),
    "to_dom_s" (the leg landing in src s)} chosen lexicographically.
    """
    if cat.tgt(p) != cat.tgt(s):
        raise FinCatError("pullback needs a cospan")
    gp, d = cat.src(p), cat.src(s)
    for apex in range(cat.n_obj):
        for sp in cat.hom(apex, gp):
            for q in cat.hom(apex, d):
                if cat.comp[(p, sp)] != cat.comp[(s, q)]:
                    continue
                if _is_limit_cone(cat, p, s, apex, sp, q):
                    return {"apex": apex, "to_dom_p": sp, "to_dom_s": q}
    return None


def _is_limit_cone(cat: FinCat, p: int, s: int, apex: int, sp: int, q: int) -> bool:
    """Universal property of (apex, sp: apex->src p, q: apex->src s)."""
    for x in range(cat.n_obj):
        for b in cat.hom(x, cat.src(p)):
            for a in cat.hom(x, cat.src(s)):
                if cat.comp[(p, b)] != cat.comp[(s, a)]:
                    continue
                mediators = [h for h in cat.hom(x, apex)
                             if cat.comp[(sp, h)] == b and cat.comp[(q, h)] == a]
                if len(mediators) != 1:
                    return False
    return True


# ---------------------------------------------------------------------------
# Clans


@dataclass
class ClanViolation:
    axiom: str
    message: str
    witness: dict

    def to_json(self):
        return {"axiom": self.axiom, "message": self.message,
                "witness": self.witness}


@dataclass
class ClanReport:
    ok: bool
    violations: list[ClanViolation]

    def to_json(self):
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


class FinClan:
    def __init__(self, cat: FinCat, displays: frozenset[int], check: bool = True):
        self.cat = cat
        self.displays = frozenset(displays)
        if check:
            rep = check_clan(cat, self.displays)
            if not rep.ok:
                raise FinCatError(
                    f"clan axioms fail: {rep.violations[0].message}")

    def to_json(self) -> dict:
        data = self.cat.to_json()
        data["displays"] = sorted(self.displays)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "FinClan":
        return cls(FinCat.from_json(data), frozenset(data["displays"]))


def check_clan(cat: FinCat, displays: frozenset[int]) -> ClanReport:
    """Verify the three clan axioms; violations carry witnesses."""
    vs: list[ClanViolation] = []
    # (2) isomorphism and composition closure
    for f in cat.isos():
        if f not in displays:
            vs.append(ClanViolation(
                "iso-closure", f"isomorphism {cat.arrow_names[f]} is not display",
                {"arrow": f}))
    for p in sorted(displays):
        for q in sorted(displays):
            if cat.tgt(q) == cat.src(p):
                c = cat.comp[(p, q)]
                if c not in displays:
                    vs.append(ClanViolation(
                        "composition-closure",
                        f"composite of displays {q},{p} is not display",
                        {"first": q, "second": p, "composite": c}))
    # (3) terminal object with display projections
    t = cat.terminal()
    if t is None:
        vs.append(ClanViolation("terminal", "no terminal object", {}))
    else:
        for o in range(cat.n_obj):
            proj = cat.hom(o, t)[0]
            if proj not in displays:
                vs.append(ClanViolation(
                    "terminal-projection",
                    f"terminal projection from {cat.obj_names[o]} is not display",
                    {"object": o, "projection": proj}))
    # (1) pullbacks of displays along arbitrary maps, with display legs
    for p in sorted(displays):
        for s in range(cat.n_arr()):
            if cat.tgt(s) != cat.tgt(p):
                continue
            found = None
            for apex in range(cat.n_obj):
                for sp in cat.hom(apex, cat.src(p)):
                    for q in cat.hom(apex, cat.src(s)):
                        if q not in displays:
                            continue
                        if cat.comp[(p, sp)] != cat.comp[(s, q)]:
                            continue
                        if _is_limit_cone(cat, p, s, apex, sp, q):
                            found = (apex, sp, q)
                            break
                    if found:
                        break
                if found:
                    break
            if not found:
                vs.append(ClanViolation(
                    "display-pullback",
                    f"no pullback with display leg for display "
                    f"{cat.arrow_names[p]} along {cat.arrow_names[s]}",
                    {"display": p, "along": s}))
    return ClanReport(not vs, vs)


def full_display_clan(cat: FinCat) -> FinClan:
    """All arrows display (requires all finite limits along them)."""
    return FinClan(cat, frozenset(range(cat.n_arr())))


def slice_clan(clan: FinClan, g: int) -> tuple[FinClan, list[int]]:
    """The clan of displays into g; arrows are commuting triangles.

    Returns the slice clan together with the list of display arrows of the
    base clan serving as its objects (index-aligned).
    """
    cat = clan.cat
    objs = [p for p in sorted(clan.displays) if cat.tgt(p) == g]
    obj_ix = {p: i for i, p in enumerate(objs)}
    arrows = []
    names = []
    arrow_ix = {}
    for i, p in enumerate(objs):
        for j, q in enumerate(objs):
            for h in cat.hom(cat.src(p), cat.src(q)):
                if cat.comp[(q, h)] == p:
                    arrow_ix[(i, j, h)] = len(arrows)
                    arrows.append((i, j))
                    names.append(f"{cat.arrow_names[h]}:{i}->{j}")
    comp = {}
    for (i, j, h1), a1 in arrow_ix.items():
        for (j2, k, h2), a2 in arrow_ix.items():
            if j2 != j:
                continue
            comp[(a2, a1)] = arrow_ix[(i, k, cat.comp[(h2, h1)])]
    ids = [arrow_ix[(i, i, cat.ids[cat.src(p)])] for i, p in enumerate(objs)]
    scat = FinCat(len(objs), arrows, comp, ids,
                  obj_names=[cat.arrow_names[p] for p in objs],
                  arrow_names=names)
    displays = frozenset(a for (i, j, h), a in arrow_ix.items()
                         if h in clan.displays)
    return FinClan(scat, displays), objs


def is_cauchy_complete(clan: FinClan) -> tuple[bool, Optional[dict]]:
    """Idempotents split and displays are closed under retracts."""
    cat = clan.cat
    for e in cat.idempotents():
        if not _splits(cat, e):
            return False, {"kind": "unsplit-idempotent", "arrow": e,
                           "name": cat.arrow_names[e]}
    # retracts in the arrow category: f is a retract of p via (a, b, c, d)
    # with p.a = b.f, f.c = d.p, c.a = id, d.b = id
    for p in sorted(clan.displays):
        for f in range(cat.n_arr()):
            if f in clan.displays:
                continue
            if _arrow_retract_of(cat, f, p):
                return False, {"kind": "display-retract", "display": p,
                               "retract": f, "name": cat.arrow_names[f]}
    return True, None


def _splits(cat: FinCat, e: int) -> bool:
    x = cat.src(e)
    for y in range(cat.n_obj):
        for r in cat.hom(x, y):
            for s in cat.hom(y, x):
                if cat.comp[(s, r)] == e and cat.comp[(r, s)] == cat.ids[y]:
                    return True
    return False


def _arrow_retract_of(cat: FinCat, f: int, p: int) -> bool:
    fx, fy = cat.arrows[f]
    px, py = cat.arrows[p]
    for a in cat.hom(fx, px):
        for c in cat.hom(px, fx):
            if cat.comp[(c, a)] != cat.ids[fx]:
                continue
            for b in cat.hom(fy, py):
                if cat.comp[(p, a)] != cat.comp[(b, f)]:
                    continue
                for d in cat.hom(py, fy):
                    if cat.comp[(d, b)] != cat.ids[fy]:
                        continue
                    if cat.comp[(f, c)] == cat.comp[(d, p)]:
                        return True
    return False


# ---------------------------------------------------------------------------
# Functors


class FinFunctor:
    def __init__(self, dom: FinCat, cod: FinCat, obj_map: list[int],
                 arr_map: list[int], check: bool = True):
        self.dom = dom
        self.cod = cod
        self.obj_map = list(obj_map)
        self.arr_map = list(arr_map)
        if check and not self.is_functor():
            raise FinCatError("not a functor")

    def is_functor(self) -> bool:
        d, c = self.dom, self.cod
        if len(self.obj_map) != d.n_obj or len(self.arr_map) != d.n_arr():
            return False
        for f, (s, t) in enumerate(d.arrows):
            g = self.arr_map[f]
            if c.arrows[g] != (self.obj_map[s], self.obj_map[t]):
                return False
        for o in range(d.n_obj):
            if self.arr_map[d.ids[o]] != c.ids[self.obj_map[o]]:
                return False
        for f in range(d.n_arr()):
            for g in range(d.n_arr()):
                if d.tgt(f) != d.src(g):
                    continue
                if self.arr_map[d.comp[(g, f)]] != \
                   c.comp[(self.arr_map[g], self.arr_map[f])]:
                    return False
        return True

    def then(self, other: "FinFunctor") -> "FinFunctor":
        assert self.cod is other.dom or self.cod.to_json() == other.dom.to_json()
        return FinFunctor(self.dom, other.cod,
                          [other.obj_map[o] for o in self.obj_map],
                          [other.arr_map[a] for a in self.arr_map], check=False)

    def __eq__(self, other):
        return (isinstance(other, FinFunctor) and self.obj_map == other.obj_map
                and self.arr_map == other.arr_map)

    def __hash__(self):
        return hash((tuple(self.obj_map), tuple(self.arr_map)))

    def to_json(self) -> dict:
        return {"objects": self.obj_map, "arrows": self.arr_map}


def identity_functor(cat: FinCat) -> FinFunctor:
    return FinFunctor(cat, cat, list(range(cat.n_obj)),
                      list(range(cat.n_arr())), check=False)


def all_functors(dom: FinCat, cod: FinCat) -> list[FinFunctor]:
    """All functors dom -> cod, deterministic order, backtracking search."""
    out: list[FinFunctor] = []
    n = dom.n_obj
    obj_choice = [list(range(cod.n_obj))] * n

    def assign_arrows(obj_map: list[int]):
        arr_map = [-1] * dom.n_arr()
        for o in range(n):
            arr_map[dom.ids[o]] = cod.ids[obj_map[o]]
        # choose images for non-identity arrows in index order
        free = [f for f in range(dom.n_arr()) if arr_map[f] < 0]

        def bt(i: int):
            if i == len(free):
                F = FinFunctor(dom, cod, obj_map[:], arr_map[:], check=False)
                if F.is_functor():
                    out.append(F)
                return
            f = free[i]
            s, t = dom.arrows[f]
            for g in cod.hom(obj_map[s], obj_map[t]):
                arr_map[f] = g
                if _partial_ok(dom, cod, arr_map):
                    bt(i + 1)
                arr_map[f] = -1

        bt(0)

    def objs(i: int, acc: list[int]):
        if i == n:
            assign_arrows(acc)
            return
        for o in obj_choice[i]:
            objs(i + 1, acc + [o])

    objs(0, [])
    return out


def _partial_ok(dom: FinCat, cod: FinCat, arr_map: list[int]) -> bool:
    for f in range(dom.n_arr()):
        if arr_map[f] < 0:
            continue
        for g in range(dom.n_arr()):
            if arr_map[g] < 0 or dom.tgt(f) != dom.src(g):
                continue
            h = dom.comp[(g, f)]
            if arr_map[h] >= 0 and \
               cod.comp[(arr_map[g], arr_map[f])] != arr_map[h]:
                return False
    return True


# ---------------------------------------------------------------------------
# Small standard categories

def discrete(n: int) -> FinCat:
    arrows = [(i, i) for i in range(n)]
    comp = {(i, i): i for i in range(n)}
    return FinCat(n, arrows, comp, list(range(n)),
                  obj_names=[str(i) for i in range(n)])


def terminal_cat() -> FinCat:
    return discrete(1)


def interval_cat() -> FinCat:
    """The interval: two objects, one arrow 0 -> 1."""
    arrows = [(0, 0), (1, 1), (0, 1)]
    comp = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2}
    return FinCat(2, arrows, comp, [0, 1], obj_names=["0", "1"],
                  arrow_names=["id0", "id1", "u"])


def parallel_pair_cat() -> FinCat:
    """Two objects with two parallel arrows between them."""
    arrows = [(0, 0), (1, 1), (0, 1), (0, 1)]
    comp = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2, (3, 0): 3, (1, 3): 3}
    return FinCat(2, arrows, comp, [0, 1], obj_names=["a", "b"],
                  arrow_names=["ida", "idb", "p", "q"])


def empty_cat() -> FinCat:
    return FinCat(0, [], {}, [])


def coproduct_cat(a: FinCat, b: FinCat) -> FinCat:
    arrows = list(a.arrows) + [(s + a.n_obj, t + a.n_obj) for s, t in b.arrows]
    na = a.n_arr()
    comp = dict(a.comp)
    for (g, f), h in b.comp.items():
        comp[(g + na, f + na)] = h + na
    ids = list(a.ids) + [i + na for i in b.ids]
    return FinCat(a.n_obj + b.n_obj, arrows, comp, ids,
                  obj_names=[f"l.{n}" for n in a.obj_names] +
                            [f"r.{n}" for n in b.obj_names],
                  arrow_names=[f"l.{n}" for n in a.arrow_names] +
                              [f"r.{n}" for n in b.arrow_names])
