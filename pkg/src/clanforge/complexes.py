"""Finite posets, sieve pushouts, cell complexes, and the staged colimit.

A finite complex is a poset-indexed family of cell attachments: each
element carries an object and a co-display attaching map from the colimit
of its strictly-lower part.  Colimits are computed by the recursive
pushout over a maximal element, inclusions of complexes map to co-display
arrows (composites of pushouts of the attachments), and joins follow the
cell-reuse-or-pushout induction.  Backends only need an initial object,
pushouts along co-displays, and arrow equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional


# ---------------------------------------------------------------------------
# Posets and sieves


class FinPoset:
    def __init__(self, n: int, le: set[tuple[int, int]],
                 names: Optional[list[str]] = None, check: bool = True):
        self.n = n
        self.le = frozenset(le) | frozenset((i, i) for i in range(n))
        self.names = names or [str(i) for i in range(n)]
        if check:
            bad = self.violations()
            if bad:
                raise ValueError(bad[0])

    def violations(self) -> list[str]:
        out = []
        for (a, b) in self.le:
            if not (0 <= a < self.n and 0 <= b < self.n):
                return [f"order pair out of range: {(a, b)}"]
        for (a, b) in self.le:
            if a != b and (b, a) in self.le:
                out.append(f"antisymmetry fails at {(a, b)}")
        for (a, b) in self.le:
            for (b2, c) in self.le:
                if b == b2 and (a, c) not in self.le:
                    out.append(f"transitivity fails at {(a, b, c)}")
        return out

    def leq(self, a: int, b: int) -> bool:
        return (a, b) in self.le

    def lower(self, x: int) -> frozenset[int]:
        return frozenset(y for y in range(self.n) if self.leq(y, x))

    def strictly_lower(self, x: int) -> frozenset[int]:
        return frozenset(y for y in range(self.n) if y != x and self.leq(y, x))

    def maximal(self, subset: frozenset[int]) -> list[int]:
        return [x for x in subset
                if not any(y != x and self.leq(x, y) for y in subset)]

    def is_sieve(self, subset: frozenset[int]) -> bool:
        return all(y in subset
                   for x in subset for y in range(self.n) if self.leq(y, x))

    def sieves(self) -> list[frozenset[int]]:
        out = []
        for r in range(self.n + 1):
            for combo in itertools.combinations(range(self.n), r):
                s = frozenset(combo)
                if self.is_sieve(s):
                    out.append(s)
        return out

    def fingerprint(self) -> tuple:
        return (self.n, tuple(sorted(self.le)))

    def __eq__(self, other):
        return isinstance(other, FinPoset) and \
            self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())


@dataclass(frozen=True)
class MonotoneMap:
    dom: FinPoset
    cod: FinPoset
    table: tuple[int, ...]

    def __post_init__(self):
        for (a, b) in self.dom.le:
            if not self.cod.leq(self.table[a], self.table[b]):
                raise ValueError("not monotone")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def then(self, other: "MonotoneMap") -> "MonotoneMap":
        return MonotoneMap(self.dom, other.cod,
                           tuple(other.table[v] for v in self.table))

    def is_sieve_inclusion(self) -> bool:
        f = self.table
        # order-reflecting (hence injective on a poset)
        for a in range(self.dom.n):
            for b in range(self.dom.n):
                if self.cod.leq(f[a], f[b]) and not self.dom.leq(a, b):
                    return False
        image = set(f)
        if len(image) != self.dom.n:
            return False
        for y in image:
            for z in range(self.cod.n):
                if self.cod.leq(z, y) and z not in image:
                    return False
        return True


def sieve_inclusion(dom: FinPoset, cod: FinPoset, table) -> MonotoneMap:
    m = MonotoneMap(dom, cod, tuple(table))
    if not m.is_sieve_inclusion():
        raise ValueError("not a sieve inclusion")
    return m


def pushout_sieves(f: MonotoneMap, g: MonotoneMap) \
        -> tuple[FinPoset, MonotoneMap, MonotoneMap]:
    """Pushout of two sieve inclusions out of a common poset.

    The underlying set is the amalgam; the order is given clause-by-clause
    over the two summands, with cross pairs mediated by the shared part.
    """
    if not (f.is_sieve_inclusion() and g.is_sieve_inclusion()):
        raise ValueError("pushout_sieves needs sieve inclusions")
    P, Q, R = f.dom, f.cod, g.cod
    f_img = {f(x): x for x in range(P.n)}
    g_img = {g(x): x for x in range(P.n)}
    # elements: Q glued with R along P
    elems: list[tuple] = [("q", q) for q in range(Q.n)]
    of_r = {}
    for r in range(R.n):
        if r in g_img:
            of_r[r] = ("q", f(g_img[r]))
        else:
            of_r[r] = ("r", r)
            elems.append(("r", r))
    ix = {e: i for i, e in enumerate(elems)}

    def s1(q):
        return ix[("q", q)]

    def s2(r):
        return ix[of_r[r]]

    le = set()
    for x in range(Q.n):
        for y in range(Q.n):
            if Q.leq(x, y):
                le.add((s1(x), s1(y)))
    for x in range(R.n):
        for y in range(R.n):
            if R.leq(x, y):
                le.add((s2(x), s2(y)))
    for x in range(Q.n):
        for y in range(R.n):
            # s1(x) <= s2(y) iff some z has x = f(z) and g(z) <= y
            if x in f_img and R.leq(g(f_img[x]), y):
                le.add((s1(x), s2(y)))
            if y in g_img and Q.leq(f(g_img[y]), x):
                le.add((s2(y), s1(x)))
    out = FinPoset(len(elems), le,
                   names=[f"{t}{v}" for (t, v) in elems])
    m1 = MonotoneMap(Q, out, tuple(s1(q) for q in range(Q.n)))
    m2 = MonotoneMap(R, out, tuple(s2(r) for r in range(R.n)))
    return out, m1, m2


def brute_force_poset_pushout(f: MonotoneMap, g: MonotoneMap) \
        -> Optional[tuple[FinPoset, MonotoneMap, MonotoneMap]]:
    """Oracle: amalgamated set with the transitive closure of both orders.

    Returns None when the closure collapses (fails antisymmetry), in which
    case the pushout in posets does not have the amalgam as carrier.
    """
    P, Q, R = f.dom, f.cod, g.cod
    g_img = {g(x): x for x in range(P.n)}
    elems: list[tuple] = [("q", q) for q in range(Q.n)]
    of_r = {}
    for r in range(R.n):
        if r in g_img:
            of_r[r] = ("q", f(g_img[r]))
        else:
            of_r[r] = ("r", r)
            elems.append(("r", r))
    ix = {e: i for i, e in enumerate(elems)}
    le = set()
    for x in range(Q.n):
        for y in range(Q.n):
            if Q.leq(x, y):
                le.add((ix[("q", x)], ix[("q", y)]))
    for x in range(R.n):
        for y in range(R.n):
            if R.leq(x, y):
                le.add((ix[of_r[x]], ix[of_r[y]]))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(le):
            for (b2, c) in list(le):
                if b == b2 and (a, c) not in le:
                    le.add((a, c))
                    changed = True
    for (a, b) in le:
        if a != b and (b, a) in le:
            return None
    out = FinPoset(len(elems), le)
    m1 = MonotoneMap(Q, out, tuple(ix[("q", q)] for q in range(Q.n)))
    m2 = MonotoneMap(R, out, tuple(ix[of_r[r]] for r in range(R.n)))
    return out, m1, m2


# ---------------------------------------------------------------------------
# Cocomplete backends


class CoclanBackendError(RuntimeError):
    pass


class CocompleteBackend:
    """Initial object, pushouts along co-displays, and arrow equality."""

    def initial(self):
        raise NotImplementedError

    def initial_arrow(self, x):
        raise NotImplementedError

    def identity(self, x):
        raise NotImplementedError

    def compose(self, g, f):
        raise NotImplementedError

    def source(self, f):
        raise NotImplementedError

    def target(self, f):
        raise NotImplementedError

    def eq_arrows(self, f, g) -> bool:
        return f == g

    def eq_objects(self, x, y) -> bool:
        return x == y

    def is_codisplay(self, f) -> bool:
        raise NotImplementedError

    def pushout(self, e, f):
        """Pushout of the co-display e along f; returns
        (obj, f_pushed: cod e -> obj, e_pushed: cod f -> obj, factor)."""
        raise NotImplementedError


@dataclass(frozen=True)
class SetMap:
    src: tuple
    tgt: tuple
    table: tuple  # pairs (x, y), sorted

    def as_dict(self):
        return dict(self.table)

    def __call__(self, x):
        return self.as_dict()[x]


def set_map(src, tgt, mapping) -> SetMap:
    src_t = tuple(sorted(src, key=repr))
    tgt_t = tuple(sorted(tgt, key=repr))
    table = tuple(sorted(((x, mapping[x]) for x in src_t), key=repr))
    for x, y in table:
        if y not in tgt_t:
            raise CoclanBackendError("map leaves its target")
    return SetMap(src_t, tgt_t, table)


class FinSetBackend(CocompleteBackend):
    """Finite sets with injections as co-displays."""

    def initial(self):
        return ()

    def initial_arrow(self, x):
        return set_map((), x, {})

    def identity(self, x):
        return set_map(x, x, {v: v for v in x})

    def compose(self, g: SetMap, f: SetMap) -> SetMap:
        gd = g.as_dict()
        return set_map(f.src, g.tgt, {x: gd[y] for x, y in f.table})

    def source(self, f: SetMap):
        return f.src

    def target(self, f: SetMap):
        return f.tgt

    def is_codisplay(self, f: SetMap) -> bool:
        vals = [y for _, y in f.table]
        return len(set(vals)) == len(vals)

    def pushout(self, e: SetMap, f: SetMap):
        if not self.is_codisplay(e):
            raise CoclanBackendError("pushout along a non-injection")
        i_set, j_set, x_set = e.src, e.tgt, f.tgt
        ed, fd = e.as_dict(), f.as_dict()
        back = {ed[i]: i for i in i_set}
        new = [j for j in j_set if j not in back]
        # keep attached names unless they clash with the base
        name = {j: j if j not in x_set else ("cell", j) for j in new}
        obj = tuple(sorted(list(x_set) + [name[j] for j in new], key=repr))

        def push_j(j):
            return fd[back[j]] if j in back else name[j]

        f_pushed = set_map(j_set, obj, {j: push_j(j) for j in j_set})
        e_pushed = set_map(x_set, obj, {x: x for x in x_set})
        new_names = {name[j]: j for j in new}

        def factor(q_x: SetMap, q_j: SetMap) -> SetMap:
            qx, qj = q_x.as_dict(), q_j.as_dict()
            m = {}
            for v in obj:
                if v in new_names:
                    m[v] = qj[new_names[v]]
                else:
                    m[v] = qx[v]
            return set_map(obj, q_x.tgt, m)

        return obj, f_pushed, e_pushed, factor


class PosetBackend(CocompleteBackend):
    """Finite posets with sieve inclusions as co-displays."""

    def initial(self):
        return FinPoset(0, set())

    def initial_arrow(self, x: FinPoset):
        return MonotoneMap(FinPoset(0, set()), x, ())

    def identity(self, x: FinPoset):
        return MonotoneMap(x, x, tuple(range(x.n)))

    def compose(self, g: MonotoneMap, f: MonotoneMap):
        return f.then(g)

    def source(self, f: MonotoneMap):
        return f.dom

    def target(self, f: MonotoneMap):
        return f.cod

    def is_codisplay(self, f: MonotoneMap) -> bool:
        return f.is_sieve_inclusion()

    def pushout(self, e: MonotoneMap, f: MonotoneMap):
        if not self.is_codisplay(e):
            raise CoclanBackendError("pushout along a non-sieve-inclusion")
        # pushouts of sieve inclusions along arbitrary monotone maps: build
        # the amalgam with images identified through f, then close
        P, J, X = e.dom, e.cod, f.cod
        back = {e(x): x for x in range(P.n)}
        new = [j for j in range(J.n) if j not in back]
        n = X.n + len(new)
        jix = {j: X.n + k for k, j in enumerate(new)}

        def push_j(j):
            return f(back[j]) if j in back else jix[j]

        le = set((a, b) for (a, b) in X.le)
        for a in range(J.n):
            for b in range(J.n):
                if J.leq(a, b):
                    le.add((push_j(a), push_j(b)))
        changed = True
        while changed:
            changed = False
            for (a, b) in list(le):
                for (b2, c) in list(le):
                    if b == b2 and (a, c) not in le:
                        le.add((a, c))
                        changed = True
        for (a, b) in le:
            if a != b and (b, a) in le:
                raise CoclanBackendError("poset pushout collapses")
        obj = FinPoset(n, le)
        f_pushed = MonotoneMap(J, obj, tuple(push_j(j) for j in range(J.n)))
        e_pushed = MonotoneMap(X, obj, tuple(range(X.n)))

        def factor(q_x: MonotoneMap, q_j: MonotoneMap) -> MonotoneMap:
            table = [None] * n
            for x in range(X.n):
                table[x] = q_x(x)
            for j in new:
                table[jix[j]] = q_j(j)
            return MonotoneMap(obj, q_x.cod, tuple(table))

        return obj, f_pushed, e_pushed, factor


class FinCoclanBackend(CocompleteBackend):
    """An explicit finite category with chosen co-display arrows; pushouts
    are found by exhaustive search and verified by their universal
    property."""

    def __init__(self, cat, codisplays: frozenset[int]):
        self.cat = cat
        self.codisplays = frozenset(codisplays)

    def objects(self):
        return list(range(self.cat.n_obj))

    def initial(self):
        i = self.cat.initial()
        if i is None:
            raise CoclanBackendError("no initial object")
        return i

    def initial_arrow(self, x):
        return self.cat.hom(self.initial(), x)[0]

    def identity(self, x):
        return self.cat.ids[x]

    def compose(self, g, f):
        return self.cat.comp[(g, f)]

    def source(self, f):
        return self.cat.src(f)

    def target(self, f):
        return self.cat.tgt(f)

    def is_codisplay(self, f) -> bool:
        return f in self.codisplays or f in self.cat.ids

    def codisplays_from(self, x) -> list[int]:
        return [f for f in sorted(self.codisplays) if self.cat.src(f) == x]

    def pushout(self, e, f):
        cat = self.cat
        if not self.is_codisplay(e):
            raise CoclanBackendError("pushout along a non-co-display")
        i_obj = cat.src(e)
        assert cat.src(f) == i_obj
        j_obj, x_obj = cat.tgt(e), cat.tgt(f)
        for apex in range(cat.n_obj):
            for fp in cat.hom(j_obj, apex):
                for ep in cat.hom(x_obj, apex):
                    if cat.comp[(fp, e)] != cat.comp[(ep, f)]:
                        continue
                    if not self.is_codisplay(ep):
                        continue
                    if self._is_pushout(e, f, apex, fp, ep):
                        def factor(q_x, q_j, _apex=apex, _fp=fp, _ep=ep):
                            z = cat.tgt(q_x)
                            meds = [h for h in cat.hom(_apex, z)
                                    if cat.comp[(h, _ep)] == q_x and
                                    cat.comp[(h, _fp)] == q_j]
                            if len(meds) != 1:
                                raise CoclanBackendError("factor not unique")
                            return meds[0]
                        return apex, fp, ep, factor
        raise CoclanBackendError("no pushout found in the finite co-clan")

    def _is_pushout(self, e, f, apex, fp, ep) -> bool:
        cat = self.cat
        for z in range(cat.n_obj):
            for qx in cat.hom(cat.tgt(f), z):
                for qj in cat.hom(cat.tgt(e), z):
                    if cat.comp[(qj, e)] != cat.comp[(qx, f)]:
                        continue
                    meds = [h for h in cat.hom(apex, z)
                            if cat.comp[(h, ep)] == qx and
                            cat.comp[(h, fp)] == qj]
                    if len(meds) != 1:
                        return False
        return True


@dataclass(frozen=True)
class GMap:
    """A graph morphism (vertices to vertices, edges to edges)."""

    dom: object
    cod: object
    vt: tuple[int, ...]
    et: tuple[int, ...]


class GraphBackend(CocompleteBackend):
    """Finite graphs (standing for free categories) with inclusions as
    co-displays; pushouts are computed vertexwise and edgewise."""

    def initial(self):
        from .casestudy.graphs import FinGraph
        return FinGraph(0, ())

    def initial_arrow(self, x):
        return GMap(self.initial(), x, (), ())

    def identity(self, x):
        return GMap(x, x, tuple(range(x.n_vertices)),
                    tuple(range(len(x.edges))))

    def compose(self, g: GMap, f: GMap) -> GMap:
        return GMap(f.dom, g.cod, tuple(g.vt[v] for v in f.vt),
                    tuple(g.et[e] for e in f.et))

    def source(self, f: GMap):
        return f.dom

    def target(self, f: GMap):
        return f.cod

    def is_codisplay(self, f: GMap) -> bool:
        return len(set(f.vt)) == len(f.vt) and len(set(f.et)) == len(f.et)

    def pushout(self, e: GMap, f: GMap):
        from .casestudy.graphs import FinGraph
        j, x = e.cod, f.cod
        back_v = {e.vt[i]: i for i in range(len(e.vt))}
        back_e = {e.et[i]: i for i in range(len(e.et))}
        new_v = [v for v in range(j.n_vertices) if v not in back_v]
        new_e = [k for k in range(len(j.edges)) if k not in back_e]
        vix = {v: x.n_vertices + i for i, v in enumerate(new_v)}

        def push_v(v):
            return f.vt[back_v[v]] if v in back_v else vix[v]

        edges = list(x.edges)
        eix = {}
        for k in new_e:
            s, t = j.edges[k]
            eix[k] = len(edges)
            edges.append((push_v(s), push_v(t)))

        def push_e(k):
            return f.et[back_e[k]] if k in back_e else eix[k]

        obj = FinGraph(x.n_vertices + len(new_v), tuple(edges))
        f_pushed = GMap(j, obj, tuple(push_v(v) for v in range(j.n_vertices)),
                        tuple(push_e(k) for k in range(len(j.edges))))
        e_pushed = GMap(x, obj, tuple(range(x.n_vertices)),
                        tuple(range(len(x.edges))))

        def factor(q_x: GMap, q_j: GMap) -> GMap:
            vt = list(q_x.vt) + [None] * len(new_v)
            for v in range(j.n_vertices):
                vt[push_v(v)] = q_j.vt[v]
            et = list(q_x.et) + [None] * len(new_e)
            for k in range(len(j.edges)):
                et[push_e(k)] = q_j.et[k]
            return GMap(obj, q_x.cod, tuple(vt), tuple(et))

        return obj, f_pushed, e_pushed, factor


class PresheafCBackend(CocompleteBackend):
    """Set-valued functors on a finite index with pointwise-injective maps
    as co-displays; pushouts are pointwise amalgams."""

    def __init__(self, index):
        from .wfs.backends import PresheafBackend
        self._pb = PresheafBackend(index)
        self.index = index

    def initial(self):
        from .wfs.backends import empty_presheaf
        return empty_presheaf(self.index)

    def initial_arrow(self, x):
        from .wfs.backends import NatTrans
        return NatTrans(self.initial(), x,
                        [dict() for _ in range(self.index.n_obj)], check=False)

    def identity(self, x):
        return self._pb.identity(x)

    def compose(self, g, f):
        return self._pb.compose(g, f)

    def source(self, f):
        return f.src

    def target(self, f):
        return f.dst

    def is_codisplay(self, f) -> bool:
        return self._pb.is_pointwise_injective(f)

    def pushout(self, e, f):
        from .wfs.core import Generator
        gen = Generator("e", e.src, e.dst, e)
        po = self._pb.pushout(gen, f)

        def factor(q_x, q_j):
            return po.factor(q_x, q_j)

        return po.obj, po.coproj, po.incl, factor


# ---------------------------------------------------------------------------
# Finite complexes


@dataclass
class FiniteComplex:
    """A poset of cells with objects and co-display attaching maps.

    `attach[x]` is the arrow from the colimit of the strictly-lower part of
    x (as computed by the engine's canonical recursion) into cells[x]."""

    poset: FinPoset
    cells: dict[int, object]
    attach: dict[int, object]

    def n_cells(self) -> int:
        return self.poset.n


class ComplexEngine:
    """Colimits of complexes over a backend, with memoized sieve data."""

    def __init__(self, backend: CocompleteBackend, complex_: FiniteComplex):
        self.b = backend
        self.c = complex_
        self._data: dict[frozenset, tuple] = {}

    # each sieve U gets (object, legs: {x in U: arrow cells[x] -> obj})
    def colim(self, u: frozenset[int]) -> tuple:
        u = frozenset(u)
        hit = self._data.get(u)
        if hit is not None:
            return hit
        if not u:
            out = (self.b.initial(), {})
            self._data[u] = out
            return out
        z = self._peel(u)
        v = u - {z}
        cv, legs_v = self.colim(v)
        below = self.c.poset.strictly_lower(z) & u
        self.colim(below)
        m = self.incl_arrow(below, v)
        alpha = self.c.attach[z]
        obj, f_pushed, e_pushed, factor = self.b.pushout(alpha, m)
        legs = {x: self.b.compose(e_pushed, legs_v[x]) for x in v}
        legs[z] = f_pushed
        out = (obj, legs)
        self._data[u] = out
        self._factors = getattr(self, "_factors", {})
        self._factors[u] = (z, factor, e_pushed)
        return out

    def _peel(self, u: frozenset[int]) -> int:
        return max(self.c.poset.maximal(u))

    def incl_arrow(self, w: frozenset[int], u: frozenset[int]):
        """The canonical arrow colim(W) -> colim(U) for sieves W <= U."""
        w, u = frozenset(w), frozenset(u)
        if w == u:
            return self.b.identity(self.colim(u)[0])
        z = self._peel(u)
        v = u - {z}
        _, _, e_pushed = self._factor_data(u)
        if z not in w:
            return self.b.compose(e_pushed, self.incl_arrow(w, v))
        # w contains the peel of u: factor w's pushout square through u
        zw = self._peel(w)
        _, factor_w, _ = self._factor_data(w)
        cu, legs_u = self.colim(u)
        if zw == z:
            q_base = self.b.compose(e_pushed, self.incl_arrow(w - {zw}, v))
        else:
            q_base = self.incl_arrow(w - {zw}, u)
        return factor_w(q_base, legs_u[zw])

    def _factor_data(self, u: frozenset[int]):
        self.colim(u)
        return self._factors[u]

    def whole(self):
        return self.colim(frozenset(range(self.c.poset.n)))


def is_complex(backend: CocompleteBackend, c: FiniteComplex,
               max_violations: int = 20) -> dict:
    """Both conditions of the definition, with recursive colimits."""
    violations = []
    p = c.poset
    bad = p.violations()
    if bad:
        return {"ok": False, "violations": [{"kind": "poset", "msg": bad[0]}]}
    eng = ComplexEngine(backend, c)
    for x in range(p.n):
        try:
            cb, _ = eng.colim(p.strictly_lower(x))
        except CoclanBackendError as e:
            violations.append({"kind": "colimit", "cell": x, "msg": str(e)})
            continue
        alpha = c.attach.get(x)
        if alpha is None:
            violations.append({"kind": "attachment-missing", "cell": x})
            continue
        if not backend.is_codisplay(alpha):
            violations.append({"kind": "attachment-not-codisplay", "cell": x})
    # condition (2): distinct cells differ in lower set, object, or attachment
    for x in range(p.n):
        for y in range(x + 1, p.n):
            if p.strictly_lower(x) != p.strictly_lower(y):
                continue
            if not backend.eq_objects(c.cells[x], c.cells[y]):
                continue
            if backend.eq_arrows(c.attach[x], c.attach[y]):
                violations.append({"kind": "duplicate-cell", "cells": [x, y]})
    return {"ok": not violations, "violations": violations[:max_violations]}


def colim_complex(backend: CocompleteBackend, c: FiniteComplex):
    """The colimit object with its legs, by the recursive pushout."""
    eng = ComplexEngine(backend, c)
    return eng.whole()


@dataclass(frozen=True)
class ComplexInclusion:
    sub: FiniteComplex
    sup: FiniteComplex
    table: tuple[int, ...]   # element map sub.poset -> sup.poset

    def valid(self, backend: CocompleteBackend) -> bool:
        m = MonotoneMap(self.sub.poset, self.sup.poset, self.table)
        if not m.is_sieve_inclusion():
            return False
        for x in range(self.sub.poset.n):
            if not backend.eq_objects(self.sub.cells[x],
                                      self.sup.cells[self.table[x]]):
                return False
            if not backend.eq_arrows(self.sub.attach[x],
                                     self.sup.attach[self.table[x]]):
                return False
        return True


def include_to_codisplay(backend: CocompleteBackend, inc: ComplexInclusion):
    """The colimit functor's value on an inclusion, with its certificate.

    The arrow is the canonical inclusion of colimits; the certificate is
    the list of atomic one-cell steps whose pushout legs compose to it."""
    if not inc.valid(backend):
        raise CoclanBackendError("not an inclusion of complexes")
    eng = ComplexEngine(backend, inc.sup)
    image = frozenset(inc.table)
    whole = frozenset(range(inc.sup.poset.n))
    arrow = eng.incl_arrow(image, whole)
    # atomic decomposition: peel maximal elements of sup not in the image
    steps = []
    cur = whole
    while cur != image:
        z = max(x for x in inc.sup.poset.maximal(cur) if x not in image)
        steps.append(z)
        cur = cur - {z}
    steps.reverse()
    return arrow, {"atomic_cells": steps}


def join_complexes(backend: CocompleteBackend, c1: FiniteComplex,
                   c2: FiniteComplex) \
        -> tuple[FiniteComplex, ComplexInclusion, ComplexInclusion]:
    """The join: reuse a matching cell when one exists, else extend by the
    sieve pushout; both arguments include into the result."""
    p1 = c1.poset
    if p1.n == 0:
        ident = tuple(range(c2.poset.n))
        return c2, ComplexInclusion(c1, c2, ()), ComplexInclusion(c2, c2, ident)
    z = max(p1.maximal(frozenset(range(p1.n))))
    rest = _restrict(c1, frozenset(range(p1.n)) - {z})
    r, inc_rest, inc_c2 = join_complexes(backend, rest.complex, c2)
    # look for a cell of r matching z's attachment
    z_lower_in_r = frozenset(inc_rest.table[rest.index_of[x]]
                             for x in p1.strictly_lower(z))
    eng_r = ComplexEngine(backend, r)
    eng_1 = ComplexEngine(backend, c1)
    for y in range(r.poset.n):
        if r.poset.strictly_lower(y) != z_lower_in_r:
            continue
        if not backend.eq_objects(r.cells[y], c1.cells[z]):
            continue
        if _attachments_match(backend, eng_1, c1, z, eng_r, r, y, inc_rest,
                              rest):
            table1 = [None] * p1.n
            for x in range(p1.n):
                if x == z:
                    table1[x] = y
                else:
                    table1[x] = inc_rest.table[rest.index_of[x]]
            return r, ComplexInclusion(c1, r, tuple(table1)), inc_c2
    # no matching cell: extend r with a copy of z
    new_ix = r.poset.n
    le = set(r.poset.le)
    for w in z_lower_in_r:
        le.add((w, new_ix))
    changed = True
    while changed:
        changed = False
        for (a, b) in list(le):
            for (b2, cc) in list(le):
                if b == b2 and (a, cc) not in le:
                    le.add((a, cc))
                    changed = True
    poset = FinPoset(new_ix + 1, le)
    cells = dict(r.cells)
    cells[new_ix] = c1.cells[z]
    attach = dict(r.attach)
    attach[new_ix] = _transport_attachment(backend, eng_1, c1, z, r,
                                           z_lower_in_r, cells[new_ix])
    out = FiniteComplex(poset, cells, attach)
    table1 = [None] * p1.n
    for x in range(p1.n):
        table1[x] = new_ix if x == z else inc_rest.table[rest.index_of[x]]
    table2 = inc_c2.table
    return out, ComplexInclusion(c1, out, tuple(table1)), \
        ComplexInclusion(c2, out, tuple(table2))


@dataclass
class _Restriction:
    complex: FiniteComplex
    index_of: dict[int, int]


def _restrict(c: FiniteComplex, sieve: frozenset[int]) -> _Restriction:
    elems = sorted(sieve)
    ix = {x: i for i, x in enumerate(elems)}
    le = {(ix[a], ix[b]) for (a, b) in c.poset.le
          if a in sieve and b in sieve}
    poset = FinPoset(len(elems), le)
    cells = {ix[x]: c.cells[x] for x in elems}
    attach = {ix[x]: c.attach[x] for x in elems}
    return _Restriction(FiniteComplex(poset, cells, attach), ix)


def _attachments_match(backend, eng_1, c1, z, eng_r, r, y, inc_rest, rest) -> bool:
    """Compare the attaching maps of z (in c1) and y (in r) through the
    canonical identification of the lower-part colimits."""
    # both lower parts have equal cell data cellwise, so both colimits are
    # computed from identical recursions; compare the attachments directly
    lower1 = c1.poset.strictly_lower(z)
    obj1, _ = eng_1.colim(lower1)
    obj2, _ = eng_r.colim(r.poset.strictly_lower(y))
    if not backend.eq_objects(obj1, obj2):
        return False
    return backend.eq_arrows(c1.attach[z], r.attach[y])


def _transport_attachment(backend, eng_1, c1, z, r, lower_in_r, cell_obj):
    """The attachment of the transported cell: the lower parts agree
    cellwise, so the recursive colimit is the same object."""
    lower1 = c1.poset.strictly_lower(z)
    obj1, _ = eng_1.colim(lower1)
    eng_r = ComplexEngine(backend, r)
    obj2, _ = eng_r.colim(lower_in_r)
    if not backend.eq_objects(obj1, obj2):
        raise CoclanBackendError(
            "transported attachment has a different lower colimit")
    return c1.attach[z]


def complexes_equal(backend: CocompleteBackend, c1: FiniteComplex,
                    c2: FiniteComplex) -> bool:
    """Equality up to a poset isomorphism matching cells and attachments."""
    p1, p2 = c1.poset, c2.poset
    if p1.n != p2.n or len(p1.le) != len(p2.le):
        return False
    for perm in itertools.permutations(range(p2.n)):
        ok = True
        for (a, b) in itertools.product(range(p1.n), repeat=2):
            if p1.leq(a, b) != p2.leq(perm[a], perm[b]):
                ok = False
                break
        if not ok:
            continue
        if all(backend.eq_objects(c1.cells[x], c2.cells[perm[x]]) and
               backend.eq_arrows(c1.attach[x], c2.attach[perm[x]])
               for x in range(p1.n)):
            return True
    return False


def all_inclusions(backend: CocompleteBackend, c1: FiniteComplex,
                   c2: FiniteComplex) -> list[ComplexInclusion]:
    """Every inclusion of c1 into c2 (used by the preorder check)."""
    out = []
    p1, p2 = c1.poset, c2.poset
    for table in itertools.permutations(range(p2.n), p1.n):
        try:
            inc = ComplexInclusion(c1, c2, tuple(table))
        except ValueError:
            continue
        try:
            if inc.valid(backend):
                out.append(inc)
        except ValueError:
            continue
    return out


# ---------------------------------------------------------------------------
# The staged colimit over all complexes


def enumerate_complexes(backend, k: int, cap: int = 4000) \
        -> list[FiniteComplex]:
    """All complexes with at most k cells over a finite co-clan backend,
    up to the cell-matching isomorphism."""
    empty = FiniteComplex(FinPoset(0, set()), {}, {})
    layers = [[empty]]
    seen = [empty]
    for _ in range(k):
        new_layer = []
        for c in layers[-1]:
            for ext in _one_cell_extensions(backend, c):
                if not any(complexes_equal(backend, ext, d) for d in seen):
                    seen.append(ext)
                    new_layer.append(ext)
                    if len(seen) > cap:
                        raise CoclanBackendError("complex enumeration cap")
        layers.append(new_layer)
    return seen


def _one_cell_extensions(backend, c: FiniteComplex) -> Iterator[FiniteComplex]:
    p = c.poset
    eng = ComplexEngine(backend, c)
    new_ix = p.n
    for sieve in p.sieves():
        base_obj, _ = eng.colim(sieve)
        for alpha in _codisplays_from(backend, base_obj):
            # condition (2): skip duplicates of an existing cell
            dup = False
            for y in range(p.n):
                if p.strictly_lower(y) == sieve and \
                   backend.eq_objects(c.cells[y], backend.target(alpha)) and \
                   backend.eq_arrows(c.attach[y], alpha):
                    dup = True
                    break
            if dup:
                continue
            le = set(p.le)
            for w in sieve:
                le.add((w, new_ix))
            changed = True
            while changed:
                changed = False
                for (a, b) in list(le):
                    for (b2, cc) in list(le):
                        if b == b2 and (a, cc) not in le:
                            le.add((a, cc))
                            changed = True
            poset = FinPoset(new_ix + 1, le)
            cells = dict(c.cells)
            cells[new_ix] = backend.target(alpha)
            attach = dict(c.attach)
            attach[new_ix] = alpha
            yield FiniteComplex(poset, cells, attach)


def _codisplays_from(backend, obj) -> list:
    if hasattr(backend, "codisplays_from") and hasattr(backend, "cat"):
        # explicit finite co-clan: include identities? identities attach
        # nothing new; use the declared co-displays only
        return [f for f in backend.codisplays_from(obj)]
    raise CoclanBackendError(
        "cell enumeration needs a finite co-clan backend")


@dataclass
class FatStageReport:
    k: int
    complexes: int
    checks: list[dict]
    all_solved_next_stage: bool


def fat_stage(backend, k: int, generators: Optional[list] = None) \
        -> tuple[list[FiniteComplex], FatStageReport]:
    """The truncation at <= k cells of the colimit over all complexes.

    The report replays, for every co-display generator e: I >-> J and every
    attaching map from I into the colimit of a stage-k complex, the
    one-more-cell extension that solves the lifting problem at stage k+1.
    """
    complexes = enumerate_complexes(backend, k)
    if generators is None:
        generators = sorted(getattr(backend, "codisplays"))
    checks = []
    for c in complexes:
        eng = ComplexEngine(backend, c)
        colim_obj, _ = eng.whole()
        for e in generators:
            i_obj = backend.source(e) if not hasattr(backend, "cat") else \
                backend.cat.src(e)
            for g in _homs(backend, i_obj, colim_obj):
                entry = {"complex_cells": c.poset.n, "generator": repr(e),
                         "attach": repr(g)}
                try:
                    obj, f_pushed, e_pushed, factor = backend.pushout(e, g)
                    new_p_le = set(c.poset.le)
                    top = c.poset.n
                    for w in range(c.poset.n):
                        new_p_le.add((w, top))
                    poset = FinPoset(top + 1, new_p_le)
                    cells = dict(c.cells)
                    cells[top] = obj
                    attach = dict(c.attach)
                    attach[top] = e_pushed
                    ext = FiniteComplex(poset, cells, attach)
                    rep = is_complex(backend, ext)
                    entry["extended_is_complex"] = rep["ok"]
                    entry["cells_after"] = ext.poset.n
                    entry["solved_by_stage"] = ext.poset.n
                    entry["ok"] = rep["ok"] and ext.poset.n <= k + 1
                except CoclanBackendError as exc:
                    entry["ok"] = False
                    entry["error"] = str(exc)
                checks.append(entry)
    report = FatStageReport(k, len(complexes), checks,
                            all(e["ok"] for e in checks))
    return complexes, report


def _homs(backend, x, y) -> list:
    if hasattr(backend, "cat"):
        return backend.cat.hom(x, y)
    raise CoclanBackendError("hom enumeration needs a finite co-clan backend")


# ---------------------------------------------------------------------------
# Brute-force colimit oracle for finite-set diagrams


def diagram_of_complex(backend, c: FiniteComplex) -> dict:
    """The cells with the induced arrows D(x <= y) of the underlying
    functor, computed through the recursive colimits."""
    eng = ComplexEngine(backend, c)
    arrows = {}
    p = c.poset
    for x in range(p.n):
        for y in range(p.n):
            if x == y or not p.leq(x, y):
                continue
            _, legs = eng.colim(p.strictly_lower(y))
            arrows[(x, y)] = backend.compose(c.attach[y], legs[x])
    return {"cells": dict(c.cells), "arrows": arrows}


def brute_force_finset_colimit(c: FiniteComplex, diagram: dict):
    """Colimit of the whole diagram in finite sets: disjoint union modulo
    the relation generated by the arrow images."""
    p = c.poset
    points = [(x, v) for x in range(p.n) for v in diagram["cells"][x]]
    parent = {pt: pt for pt in points}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=repr)] = min(ra, rb, key=repr)

    for (x, y), m in diagram["arrows"].items():
        md = m.as_dict()
        for v in diagram["cells"][x]:
            union((x, v), (y, md[v]))
    classes = sorted({find(pt) for pt in points}, key=repr)
    legs = {}
    for x in range(p.n):
        legs[x] = {v: find((x, v)) for v in diagram["cells"][x]}
    return classes, legs

