"""Concrete backends for the lifting engine.

CatBackend works with explicit finite categories and functors; pushouts
along generator functors are computed by a bounded path-closure over the
merged presentation and validated by re-checking functoriality of the
induced maps.  FreeCatBackend works with graphs standing for their free
categories, where the standard generators push out exactly.  The presheaf
backend covers set-valued functor categories on a finite index.  The model
backend runs over finite models of a checked theory with display
generators glued by saturation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from ..fincat import FinCat, FinFunctor, all_functors, identity_functor
from ..casestudy.graphs import (
    FinGraph,
    FreeCat,
    GraphFunctor,
    Path,
    graph_functors,
)
from ..gat.checker import CheckedTheory
from ..gat.syntax import Context
from ..models import Env, ModelMorphism, TheoryModel, hom_set
from ..presentation import PushoutDiverged, pushout_along_display
from .core import Backend, BackendError, Generator, PushoutResult, \
    SearchSpaceInfinite


# ---------------------------------------------------------------------------
# Finite categories


class CatBackend(Backend):
    def __init__(self, max_path_len: int = 10, max_arrows: int = 600):
        self.max_path_len = max_path_len
        self.max_arrows = max_arrows
        self._hom_cache: dict = {}

    def homs(self, x: FinCat, y: FinCat) -> list[FinFunctor]:
        key = (id(x), id(y))
        hit = self._hom_cache.get(key)
        if hit is None:
            hit = all_functors(x, y)
            self._hom_cache[key] = hit
        return hit

    def compose(self, g: FinFunctor, f: FinFunctor) -> FinFunctor:
        return f.then(g)

    def identity(self, x: FinCat) -> FinFunctor:
        return identity_functor(x)

    def source(self, f: FinFunctor) -> FinCat:
        return f.dom

    def target(self, f: FinFunctor) -> FinCat:
        return f.cod

    def pushout(self, gen: Generator, attach: FinFunctor) -> PushoutResult:
        return cat_pushout(gen.arrow, attach, self.max_path_len,
                           self.max_arrows)


def cat_pushout(g: FinFunctor, a: FinFunctor, max_path_len: int = 10,
                max_arrows: int = 600) -> PushoutResult:
    """Pushout of categories X <-a- I -g-> J by bounded path closure."""
    I, J, X = g.dom, g.cod, a.cod

    # vertex classes
    parent: dict = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(u, v):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv, key=repr)] = min(ru, rv, key=repr)

    for o in range(X.n_obj):
        find(("x", o))
    for o in range(J.n_obj):
        find(("j", o))
    for i in range(I.n_obj):
        union(("x", a.obj_map[i]), ("j", g.obj_map[i]))
    vreps = sorted({find(v) for v in list(parent)}, key=repr)
    vix = {v: k for k, v in enumerate(vreps)}

    def vclass(tag, o):
        return vix[find((tag, o))]

    # generating edges: non-identity arrows of X and J
    edges = []
    for f in range(X.n_arr()):
        if f not in X.ids:
            edges.append(("x", f))
    for f in range(J.n_arr()):
        if f not in J.ids:
            edges.append(("j", f))
    eix = {e: k for k, e in enumerate(edges)}
    esrc = []
    etgt = []
    for tag, f in edges:
        cat = X if tag == "x" else J
        esrc.append(vclass(tag, cat.src(f)))
        etgt.append(vclass(tag, cat.tgt(f)))

    def path_of(tag, f):
        cat = X if tag == "x" else J
        if f in cat.ids:
            return ()
        return (eix[(tag, f)],)

    # relations between edge words
    rels: list[tuple[tuple, tuple]] = []
    for cat, tag in ((X, "x"), (J, "j")):
        for f in range(cat.n_arr()):
            for h in range(cat.n_arr()):
                if cat.tgt(f) != cat.src(h):
                    continue
                rels.append((path_of(tag, f) + path_of(tag, h),
                             path_of(tag, cat.comp[(h, f)])))
    for u in range(I.n_arr()):
        rels.append((path_of("x", a.arr_map[u]), path_of("j", g.arr_map[u])))
    rels = [(l, r) for (l, r) in rels if l != r]

    # the closure may need longer paths; retry with a growing bound
    for L in (4, max_path_len):
        result = _path_quotient(len(vreps), esrc, etgt, rels, L, max_arrows)
        if result is not None:
            break
    else:
        result = None
    if result is None:
        raise PushoutDiverged("path closure did not stabilize within bounds")
    cat_p, class_of_path = result

    def emb_obj_x(o):
        return vclass("x", o)

    def arrow_class(tag, f):
        cat = X if tag == "x" else J
        if f in cat.ids:
            return class_of_path((vclass(tag, cat.src(f)), ()))
        return class_of_path((esrc[eix[(tag, f)]], (eix[(tag, f)],)))

    incl = FinFunctor(X, cat_p, [vclass("x", o) for o in range(X.n_obj)],
                      [arrow_class("x", f) for f in range(X.n_arr())])
    coproj = FinFunctor(J, cat_p, [vclass("j", o) for o in range(J.n_obj)],
                        [arrow_class("j", f) for f in range(J.n_arr())])

    reps = cat_p._path_reps  # class -> (startclass, edge tuple)

    def factor(q1: FinFunctor, q2: FinFunctor) -> FinFunctor:
        z = q1.cod
        if not (q1.dom is X or q1.dom.arrows == X.arrows):
            raise BackendError("factor: first leg must start at the base")
        obj_map = [None] * cat_p.n_obj
        for o in range(X.n_obj):
            obj_map[vclass("x", o)] = q1.obj_map[o]
        for o in range(J.n_obj):
            obj_map[vclass("j", o)] = q2.obj_map[o]
        arr_map = []
        for c in range(cat_p.n_arr()):
            start, word = reps[c]
            cur = z.ids[obj_map[start]]
            for e in word:
                tag, f = edges[e]
                img = q1.arr_map[f] if tag == "x" else q2.arr_map[f]
                cur = z.comp[(img, cur)]
            arr_map.append(cur)
        out = FinFunctor(cat_p, z, obj_map, arr_map, check=False)
        if not out.is_functor():
            raise BackendError("factor: induced map is not a functor")
        return out

    return PushoutResult(cat_p, incl, coproj, factor)


def _path_quotient(n_v, esrc, etgt, rels, max_len, max_arrows):
    """Quotient of the free category on a graph by word relations.

    Returns (FinCat with a `_path_reps` attribute, class lookup) or None if
    composition escapes the bound or the arrow cap is hit.
    """
    # enumerate composable words up to max_len
    paths = [(v, ()) for v in range(n_v)]
    frontier = list(paths)
    while frontier:
        nxt = []
        for (v, word) in frontier:
            if len(word) >= max_len:
                continue
            end = etgt[word[-1]] if word else v
            for e in range(len(esrc)):
                if esrc[e] == end:
                    p = (v, word + (e,))
                    nxt.append(p)
        paths.extend(nxt)
        frontier = nxt
        if len(paths) > max_arrows * 40:
            return None
    pset = set(paths)

    parent = {p: p for p in paths}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    def union(p, q):
        rp, rq = find(p), find(q)
        if rp != rq:
            a, b = sorted((rp, rq), key=lambda t: (len(t[1]), repr(t)))
            parent[b] = a
            return True
        return False

    changed = True
    while changed:
        changed = False
        for (v, word) in paths:
            for (l, r) in rels:
                n = len(l)
                for k in range(len(word) - n + 1):
                    if word[k:k + n] == l:
                        q = (v, word[:k] + r + word[k + n:])
                        if q in pset and union((v, word), q):
                            changed = True
    classes = sorted({find(p) for p in paths},
                     key=lambda t: (len(t[1]), repr(t)))
    cix = {c: k for k, c in enumerate(classes)}

    def class_of(p):
        return cix[find(p)]

    # composition, trying member pairs until the concatenation stays in range
    members: dict = {}
    for p in paths:
        members.setdefault(find(p), []).append(p)
    arrows = []
    for c in classes:
        v, word = c
        end = etgt[word[-1]] if word else v
        arrows.append((v, end))
    comp = {}
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            if arrows[i][1] != arrows[j][0]:
                continue
            got = None
            for (v1, w1) in members[ci]:
                for (v2, w2) in members[cj]:
                    if len(w1) + len(w2) <= max_len:
                        got = class_of((v1, w1 + w2))
                        break
                if got is not None:
                    break
            if got is None:
                return None
            comp[(j, i)] = got
    ids = [class_of((v, ())) for v in range(n_v)]
    if len(classes) > max_arrows:
        return None
    cat = FinCat(n_v, arrows, comp, ids, check=True)
    cat._path_reps = {cix[c]: c for c in classes}
    return cat, class_of


# ---------------------------------------------------------------------------
# Free categories on graphs (symbolic)


class FreeCatBackend(Backend):
    def __init__(self, max_path_len: int = 6, cap: int = 20000):
        self.max_path_len = max_path_len
        self.cap = cap

    def _maybe_infinite(self, dom: FinGraph, cod: FinGraph) -> bool:
        return bool(dom.edges) and not cod.is_acyclic()

    def homs(self, x: FinGraph, y: FinGraph) -> list[GraphFunctor]:
        if self._maybe_infinite(x, y):
            raise SearchSpaceInfinite(
                "graph functors into a cyclic graph are unbounded")
        return graph_functors(x, y, self.max_path_len, self.cap)

    def _bounded_homs(self, x: FinGraph, y: FinGraph) -> list[GraphFunctor]:
        return graph_functors(x, y, self.max_path_len, self.cap)

    def compose(self, g: GraphFunctor, f: GraphFunctor) -> GraphFunctor:
        return f.then(g)

    def identity(self, x: FinGraph) -> GraphFunctor:
        return GraphFunctor(x, x, tuple(range(x.n_vertices)),
                            tuple(Path(s, (e,))
                                  for e, (s, _) in enumerate(x.edges)))

    def source(self, f: GraphFunctor) -> FinGraph:
        return f.dom

    def target(self, f: GraphFunctor) -> FinGraph:
        return f.cod

    def gen_squares(self, gen: Generator, r) -> list[tuple]:
        # generator endpoints are graphs with few edges; a square's top and
        # bottom live in bounded hom-sets whenever the generator endpoints
        # are discrete or the relevant targets acyclic; fall back to the
        # bounded enumeration otherwise (sound for squares: any square found
        # is genuine; lifts decide solvability below)
        out = []
        tops = self._bounded_homs(gen.dom, self.source(r))
        bottoms = self._bounded_homs(gen.cod, self.target(r))
        for top in tops:
            rt = top.then(r)
            for bottom in bottoms:
                if gen.arrow.then(bottom) == rt:
                    out.append((top, bottom))
        return out

    def gen_lift(self, gen: Generator, r, square):
        top, bottom = square
        for d in self._bounded_homs(gen.cod, self.source(r)):
            if gen.arrow.then(d) == top and d.then(r) == bottom:
                return d
        if self._maybe_infinite(gen.cod, self.source(r)):
            raise SearchSpaceInfinite(
                "no bounded lift and the candidate space is unbounded")
        return None

    def pushout(self, gen: Generator, attach: GraphFunctor) -> PushoutResult:
        g = gen.arrow
        x = attach.cod
        # exact pushouts when the generator freely adds vertices and edges:
        # dom discrete, cod adds cells on the image
        if g.dom.edges:
            raise BackendError(
                "free-category pushouts only along free cell attachments")
        new_vertices = [v for v in range(g.cod.n_vertices)
                        if v not in g.vertex_map]
        v_of_cod = {}
        for i, v in enumerate(g.vertex_map):
            v_of_cod[v] = attach.vertex_map[i]
        base_n = x.n_vertices
        for k, v in enumerate(new_vertices):
            v_of_cod[v] = base_n + k
        p_graph = FinGraph(
            base_n + len(new_vertices),
            x.edges + tuple((v_of_cod[s], v_of_cod[t]) for s, t in g.cod.edges))
        incl = GraphFunctor(x, p_graph, tuple(range(base_n)),
                            tuple(Path(s, (e,))
                                  for e, (s, _) in enumerate(x.edges)))
        coproj = GraphFunctor(
            g.cod, p_graph,
            tuple(v_of_cod[v] for v in range(g.cod.n_vertices)),
            tuple(Path(v_of_cod[s], (len(x.edges) + e,))
                  for e, (s, t) in enumerate(g.cod.edges)))

        def factor(q1: GraphFunctor, q2: GraphFunctor) -> GraphFunctor:
            z = q1.cod
            vm = list(q1.vertex_map) + [None] * len(new_vertices)
            for v in range(g.cod.n_vertices):
                vm[v_of_cod[v]] = q2.vertex_map[v]
            em = list(q1.edge_map) + [q2.edge_map[e]
                                      for e in range(len(g.cod.edges))]
            return GraphFunctor(p_graph, z, tuple(vm), tuple(em))

        return PushoutResult(p_graph, incl, coproj, factor)


# ---------------------------------------------------------------------------
# Set-valued functors on a finite index category


class Presheaf:
    """A covariant functor index -> FinSet as element lists and tables."""

    def __init__(self, index: FinCat, ob: list[list], ar: list[dict],
                 check: bool = True):
        self.index = index
        self.ob = [list(v) for v in ob]
        self.ar = [dict(t) for t in ar]
        if check:
            bad = self.violations()
            if bad:
                raise BackendError(f"not a functor to sets: {bad}")

    def violations(self) -> Optional[str]:
        idx = self.index
        for f, (s, t) in enumerate(idx.arrows):
            for v in self.ob[s]:
                if self.ar[f].get(v) not in self.ob[t]:
                    return f"arrow {f} table wrong at {v!r}"
        for o in range(idx.n_obj):
            for v in self.ob[o]:
                if self.ar[idx.ids[o]][v] != v:
                    return f"identity at {o} moves {v!r}"
        for f in range(idx.n_arr()):
            for h in range(idx.n_arr()):
                if idx.tgt(f) != idx.src(h):
                    continue
                for v in self.ob[idx.src(f)]:
                    if self.ar[h][self.ar[f][v]] != \
                       self.ar[idx.comp[(h, f)]][v]:
                        return f"functoriality fails at ({h},{f})"
        return None

    def fingerprint(self):
        return (tuple(tuple(sorted(map(repr, v))) for v in self.ob),
                tuple(tuple(sorted((repr(k), repr(w)) for k, w in t.items()))
                      for t in self.ar))

    def __eq__(self, other):
        return isinstance(other, Presheaf) and \
            self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())


class NatTrans:
    def __init__(self, src: Presheaf, dst: Presheaf, comps: list[dict],
                 check: bool = True):
        self.src = src
        self.dst = dst
        self.comps = [dict(c) for c in comps]
        if check and not self.is_natural():
            raise BackendError("not natural")

    def is_natural(self) -> bool:
        idx = self.src.index
        for o in range(idx.n_obj):
            for v in self.src.ob[o]:
                if self.comps[o].get(v) not in self.dst.ob[o]:
                    return False
        for f, (s, t) in enumerate(idx.arrows):
            for v in self.src.ob[s]:
                if self.comps[t][self.src.ar[f][v]] != \
                   self.dst.ar[f][self.comps[s][v]]:
                    return False
        return True

    def fingerprint(self):
        return tuple(tuple(sorted((repr(k), repr(w)) for k, w in c.items()))
                     for c in self.comps)

    def __eq__(self, other):
        return isinstance(other, NatTrans) and \
            self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())


class PresheafBackend(Backend):
    def __init__(self, index: FinCat):
        self.index = index

    def homs(self, x: Presheaf, y: Presheaf) -> list[NatTrans]:
        idx = self.index
        slots = [(o, v) for o in range(idx.n_obj) for v in x.ob[o]]
        out = []
        assign: dict = {}

        def ok() -> bool:
            for f, (s, t) in enumerate(idx.arrows):
                for v in x.ob[s]:
                    a = assign.get((s, v))
                    if a is None:
                        continue
                    b = assign.get((t, x.ar[f][v]))
                    if b is None:
                        continue
                    if y.ar[f][a] != b:
                        return False
            return True

        def bt(i):
            if i == len(slots):
                comps = [dict() for _ in range(idx.n_obj)]
                for (o, v), w in assign.items():
                    comps[o][v] = w
                out.append(NatTrans(x, y, comps, check=False))
                return
            o, v = slots[i]
            for w in y.ob[o]:
                assign[(o, v)] = w
                if ok():
                    bt(i + 1)
                del assign[(o, v)]

        bt(0)
        return out

    def compose(self, g: NatTrans, f: NatTrans) -> NatTrans:
        comps = [{v: g.comps[o][f.comps[o][v]] for v in f.src.ob[o]}
                 for o in range(self.index.n_obj)]
        return NatTrans(f.src, g.dst, comps, check=False)

    def identity(self, x: Presheaf) -> NatTrans:
        return NatTrans(x, x, [{v: v for v in x.ob[o]}
                               for o in range(self.index.n_obj)], check=False)

    def source(self, f: NatTrans) -> Presheaf:
        return f.src

    def target(self, f: NatTrans) -> Presheaf:
        return f.dst

    def is_pointwise_injective(self, f: NatTrans) -> bool:
        return all(len(set(c.values())) == len(c) for c in f.comps)

    def pushout(self, gen: Generator, attach: NatTrans) -> PushoutResult:
        e = gen.arrow
        if not self.is_pointwise_injective(e):
            raise BackendError("presheaf pushouts only along injective maps")
        idx = self.index
        i_obj, j_obj, x_obj = e.src, e.dst, attach.dst
        im = [set(e.comps[o].values()) for o in range(idx.n_obj)]
        back = [{e.comps[o][v]: v for v in i_obj.ob[o]}
                for o in range(idx.n_obj)]
        new = [[w for w in j_obj.ob[o] if w not in im[o]]
               for o in range(idx.n_obj)]
        ob = [list(x_obj.ob[o]) + [("new", o, w) for w in new[o]]
              for o in range(idx.n_obj)]

        def push_elem(o, w):
            # where an element of J(o) lands in the pushout
            if w in im[o]:
                return attach.comps[o][back[o][w]]
            return ("new", o, w)

        ar = []
        for f, (s, t) in enumerate(idx.arrows):
            table = {}
            for v in x_obj.ob[s]:
                table[v] = x_obj.ar[f][v]
            for w in new[s]:
                table[("new", s, w)] = push_elem(t, j_obj.ar[f][w])
            ar.append(table)
        p = Presheaf(idx, ob, ar)
        incl = NatTrans(x_obj, p, [{v: v for v in x_obj.ob[o]}
                                   for o in range(idx.n_obj)], check=False)
        coproj = NatTrans(j_obj, p,
                          [{w: push_elem(o, w) for w in j_obj.ob[o]}
                           for o in range(idx.n_obj)], check=False)

        def factor(q1: NatTrans, q2: NatTrans) -> NatTrans:
            comps = []
            for o in range(idx.n_obj):
                c = {v: q1.comps[o][v] for v in x_obj.ob[o]}
                for w in new[o]:
                    c[("new", o, w)] = q2.comps[o][w]
                comps.append(c)
            out = NatTrans(p, q1.dst, comps, check=False)
            if not out.is_natural():
                raise BackendError("factor: induced map is not natural")
            return out

        return PushoutResult(p, incl, coproj, factor)


def yoneda_presheaf(index: FinCat, o: int) -> Presheaf:
    """The covariant hom-functor at o."""
    ob = [sorted(index.hom(o, x)) for x in range(index.n_obj)]
    ar = []
    for f in range(index.n_arr()):
        s = index.src(f)
        ar.append({u: index.comp[(f, u)] for u in index.hom(o, s)})
    return Presheaf(index, ob, ar)


def empty_presheaf(index: FinCat) -> Presheaf:
    return Presheaf(index, [[] for _ in range(index.n_obj)],
                    [dict() for _ in range(index.n_arr())])


# ---------------------------------------------------------------------------
# Finite models of a theory


@dataclass
class DisplayGen:
    """A display generator H(base) >-> H(ext) given by a context extension."""

    name: str
    base: Context
    ext: Context


class ModelBackend(Backend):
    """Objects are finite models; squares against display generators are
    encoded by environments, and pushouts glue fresh generators."""

    def __init__(self, ct: CheckedTheory, closure_cap: int = 96):
        self.ct = ct
        self.closure_cap = closure_cap

    def homs(self, x: TheoryModel, y: TheoryModel) -> list[ModelMorphism]:
        return hom_set(x, y)

    def compose(self, g: ModelMorphism, f: ModelMorphism) -> ModelMorphism:
        return f.then(g)

    def identity(self, x: TheoryModel) -> ModelMorphism:
        from ..models import identity_morphism
        return identity_morphism(x)

    def source(self, f: ModelMorphism) -> TheoryModel:
        return f.src

    def target(self, f: ModelMorphism) -> TheoryModel:
        return f.dst

    def eq_arrows(self, f, g) -> bool:
        return f == g

    # attaching data: top = (model, base context, environment)
    def gen_squares(self, gen, r: ModelMorphism) -> list[tuple]:
        assert isinstance(gen.arrow, DisplayGen)
        dg = gen.arrow
        out = []
        m, b = r.src, r.dst
        n = len(dg.base)
        for top_env in m.envs(dg.base):
            image = r.map_env(dg.base, top_env)
            for bottom_env in b.envs(dg.ext):
                if bottom_env[:n] == image:
                    out.append(((m, dg, top_env), bottom_env))
        return out

    def gen_lift(self, gen, r: ModelMorphism, square):
        (m, dg, top_env), bottom_env = square
        n = len(dg.base)
        for e in r.src.envs(dg.ext):
            if e[:n] == top_env and r.map_env(dg.ext, e) == bottom_env:
                return e
        return None

    def transport_top(self, incl: ModelMorphism, top):
        m, dg, env = top
        return (incl.dst, dg, incl.map_env(dg.base, env))

    def pushout(self, gen, attach) -> PushoutResult:
        m, dg, env = attach
        model, incl, out_env = pushout_along_display(
            self.ct, m, dg.base, dg.ext, env, cap=self.closure_cap)
        gen_elems = list(out_env[len(dg.base):])

        def factor(r: ModelMorphism, bottom_env) -> ModelMorphism:
            return _induced_from_pushout(self.ct, model, incl, gen_elems,
                                         dg, r, bottom_env)

        return PushoutResult(model, incl, out_env, factor)


def _induced_from_pushout(ct: CheckedTheory, p: TheoryModel,
                          incl: ModelMorphism, gen_elems: list,
                          dg: DisplayGen, r: ModelMorphism,
                          bottom_env) -> ModelMorphism:
    """Cocone factorization: values forced on the base image and the glued
    generators, then propagated through the operation tables."""
    b = r.dst
    assign: dict = {}  # (sort, p-env, elem) -> b elem

    def set_point(s, env, v, val):
        key = (s, env, v)
        if key in assign and assign[key] != val:
            raise BackendError("cocone values conflict; not a pushout cocone")
        assign[key] = val

    a = incl.src
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        for env in a.family_envs(s):
            p_env = incl.map_env(decl.context, env)
            for v in a.carriers[s][env]:
                set_point(s, p_env, incl.maps[s][env][v],
                          r.maps[s][env][v])
    for k, g_elem in enumerate(gen_elems):
        j = len(dg.base) + k
        s = dg.ext.sorts[j].head
        # locate the generator element's fiber in p
        decl = ct.sort_decls[s]
        placed = False
        for env in p.family_envs(s):
            if g_elem in p.carriers[s][env]:
                set_point(s, env, g_elem, bottom_env[j])
                placed = True
                break
        if not placed:
            raise BackendError("generator element missing from the pushout")

    # propagate through operations until every element has a value
    changed = True
    while changed:
        changed = False
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env, val in p.ops.get(o, {}).items():
                keys = []
                vals = []
                ok = True
                for i in range(len(env)):
                    s_i = decl.context.sorts[i].head
                    key_i = p.sort_key(decl.context.sorts[i], env[:i])
                    got = assign.get((s_i, key_i, env[i]))
                    if got is None:
                        ok = False
                        break
                    vals.append(got)
                if not ok:
                    continue
                res_key = p.sort_key(decl.result, env)
                res_sort = decl.result.head
                target_val = b.ops[o][tuple(vals)]
                key = (res_sort, res_key, val)
                if key not in assign:
                    assign[key] = target_val
                    changed = True
                elif assign[key] != target_val:
                    raise BackendError("cocone propagation conflict")
    maps: dict = {}
    for s in ct.sort_order:
        maps[s] = {}
        for env in p.family_envs(s):
            maps[s][env] = {}
            for v in p.carriers[s][env]:
                got = assign.get((s, env, v))
                if got is None:
                    raise BackendError(
                        "pushout element not generated by base and cells")
                maps[s][env][v] = got
    out = ModelMorphism(p, b, maps, check=False)
    bad = out.violations()
    if bad:
        raise BackendError(f"induced map invalid: {bad[0].message}")
    return out
