"""Finite graphs, free categories on them, and the freeness recognizer.

Arrows of a free category are paths, kept symbolically as edge sequences;
equality of arrows is equality of paths.  Hom-sets are enumerated lazily
with a length bound since free categories on cyclic graphs are infinite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..fincat import FinCat, FinFunctor


@dataclass(frozen=True)
class FinGraph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]  # (src, tgt)

    def __post_init__(self):
        for s, t in self.edges:
            if not (0 <= s < self.n_vertices and 0 <= t < self.n_vertices):
                raise ValueError("edge endpoint out of range")

    def out_edges(self, v: int) -> list[int]:
        return [i for i, (s, _) in enumerate(self.edges) if s == v]

    def is_acyclic(self) -> bool:
        color = [0] * self.n_vertices

        def visit(v) -> bool:
            color[v] = 1
            for e in self.out_edges(v):
                w = self.edges[e][1]
                if color[w] == 1:
                    return False
                if color[w] == 0 and not visit(w):
                    return False
            color[v] = 2
            return True

        return all(color[v] != 0 or visit(v) for v in range(self.n_vertices))


@dataclass(frozen=True)
class Path:
    """A composable edge sequence; the identity path has no edges."""

    start: int
    edges: tuple[int, ...]

    def end(self, g: FinGraph) -> int:
        return g.edges[self.edges[-1]][1] if self.edges else self.start

    def then(self, other: "Path", g: FinGraph) -> "Path":
        assert self.end(g) == other.start
        return Path(self.start, self.edges + other.edges)


class FreeCat:
    """The free category on a graph; arrows are paths."""

    def __init__(self, graph: FinGraph):
        self.graph = graph

    def paths(self, a: int, b: int, max_len: int) -> list[Path]:
        out = []
        frontier = [Path(a, ())]
        for _ in range(max_len + 1):
            nxt = []
            for p in frontier:
                if p.end(self.graph) == b:
                    out.append(p)
                for e in self.graph.out_edges(p.end(self.graph)):
                    nxt.append(Path(p.start, p.edges + (e,)))
            frontier = nxt
            if not frontier:
                break
        # out currently contains paths of length <= max_len found in order
        seen = set()
        uniq = []
        for p in out:
            if p not in seen:
                seen.add(p)
                uniq.append(p)
        return uniq

    def is_finite(self) -> bool:
        return self.graph.is_acyclic()

    def to_fincat(self) -> FinCat:
        """Materialize as an explicit category (graph must be acyclic)."""
        if not self.graph.is_acyclic():
            raise ValueError("free category on a cyclic graph is infinite")
        g = self.graph
        all_paths: list[Path] = []
        for a in range(g.n_vertices):
            for b in range(g.n_vertices):
                all_paths.extend(self.paths(a, b, len(g.edges)))
        all_paths.sort(key=lambda p: (len(p.edges), p.start, p.edges))
        ix = {p: i for i, p in enumerate(all_paths)}
        arrows = [(p.start, p.end(g)) for p in all_paths]
        comp = {}
        for p in all_paths:
            for q in all_paths:
                if p.end(g) == q.start:
                    comp[(ix[q], ix[p])] = ix[p.then(q, g)]
        ids = [ix[Path(v, ())] for v in range(g.n_vertices)]
        names = ["*".join(f"e{e}" for e in p.edges) if p.edges else
                 f"id{p.start}" for p in all_paths]
        return FinCat(g.n_vertices, arrows, comp, ids,
                      obj_names=[f"v{i}" for i in range(g.n_vertices)],
                      arrow_names=names)


@dataclass(frozen=True)
class GraphFunctor:
    """A functor between free categories: vertices to vertices, edges to paths."""

    dom: FinGraph
    cod: FinGraph
    vertex_map: tuple[int, ...]
    edge_map: tuple[Path, ...]

    def __post_init__(self):
        for e, (s, t) in enumerate(self.dom.edges):
            p = self.edge_map[e]
            if p.start != self.vertex_map[s] or p.end(self.cod) != self.vertex_map[t]:
                raise ValueError(f"edge {e} maps to an ill-typed path")

    def apply(self, p: Path) -> Path:
        out = Path(self.vertex_map[p.start], ())
        for e in p.edges:
            out = out.then(self.edge_map[e], self.cod)
        return out

    def then(self, other: "GraphFunctor") -> "GraphFunctor":
        return GraphFunctor(
            self.dom, other.cod,
            tuple(other.vertex_map[v] for v in self.vertex_map),
            tuple(other.apply(p) for p in self.edge_map))


def graph_functors(dom: FinGraph, cod: FinGraph, max_path_len: int = 6,
                   cap: int = 20000) -> list[GraphFunctor]:
    """All graph functors dom* -> cod* with edge images of bounded length."""
    free_cod = FreeCat(cod)
    out = []
    for vm in itertools.product(range(cod.n_vertices), repeat=dom.n_vertices):
        choices = []
        for (s, t) in dom.edges:
            ps = free_cod.paths(vm[s], vm[t], max_path_len)
            choices.append(ps)
        for em in itertools.product(*choices):
            out.append(GraphFunctor(dom, cod, vm, tuple(em)))
            if len(out) > cap:
                raise RuntimeError("functor enumeration cap exceeded")
    return out


# ---------------------------------------------------------------------------
# Freeness recognition


@dataclass
class Free:
    graph: FinGraph
    vertex_of_obj: list[int]
    edge_of_arrow: dict[int, int]


@dataclass
class NotFree:
    reason: str
    witness: dict


def irreducible_arrows(cat: FinCat) -> list[int]:
    """Non-identity arrows with no decomposition into two non-identities."""
    out = []
    ids = set(cat.ids)
    for f in range(cat.n_arr()):
        if f in ids:
            continue
        decomposable = False
        for g in range(cat.n_arr()):
            if g in ids:
                continue
            for h in range(cat.n_arr()):
                if h in ids:
                    continue
                if cat.tgt(h) == cat.src(g) and cat.comp[(g, h)] == f:
                    decomposable = True
                    break
            if decomposable:
                break
        if not decomposable:
            out.append(f)
    return out


def recognize_free(cat: FinCat):
    """Free(graph) when the category is free on its irreducible arrows.

    Computes the irreducibles, forms the candidate graph, and checks that
    the canonical comparison functor is an isomorphism.  A composite of
    non-identities equal to an identity (a cycle) refutes freeness at once.
    """
    ids = set(cat.ids)
    # cycles: a non-identity endomorphism composite hitting an identity, or
    # any nonidentity isomorphism
    for f in range(cat.n_arr()):
        if f in ids:
            continue
        if cat.src(f) == cat.tgt(f):
            # powers of f must never return to the identity in a free cat
            seen = set()
            g = f
            while g not in seen:
                seen.add(g)
                g = cat.comp[(g, f)]
                if g in ids:
                    return NotFree("nonidentity composite equals an identity",
                                   {"arrow": f})
        if cat.is_iso(f):
            return NotFree("nonidentity isomorphism", {"arrow": f})
    irr = irreducible_arrows(cat)
    graph = FinGraph(cat.n_obj, tuple((cat.src(f), cat.tgt(f)) for f in irr))
    free = FreeCat(graph)
    if not graph.is_acyclic():
        return NotFree("irreducible-arrow graph has a cycle",
                       {"irreducibles": irr})
    fc = free.to_fincat()
    if fc.n_arr() != cat.n_arr():
        return NotFree("path count differs from arrow count",
                       {"paths": fc.n_arr(), "arrows": cat.n_arr()})
    # comparison functor: path -> composite of irreducibles
    mapping: dict[Path, int] = {}
    for v in range(cat.n_obj):
        mapping[Path(v, ())] = cat.ids[v]
    all_paths = sorted(
        (p for a in range(cat.n_obj) for b in range(cat.n_obj)
         for p in free.paths(a, b, len(graph.edges))),
        key=lambda p: len(p.edges))
    for p in all_paths:
        if p.edges:
            prefix = Path(p.start, p.edges[:-1])
            mapping[p] = cat.comp[(irr[p.edges[-1]], mapping[prefix])]
    values = sorted(mapping.values())
    if values != list(range(cat.n_arr())):
        return NotFree("comparison functor is not a bijection on arrows",
                       {"hit": len(set(values))})
    edge_of = {irr[i]: i for i in range(len(irr))}
    return Free(graph, list(range(cat.n_obj)), edge_of)


def free_cat(graph: FinGraph) -> FinCat:
    return FreeCat(graph).to_fincat()


def graphs_isomorphic(g: FinGraph, h: FinGraph) -> bool:
    if g.n_vertices != h.n_vertices or len(g.edges) != len(h.edges):
        return False
    hs = sorted(h.edges)
    for perm in itertools.permutations(range(g.n_vertices)):
        mapped = sorted((perm[s], perm[t]) for s, t in g.edges)
        if mapped == hs:
            return True
    return False
