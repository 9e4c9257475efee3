"""Exhaustive enumeration of finite categories up to isomorphism.

One-object categories are monoids, enumerated through their left regular
representation (rows of the Cayley table as transformations, closed under
composition); the general case backtracks over composition tables with
associativity propagation.  Deduplication is by the lexicographically
smallest relabeling, vectorized for the monoid bulk.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..fincat import FinCat


def monoid_tables(n: int) -> list[tuple[tuple[int, ...], ...]]:
    """All labeled monoid tables of order n with unit 0, canonical reps only.

    A table t has t[a][b] = a*b.  Enumerates rows as left multiplications
    (each row a is a map with row[0] = a) with closure pruning, then keeps
    the lexicographic minimum over all unit-fixing relabelings.
    """
    if n == 0:
        return []
    if n == 1:
        return [((0,),)]
    rows: list[list[tuple[int, ...]]] = [[] for _ in range(n)]
    # candidate rows for element a: all maps with row[0] = a
    candidates = {a: [(a,) + rest
                      for rest in itertools.product(range(n), repeat=n - 1)]
                  for a in range(1, n)}
    id_row = tuple(range(n))
    table: list[tuple[int, ...]] = [id_row] + [None] * (n - 1)
    out = []

    def closure_ok(upto: int) -> bool:
        # for all chosen a, b: L_a . L_b must equal row (a*b) when chosen
        for a in range(1, upto + 1):
            ra = table[a]
            for b in range(1, upto + 1):
                rb = table[b]
                c = ra[b]  # a*b
                comp = tuple(ra[rb[i]] for i in range(n))
                if c <= upto:
                    if comp != table[c]:
                        return False
                else:
                    if comp[0] != c:
                        return False
        return True

    def bt(a: int):
        if a == n:
            out.append(tuple(table))
            return
        for row in candidates[a]:
            table[a] = row
            if closure_ok(a):
                bt(a + 1)
        table[a] = None

    bt(1)
    return _canonical_monoids(out, n)


def _canonical_monoids(tables, n: int):
    if not tables or n == 1:
        return tables
    perms = [p for p in itertools.permutations(range(n)) if p[0] == 0]
    arr = np.array(tables, dtype=np.int8)  # (N, n, n)
    best = None
    n_tab = arr.shape[0]
    for p in perms:
        p = np.array(p, dtype=np.int8)
        inv = np.empty_like(p)
        inv[p] = np.arange(n, dtype=np.int8)
        relabeled = p[arr[:, inv][:, :, inv]]
        flat = relabeled.reshape(n_tab, n * n)
        if best is None:
            best = flat.copy()
        else:
            # lexicographic minimum, vectorized: compare row-wise
            swap = _lex_less(flat, best)
            best[swap] = flat[swap]
    uniq = sorted({tuple(map(int, row)) for row in best})
    return [tuple(tuple(row[i * n:(i + 1) * n]) for i in range(n))
            for row in uniq]


def _lex_less(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows of a lexicographically smaller than the matching rows of b."""
    diff = a != b
    any_diff = diff.any(axis=1)
    first = np.where(any_diff, diff.argmax(axis=1), 0)
    rows = np.arange(a.shape[0])
    return any_diff & (a[rows, first] < b[rows, first])


def monoid_to_fincat(table) -> FinCat:
    n = len(table)
    arrows = [(0, 0)] * n
    comp = {(g, f): table[g][f] for g in range(n) for f in range(n)}
    return FinCat(1, arrows, comp, [0], check=False)


# ---------------------------------------------------------------------------
# Multi-object categories


def _hom_matrices(n_obj: int, max_arr: int):
    """Hom-set size matrices with identities, summing to at most max_arr."""
    cells = [(i, j) for i in range(n_obj) for j in range(n_obj)]
    base = n_obj  # identities
    out = []

    def rec(k: int, left: int, acc: dict):
        if k == len(cells):
            out.append(dict(acc))
            return
        i, j = cells[k]
        lo = 1 if i == j else 0
        for h in range(lo, left + 1):
            acc[(i, j)] = h
            rec(k + 1, left - (h - lo), acc)
        acc.pop(cells[k], None)

    rec(0, max_arr - base, {})
    return out


def _categories_for_matrix(n_obj: int, hom: dict) -> list[FinCat]:
    """All composition tables for a fixed hom-size matrix (labeled)."""
    arrows = []
    hom_arrows: dict[tuple[int, int], list[int]] = {}
    ids = {}
    for i in range(n_obj):
        for j in range(n_obj):
            lst = []
            for _ in range(hom[(i, j)]):
                lst.append(len(arrows))
                arrows.append((i, j))
            hom_arrows[(i, j)] = lst
    for i in range(n_obj):
        ids[i] = hom_arrows[(i, i)][0]
    n_arr = len(arrows)
    pairs = [(g, f) for f in range(n_arr) for g in range(n_arr)
             if arrows[f][1] == arrows[g][0]]
    comp: dict[tuple[int, int], int] = {}
    # identity laws are forced
    forced = {}
    for f in range(n_arr):
        forced[(ids[arrows[f][1]], f)] = f
        forced[(f, ids[arrows[f][0]])] = f
    free_pairs = [p for p in pairs if p not in forced]
    comp.update(forced)
    out = []

    def assoc_ok(last_pair) -> bool:
        g, f = last_pair
        for h in range(n_arr):
            # (h.g).f vs h.(g.f)
            if arrows[g][1] == arrows[h][0]:
                hg = comp.get((h, g))
                gf = comp.get((g, f))
                if hg is not None and gf is not None:
                    lhs = comp.get((hg, f))
                    rhs = comp.get((h, gf))
                    if lhs is not None and rhs is not None and lhs != rhs:
                        return False
            # (g.f).h vs g.(f.h)
            if arrows[h][1] == arrows[f][0]:
                gf = comp.get((g, f))
                fh = comp.get((f, h))
                if gf is not None and fh is not None:
                    lhs = comp.get((gf, h))
                    rhs = comp.get((g, fh))
                    if lhs is not None and rhs is not None and lhs != rhs:
                        return False
            # g.(f.h) new middle: f.h = last? covered above by symmetry
        return True

    def bt(k: int):
        if k == len(free_pairs):
            out.append(FinCat(n_obj, arrows, dict(comp), [ids[i] for i in
                                                          range(n_obj)],
                              check=False))
            return
        g, f = free_pairs[k]
        i, j = arrows[f][0], arrows[g][1]
        for h in hom_arrows[(i, j)]:
            comp[(g, f)] = h
            if assoc_ok((g, f)):
                bt(k + 1)
        del comp[(g, f)]

    bt(0)
    return [c for c in out if not c.violations()]


def _canonical_cat_key(cat: FinCat) -> tuple:
    """Smallest serialization over object and within-hom arrow relabelings."""
    n_obj = cat.n_obj
    best = None
    hom_lists = {}
    for i in range(n_obj):
        for j in range(n_obj):
            hom_lists[(i, j)] = cat.hom(i, j)
    for operm in itertools.permutations(range(n_obj)):
        # arrows regrouped by permuted homs; identities first in each diag
        groups = []
        ok = True
        for i in range(n_obj):
            for j in range(n_obj):
                src = hom_lists[(operm[i], operm[j])]
                groups.append(((i, j), src))
        sizes_ok = True
        # permute arrows within each hom-set
        choices = []
        for (ij, src) in groups:
            i, j = ij
            if i == j:
                ident = cat.ids[operm[i]]
                rest = [a for a in src if a != ident]
                choices.append([(ident,) + p
                                for p in itertools.permutations(rest)])
            else:
                choices.append(list(itertools.permutations(src)))
        for combo in itertools.product(*choices):
            relabel = {}
            new_index = 0
            for perm_arrows in combo:
                for a in perm_arrows:
                    relabel[a] = new_index
                    new_index += 1
            ser = []
            inv = {v: k for k, v in relabel.items()}
            for g in range(cat.n_arr()):
                for f in range(cat.n_arr()):
                    old = cat.comp.get((inv[g], inv[f]))
                    ser.append(-1 if old is None else relabel[old])
            key = tuple(ser)
            if best is None or key < best:
                best = key
    return (n_obj, tuple(len(cat.hom(i, j)) for i in range(n_obj)
                         for j in range(n_obj)), best)


def all_categories(max_obj: int, max_arr: int,
                   include_empty: bool = True) -> list[FinCat]:
    """Finite categories with bounded objects and arrows, up to isomorphism.

    Deterministic order: object count, then hom matrix, then table."""
    out: list[FinCat] = []
    if include_empty and max_obj >= 0:
        out.append(FinCat(0, [], {}, []))
    for n in range(1, max_obj + 1):
        if n == 1:
            for order in range(1, max_arr + 1):
                for t in monoid_tables(order):
                    out.append(monoid_to_fincat(t))
            continue
        seen = set()
        for hom in _hom_matrices(n, max_arr):
            for cat in _categories_for_matrix(n, hom):
                key = _canonical_cat_key(cat)
                if key in seen:
                    continue
                seen.add(key)
                out.append(cat)
    return out
