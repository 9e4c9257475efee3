"""Finite models of checked theories.

A model assigns each sort family a finite fiber per environment (a tuple of
elements for the family's telescope) and each operation a total table.
Equations are checked exhaustively over all environments.  Morphisms are
per-sort, per-environment functions commuting with the operation tables.

Fullness of a morphism is the weak-pullback condition at display maps; for
these dependently sorted models it amounts to surjectivity on every fiber
over the image, which is checked directly and witnessed on failure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .gat.checker import CheckedTheory
from .gat.syntax import App, Context, EqDecl, OpDecl, SortDecl, SortEqDecl, \
    SortExpr, Term, Var

Env = tuple
Elem = object


def _ekey(x) -> tuple:
    return (x.__class__.__name__, repr(x))


class ModelError(ValueError):
    pass


class FullnessViolated(ValueError):
    def __init__(self, witness):
        super().__init__(f"component is not full: {witness}")
        self.witness = witness


class TheoryModel:
    def __init__(self, ct: CheckedTheory,
                 carriers: dict[str, dict[Env, tuple]],
                 ops: dict[str, dict[Env, Elem]]):
        self.ct = ct
        # normalize: sorted envs, element tuples in stable order
        self.carriers = {
            s: {env: tuple(sorted(elems, key=_ekey))
                for env, elems in sorted(table.items(), key=lambda kv: _ekey(kv[0]))}
            for s, table in carriers.items()
        }
        self.ops = {o: dict(table) for o, table in ops.items()}

    # -- evaluation ---------------------------------------------------------

    def eval_term(self, t: Term, env: Env) -> Elem:
        if isinstance(t, Var):
            return env[t.index]
        return self.ops[t.op][tuple(self.eval_term(a, env) for a in t.args)]

    def sort_key(self, s: SortExpr, env: Env) -> Env:
        return tuple(self.eval_term(a, env) for a in s.args)

    def fiber(self, s: SortExpr, env: Env) -> tuple:
        return self.carriers.get(s.head, {}).get(self.sort_key(s, env), ())

    def envs(self, ctx: Context) -> list[Env]:
        """All valid environments for a context, in deterministic order."""
        out: list[Env] = [()]
        for i in range(len(ctx)):
            nxt = []
            for env in out:
                for v in self.fiber(ctx.sorts[i], env):
                    nxt.append(env + (v,))
            out = nxt
        return out

    def family_envs(self, sort_name: str) -> list[Env]:
        return list(self.carriers.get(sort_name, {}).keys())

    def size(self, sort_name: str) -> int:
        return sum(len(v) for v in self.carriers.get(sort_name, {}).values())

    def total_size(self) -> dict[str, int]:
        return {s: self.size(s) for s in self.ct.sort_order}

    # -- structural equality / canonical form --------------------------------

    def table_fingerprint(self) -> tuple:
        cs = tuple(
            (s, tuple((env, elems) for env, elems in self.carriers.get(s, {}).items()))
            for s in self.ct.sort_order)
        os_ = tuple(
            (o, tuple(sorted(self.ops.get(o, {}).items(), key=lambda kv: _ekey(kv[0]))))
            for o in self.ct.op_order)
        return (cs, os_)

    def __eq__(self, other):
        return isinstance(other, TheoryModel) and \
            self.table_fingerprint() == other.table_fingerprint()

    def __hash__(self):
        return hash(self.table_fingerprint())

    def relabel(self, fn: Callable[[str, Env, Elem], Elem]) -> "TheoryModel":
        """Rebuild with every element (family, env, x) renamed to fn(...)."""
        env_map: dict[tuple[str, Env], Env] = {}

        def map_env(ctx: Context, env: Env) -> Env:
            out = []
            for i in range(len(env)):
                key = self.sort_key(ctx.sorts[i], env[:i])
                out.append(fn(ctx.sorts[i].head, key, env[i]))
            return tuple(out)

        carriers: dict[str, dict[Env, tuple]] = {}
        for s in self.ct.sort_order:
            decl = self.ct.sort_decls[s]
            table = {}
            for env, elems in self.carriers.get(s, {}).items():
                table[map_env(decl.context, env)] = tuple(
                    fn(s, env, v) for v in elems)
            carriers[s] = table
        ops: dict[str, dict[Env, Elem]] = {}
        for o in self.ct.op_order:
            decl = self.ct.op_decls[o]
            table = {}
            for env, val in self.ops.get(o, {}).items():
                key = self.sort_key(decl.result, env)
                table[map_env(decl.context, env)] = fn(decl.result.head, key, val)
            ops[o] = table
        return TheoryModel(self.ct, carriers, ops)

    def to_json(self) -> dict:
        def enc(x):
            return repr(x)

        return {
            "carriers": {
                s: [{"env": [enc(e) for e in env], "elems": [enc(v) for v in elems]}
                    for env, elems in self.carriers.get(s, {}).items()]
                for s in self.ct.sort_order},
            "ops": {
                o: [{"env": [enc(e) for e in env], "value": enc(v)}
                    for env, v in sorted(self.ops.get(o, {}).items(),
                                         key=lambda kv: _ekey(kv[0]))]
                for o in self.ct.op_order},
        }


@dataclass
class ModelViolation:
    kind: str
    message: str
    witness: dict

    def to_json(self):
        return {"kind": self.kind, "message": self.message,
                "witness": {k: repr(v) for k, v in self.witness.items()}}


@dataclass
class ModelReport:
    ok: bool
    violations: list[ModelViolation]

    def to_json(self):
        return {"ok": self.ok,
                "violations": [v.to_json() for v in self.violations]}


def check_model(ct: CheckedTheory, m: TheoryModel, max_violations: int = 100) -> ModelReport:
    vs: list[ModelViolation] = []

    def add(kind, msg, wit):
        if len(vs) < max_violations:
            vs.append(ModelViolation(kind, msg, wit))

    # carrier tables indexed exactly by the valid environments
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        want = m.envs(decl.context)
        have = sorted(m.carriers.get(s, {}).keys(), key=_ekey)
        if sorted(want, key=_ekey) != have:
            add("carrier-index", f"carrier of {s!r} not indexed by valid environments",
                {"expected": want, "got": have})
    # op tables total with values in the right fiber
    for o in ct.op_order:
        decl = ct.op_decls[o]
        for env in m.envs(decl.context):
            if env not in m.ops.get(o, {}):
                add("op-total", f"operation {o!r} undefined", {"env": env})
                continue
            val = m.ops[o][env]
            if val not in m.fiber(decl.result, env):
                add("op-sort", f"operation {o!r} lands outside its fiber",
                    {"env": env, "value": val})
    if vs:
        return ModelReport(False, vs)
    # equations under every environment
    for ax in ct.theory.axioms:
        if isinstance(ax, EqDecl):
            for env in m.envs(ax.context):
                vals = [m.eval_term(t, env) for t in ax.sides]
                for i in range(len(vals) - 1):
                    if vals[i] != vals[i + 1]:
                        add("equation", f"equation {ax.name!r} fails",
                            {"env": env, "lhs": vals[i], "rhs": vals[i + 1]})
                        break
        elif isinstance(ax, SortEqDecl):
            for env in m.envs(ax.context):
                if m.fiber(ax.lhs, env) != m.fiber(ax.rhs, env):
                    add("sort-equation", f"sort equation {ax.name!r} fails",
                        {"env": env})
    return ModelReport(not vs, vs)


def terminal_model(ct: CheckedTheory) -> TheoryModel:
    carriers: dict[str, dict[Env, tuple]] = {}
    ops: dict[str, dict[Env, Elem]] = {}
    m = TheoryModel(ct, {}, {})
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        m = TheoryModel(ct, {**m.carriers, s: {env: (0,) for env in m.envs(decl.context)}},
                        m.ops)
    for o in ct.op_order:
        decl = ct.op_decls[o]
        ops[o] = {env: 0 for env in m.envs(decl.context)}
        m = TheoryModel(ct, m.carriers, {**m.ops, **{o: ops[o]}})
    return m


# ---------------------------------------------------------------------------
# Morphisms


class ModelMorphism:
    def __init__(self, src: TheoryModel, dst: TheoryModel,
                 maps: dict[str, dict[Env, dict[Elem, Elem]]],
                 check: bool = True):
        self.src = src
        self.dst = dst
        self.maps = maps
        if check:
            bad = self.violations()
            if bad:
                raise ModelError(f"not a morphism: {bad[0].message}")

    def map_elem(self, sort_name: str, key: Env, v: Elem) -> Elem:
        return self.maps[sort_name][key][v]

    def map_env(self, ctx: Context, env: Env) -> Env:
        out = []
        for i in range(len(env)):
            key = self.src.sort_key(ctx.sorts[i], env[:i])
            out.append(self.map_elem(ctx.sorts[i].head, key, env[i]))
        return tuple(out)

    def violations(self) -> list[ModelViolation]:
        ct = self.src.ct
        out = []
        for s in ct.sort_order:
            decl = ct.sort_decls[s]
            for env in self.src.envs(decl.context):
                table = self.maps.get(s, {}).get(env)
                if table is None:
                    out.append(ModelViolation("map-missing",
                                              f"no component for {s!r}", {"env": env}))
                    return out
                tgt_env = self.map_env(decl.context, env)
                fib = set(self.dst.carriers.get(s, {}).get(tgt_env, ()))
                for v in self.src.carriers[s][env]:
                    if table.get(v) not in fib:
                        out.append(ModelViolation(
                            "map-range", f"component of {s!r} leaves its fiber",
                            {"env": env, "elem": v}))
                        return out
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env in self.src.envs(decl.context):
                key = self.src.sort_key(decl.result, env)
                lhs = self.map_elem(decl.result.head, key, self.src.ops[o][env])
                rhs = self.dst.ops[o][self.map_env(decl.context, env)]
                if lhs != rhs:
                    out.append(ModelViolation(
                        "op-commute", f"morphism does not commute with {o!r}",
                        {"env": env, "lhs": lhs, "rhs": rhs}))
                    return out
        return out

    def then(self, other: "ModelMorphism") -> "ModelMorphism":
        maps: dict[str, dict[Env, dict[Elem, Elem]]] = {}
        ct = self.src.ct
        for s in ct.sort_order:
            decl = ct.sort_decls[s]
            maps[s] = {}
            for env in self.src.envs(decl.context):
                mid_env = self.map_env(decl.context, env)
                maps[s][env] = {
                    v: other.maps[s][mid_env][self.maps[s][env][v]]
                    for v in self.src.carriers[s][env]}
        return ModelMorphism(self.src, other.dst, maps, check=False)

    def is_identity_shape(self) -> bool:
        return all(all(all(k == v for k, v in t.items()) for t in envs.values())
                   for envs in self.maps.values())

    def fingerprint(self) -> tuple:
        return tuple(
            (s, tuple((env, tuple(sorted(t.items(), key=lambda kv: _ekey(kv[0]))))
                      for env, t in sorted(self.maps.get(s, {}).items(),
                                           key=lambda kv: _ekey(kv[0]))))
            for s in self.src.ct.sort_order)

    def __eq__(self, other):
        return isinstance(other, ModelMorphism) and \
            self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def to_json(self):
        return {s: [{"env": [repr(e) for e in env],
                     "map": [[repr(k), repr(v)] for k, v in
                             sorted(t.items(), key=lambda kv: _ekey(kv[0]))]}
                    for env, t in sorted(self.maps.get(s, {}).items(),
                                         key=lambda kv: _ekey(kv[0]))]
                for s in self.src.ct.sort_order}


def identity_morphism(m: TheoryModel) -> ModelMorphism:
    maps = {s: {env: {v: v for v in elems}
                for env, elems in m.carriers.get(s, {}).items()}
            for s in m.ct.sort_order}
    return ModelMorphism(m, m, maps, check=False)


def hom_set(a: TheoryModel, b: TheoryModel) -> list[ModelMorphism]:
    """All morphisms a -> b by backtracking, deterministic order."""
    ct = a.ct
    # assignment slots in dependency order
    slots: list[tuple[str, Env, Elem]] = []
    for s in ct.sort_order:
        for env in a.family_envs(s):
            for v in a.carriers[s][env]:
                slots.append((s, env, v))
    assign: dict[tuple[str, Env, Elem], Elem] = {}

    def map_env(ctx: Context, env: Env, prefix_ok: bool = True) -> Optional[Env]:
        out = []
        for i in range(len(env)):
            key = a.sort_key(ctx.sorts[i], env[:i])
            img = assign.get((ctx.sorts[i].head, key, env[i]))
            if img is None:
                return None
            out.append(img)
        return tuple(out)

    def ops_consistent() -> bool:
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env, val in a.ops.get(o, {}).items():
                t_env = map_env(decl.context, env)
                if t_env is None:
                    continue
                key = a.sort_key(decl.result, env)
                img = assign.get((decl.result.head, key, val))
                if img is None:
                    continue
                if b.ops[o][t_env] != img:
                    return False
        return True

    out: list[ModelMorphism] = []

    def bt(i: int):
        if i == len(slots):
            maps: dict[str, dict[Env, dict[Elem, Elem]]] = {}
            for (s, env, v), w in assign.items():
                maps.setdefault(s, {}).setdefault(env, {})[v] = w
            for s in ct.sort_order:
                maps.setdefault(s, {})
                for env in a.family_envs(s):
                    maps[s].setdefault(env, {})
            out.append(ModelMorphism(a, b, maps, check=False))
            return
        s, env, v = slots[i]
        decl = ct.sort_decls[s]
        t_env = map_env(decl.context, env)
        if t_env is None:  # unreachable given slot ordering
            return
        for w in b.carriers.get(s, {}).get(t_env, ()):
            assign[(s, env, v)] = w
            if ops_consistent():
                bt(i + 1)
            del assign[(s, env, v)]

    bt(0)
    return out


# ---------------------------------------------------------------------------
# Fullness


def is_full(f: ModelMorphism) -> tuple[bool, Optional[dict]]:
    """Weak-pullback condition at the sort-family display maps.

    For carrier-table models this is surjectivity of every fiber component
    over the image; the witness names the display (sort family), the base
    environment, and the element with no preimage.
    """
    ct = f.src.ct
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        for env in f.src.family_envs(s):
            t_env = f.map_env(decl.context, env)
            image = {f.maps[s][env][v] for v in f.src.carriers[s][env]}
            for w in f.dst.carriers.get(s, {}).get(t_env, ()):
                if w not in image:
                    return False, {"display": s, "env": env,
                                   "target_env": t_env, "element": w}
    return True, None


def is_surjective(f: ModelMorphism) -> bool:
    """Pointwise surjectivity on all fibers of the codomain."""
    ct = f.src.ct
    for s in ct.sort_order:
        covered: dict[tuple[Env, Elem], bool] = {}
        for env in f.src.family_envs(s):
            t_env = f.map_env(ct.sort_decls[s].context, env)
            for v in f.src.carriers[s][env]:
                covered[(t_env, f.maps[s][env][v])] = True
        for env in f.dst.family_envs(s):
            for w in f.dst.carriers[s][env]:
                if (env, w) not in covered:
                    return False
    return True


# ---------------------------------------------------------------------------
# Relations, kernel pairs, quotients

Point = tuple  # (sort_name, env, elem)


@dataclass
class EquivRelation:
    """A relation model with jointly monic projections to a base model."""

    model: TheoryModel
    p: ModelMorphism
    q: ModelMorphism

    def base(self) -> TheoryModel:
        return self.p.dst

    def pairs(self) -> dict[str, set[tuple[tuple[Env, Elem], tuple[Env, Elem]]]]:
        """Image of <p,q> per sort family as a set of element pairs."""
        ct = self.model.ct
        out: dict[str, set] = {s: set() for s in ct.sort_order}
        for s in ct.sort_order:
            decl = ct.sort_decls[s]
            for env in self.model.family_envs(s):
                p_env = self.p.map_env(decl.context, env)
                q_env = self.q.map_env(decl.context, env)
                for v in self.model.carriers[s][env]:
                    out[s].add(((p_env, self.p.maps[s][env][v]),
                                (q_env, self.q.maps[s][env][v])))
        return out

    def violations(self) -> list[str]:
        ct = self.model.ct
        out = []
        a = self.base()
        rel = self.pairs()
        # jointly monic per fiber
        for s in ct.sort_order:
            for env in self.model.family_envs(s):
                seen = {}
                decl = ct.sort_decls[s]
                for v in self.model.carriers[s][env]:
                    key = (self.p.maps[s][env][v], self.q.maps[s][env][v])
                    if key in seen:
                        out.append(f"<p,q> not injective on fiber of {s!r}")
                        break
                    seen[key] = v
        for s in ct.sort_order:
            r = rel[s]
            for env in a.family_envs(s):
                for v in a.carriers[s][env]:
                    if ((env, v), (env, v)) not in r:
                        out.append(f"relation on {s!r} not reflexive at {env}/{v!r}")
        for s in ct.sort_order:
            r = rel[s]
            for (x, y) in r:
                if (y, x) not in r:
                    out.append(f"relation on {s!r} not symmetric")
                    break
        for s in ct.sort_order:
            r = rel[s]
            by_left: dict = {}
            for (x, y) in r:
                by_left.setdefault(x, set()).add(y)
            for (x, y) in r:
                for z in by_left.get(y, ()):
                    if (x, z) not in r:
                        out.append(f"relation on {s!r} not transitive")
                        break
        return out

    def is_equivalence(self) -> bool:
        return not self.violations()


def kernel_pair(f: ModelMorphism) -> EquivRelation:
    """Pointwise kernel pair of f as a relation model with projections."""
    a, ct = f.src, f.src.ct
    carriers: dict[str, dict[Env, tuple]] = {}
    ops: dict[str, dict[Env, Elem]] = {}
    r = TheoryModel(ct, {}, {})

    def split_env(env: Env) -> tuple[Env, Env]:
        return tuple(x[0] for x in env), tuple(x[1] for x in env)

    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        table: dict[Env, tuple] = {}
        for env in r.envs(decl.context):
            le, re_ = split_env(env)
            elems = []
            for v in a.carriers[s].get(le, ()):
                for w in a.carriers[s].get(re_, ()):
                    if f_point(f, s, a, decl.context, le, v) == \
                       f_point(f, s, a, decl.context, re_, w):
                        elems.append((v, w))
            table[env] = tuple(elems)
        carriers[s] = table
        r = TheoryModel(ct, carriers, ops)
    for o in ct.op_order:
        decl = ct.op_decls[o]
        table = {}
        for env in r.envs(decl.context):
            le, re_ = split_env(env)
            table[env] = (a.ops[o][le], a.ops[o][re_])
        ops[o] = table
        r = TheoryModel(ct, carriers, ops)

    p = _projection(r, a, 0)
    q = _projection(r, a, 1)
    return EquivRelation(r, p, q)


def a_env_key(a: TheoryModel, ctx: Context, env: Env) -> Env:
    return env


def f_point(f: ModelMorphism, s: str, a: TheoryModel, ctx: Context,
            env: Env, v: Elem) -> tuple:
    t_env = f.map_env(ctx, env)
    return (t_env, f.maps[s][env][v])


def _projection(r: TheoryModel, a: TheoryModel, side: int) -> ModelMorphism:
    ct = r.ct
    maps: dict[str, dict[Env, dict[Elem, Elem]]] = {}
    for s in ct.sort_order:
        maps[s] = {}
        for env in r.family_envs(s):
            maps[s][env] = {v: v[side] for v in r.carriers[s][env]}
    return ModelMorphism(r, a, maps, check=False)


def diagonal_relation(a: TheoryModel) -> EquivRelation:
    return kernel_pair(identity_morphism(a))


def quotient(a: TheoryModel, r: EquivRelation) -> tuple[TheoryModel, ModelMorphism]:
    """Pointwise quotient of a by r; requires full components.

    Raises FullnessViolated when either projection fails the fullness check
    (the construction is not attempted).  The result is re-checked by the
    caller-facing invariants: the quotient is a model, the projection is
    full, and r is recovered as its kernel pair.
    """
    for g, name in ((r.p, "p"), (r.q, "q")):
        ok, wit = is_full(g)
        if not ok:
            raise FullnessViolated({"component": name, **wit})
    bad = r.violations()
    if bad:
        raise ModelError(f"not an equivalence relation: {bad[0]}")
    ct = a.ct
    rel = r.pairs()

    # union-find over points (sort, env, elem)
    parent: dict[Point, Point] = {}

    def find(x: Point) -> Point:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent.get(x, x), parent.get(x, x))
            x = parent[x]
        return x

    def union(x: Point, y: Point):
        rx, ry = find(x), find(y)
        if rx != ry:
            if _ekey(rx) <= _ekey(ry):
                parent[ry] = rx
            else:
                parent[rx] = ry

    for s in ct.sort_order:
        for env in a.family_envs(s):
            for v in a.carriers[s][env]:
                parent.setdefault((s, env, v), (s, env, v))
        for ((e1, v1), (e2, v2)) in rel[s]:
            union((s, e1, v1), (s, e2, v2))

    # class ids in stable order
    classes = sorted({find(p) for p in parent}, key=_ekey)
    class_ix = {c: i for i, c in enumerate(classes)}

    def point_class(s: str, env: Env, v: Elem) -> int:
        return class_ix[find((s, env, v))]

    def env_class(ctx: Context, env: Env) -> Env:
        out = []
        for i in range(len(env)):
            key = a.sort_key(ctx.sorts[i], env[:i])
            out.append(point_class(ctx.sorts[i].head, key, env[i]))
        return tuple(out)

    carriers: dict[str, dict[Env, tuple]] = {}
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        table: dict[Env, set] = {}
        for env in a.family_envs(s):
            ce = env_class(decl.context, env)
            table.setdefault(ce, set())
            for v in a.carriers[s][env]:
                table[ce].add(point_class(s, env, v))
        carriers[s] = {e: tuple(sorted(vs)) for e, vs in table.items()}

    ops: dict[str, dict[Env, Elem]] = {}
    for o in ct.op_order:
        decl = ct.op_decls[o]
        table: dict[Env, Elem] = {}
        for env in a.envs(decl.context):
            ce = env_class(decl.context, env)
            key = a.sort_key(decl.result, env)
            val = point_class(decl.result.head, key, a.ops[o][env])
            if ce in table and table[ce] != val:
                raise ModelError(
                    f"relation is not a congruence for operation {o!r}")
            table[ce] = val
        ops[o] = table

    b = TheoryModel(ct, carriers, ops)
    maps = {s: {env: {v: point_class(s, env, v) for v in a.carriers[s][env]}
                for env in a.family_envs(s)}
            for s in ct.sort_order}
    qm = ModelMorphism(a, b, maps, check=False)
    return b, qm


# ---------------------------------------------------------------------------
# Pullbacks of models (needed for kernel objects and resolutions)


def pullback_model(f: ModelMorphism, g: ModelMorphism) \
        -> tuple[TheoryModel, ModelMorphism, ModelMorphism]:
    """Pointwise pullback of f: A -> C and g: B -> C; elements are pairs."""
    assert f.dst is g.dst or f.dst == g.dst
    a, b, ct = f.src, g.src, f.src.ct
    carriers: dict[str, dict[Env, tuple]] = {}
    ops: dict[str, dict[Env, Elem]] = {}
    r = TheoryModel(ct, {}, {})

    def split_env(env: Env) -> tuple[Env, Env]:
        return tuple(x[0] for x in env), tuple(x[1] for x in env)

    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        table: dict[Env, tuple] = {}
        for env in r.envs(decl.context):
            le, re_ = split_env(env)
            elems = []
            for v in a.carriers[s].get(le, ()):
                for w in b.carriers[s].get(re_, ()):
                    if f_point(f, s, a, decl.context, le, v) == \
                       f_point(g, s, b, decl.context, re_, w):
                        elems.append((v, w))
            table[env] = tuple(elems)
        carriers[s] = table
        r = TheoryModel(ct, carriers, ops)
    for o in ct.op_order:
        decl = ct.op_decls[o]
        table = {}
        for env in r.envs(decl.context):
            le, re_ = split_env(env)
            table[env] = (a.ops[o][le], b.ops[o][re_])
        ops[o] = table
        r = TheoryModel(ct, carriers, ops)
    return r, _projection(r, a, 0), _projection(r, b, 1)


def limit_model(ct: CheckedTheory, objects: list[TheoryModel],
                arrows: list[tuple[int, int, ModelMorphism]]) \
        -> tuple[TheoryModel, list[ModelMorphism]]:
    """Limit of a finite diagram of models; elements are tuples.

    Built pointwise: a fiber element is a tuple of component elements that
    the diagram arrows match up; projections are the component maps.
    """
    n = len(objects)

    def comp_env(env: Env, k: int) -> Env:
        return tuple(x[k] for x in env)

    carriers: dict[str, dict[Env, tuple]] = {}
    ops: dict[str, dict[Env, Elem]] = {}
    lim = TheoryModel(ct, {}, {})
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        table: dict[Env, tuple] = {}
        for env in lim.envs(decl.context):
            envs_k = [comp_env(env, k) for k in range(n)]
            fibers = [objects[k].carriers[s].get(envs_k[k], ())
                      for k in range(n)]
            elems = []
            for tup in itertools.product(*fibers):
                ok = True
                for (i, j, u) in arrows:
                    if u.maps[s][envs_k[i]][tup[i]] != tup[j] or \
                       u.map_env(decl.context, envs_k[i]) != envs_k[j]:
                        ok = False
                        break
                if ok:
                    elems.append(tup)
            table[env] = tuple(elems)
        carriers[s] = table
        lim = TheoryModel(ct, carriers, ops)
    for o in ct.op_order:
        decl = ct.op_decls[o]
        table = {}
        for env in lim.envs(decl.context):
            table[env] = tuple(objects[k].ops[o][comp_env(env, k)]
                               for k in range(n))
        ops[o] = table
        lim = TheoryModel(ct, carriers, ops)
    projections = []
    for k in range(n):
        maps = {s: {env: {v: v[k] for v in lim.carriers[s][env]}
                    for env in lim.family_envs(s)}
                for s in ct.sort_order}
        projections.append(ModelMorphism(lim, objects[k], maps, check=False))
    return lim, projections


def product_model(ct: CheckedTheory, a: TheoryModel, b: TheoryModel):
    return limit_model(ct, [a, b], [])


def pairing_morphism(lim: TheoryModel, projections: list[ModelMorphism],
                     legs: list[ModelMorphism]) -> ModelMorphism:
    """The mediating morphism into a limit built from cone legs."""
    ct = lim.ct
    src = legs[0].src
    maps: dict[str, dict[Env, dict[Elem, Elem]]] = {}
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        maps[s] = {}
        for env in src.family_envs(s):
            maps[s][env] = {
                v: tuple(leg.maps[s][env][v] for leg in legs)
                for v in src.carriers[s][env]}
    out = ModelMorphism(src, lim, maps, check=False)
    bad = out.violations()
    if bad:
        raise ModelError(f"cone legs do not induce a morphism: {bad[0].message}")
    return out


def image_model(f: ModelMorphism) \
        -> tuple[TheoryModel, ModelMorphism, ModelMorphism]:
    """Pointwise image of f as a submodel of its target.

    Returns (image, corestriction, inclusion)."""
    ct = f.src.ct
    a, b = f.src, f.dst
    hit: dict[str, set] = {s: set() for s in ct.sort_order}
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        for env in a.family_envs(s):
            t_env = f.map_env(decl.context, env)
            for v in a.carriers[s][env]:
                hit[s].add((t_env, f.maps[s][env][v]))
    carriers = {s: {} for s in ct.sort_order}
    img = TheoryModel(ct, {}, {})
    for s in ct.sort_order:
        decl = ct.sort_decls[s]
        table = {}
        for env in img.envs(decl.context):
            table[env] = tuple(v for v in b.carriers[s].get(env, ())
                               if (env, v) in hit[s])
        carriers[s] = table
        img = TheoryModel(ct, carriers, {})
    ops: dict[str, dict[Env, Elem]] = {}
    for o in ct.op_order:
        decl = ct.op_decls[o]
        ops[o] = {env: b.ops[o][env] for env in img.envs(decl.context)}
        img = TheoryModel(ct, carriers, ops)
    incl = ModelMorphism(
        img, b,
        {s: {env: {v: v for v in img.carriers[s][env]}
             for env in img.family_envs(s)} for s in ct.sort_order},
        check=False)
    core = ModelMorphism(
        a, img,
        {s: {env: dict(f.maps[s][env]) for env in a.family_envs(s)}
         for s in ct.sort_order}, check=False)
    return img, core, incl


# ---------------------------------------------------------------------------
# Enumeration up to isomorphism


def _compositions(total: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def enumerate_models(ct: CheckedTheory, sizes: dict[str, int],
                     dedup: bool = True) -> list[TheoryModel]:
    """All models with the exact per-family total sizes, up to isomorphism.

    Deterministic order: carrier distributions lexicographically, then
    operation tables lexicographically; canonical-form deduplication.
    """
    models: list[TheoryModel] = []
    seen: set = set()

    def build_carriers(i: int, m: TheoryModel):
        if i == len(ct.sort_order):
            for filled in _fill_ops(ct, m, 0):
                if check_model(ct, filled, max_violations=1).ok:
                    if dedup:
                        key = canonical_form(filled)
                        if key in seen:
                            continue
                        seen.add(key)
                    models.append(filled)
            return
        s = ct.sort_order[i]
        decl = ct.sort_decls[s]
        envs = m.envs(decl.context)
        total = sizes.get(s, 0)
        for dist in _compositions(total, len(envs)):
            table = {}
            off = 0
            for env, k in zip(envs, dist):
                table[env] = tuple(range(off, off + k))
                off += k
            build_carriers(i + 1, TheoryModel(ct, {**m.carriers, s: table}, m.ops))

    build_carriers(0, TheoryModel(ct, {}, {}))
    return models


def _fill_ops(ct: CheckedTheory, m: TheoryModel, oi: int) -> Iterator[TheoryModel]:
    if oi == len(ct.op_order):
        yield m
        return
    o = ct.op_order[oi]
    decl = ct.op_decls[o]
    envs = m.envs(decl.context)
    fibers = [m.fiber(decl.result, env) for env in envs]
    if any(not f for f in fibers):
        return
    for values in itertools.product(*fibers):
        table = dict(zip(envs, values))
        m2 = TheoryModel(ct, m.carriers, {**m.ops, o: table})
        # prune: equations evaluable with the ops defined so far
        if _partial_equations_ok(ct, m2, oi):
            yield from _fill_ops(ct, m2, oi + 1)


def _partial_equations_ok(ct: CheckedTheory, m: TheoryModel, oi: int) -> bool:
    defined = set(ct.op_order[:oi + 1])
    for ax in ct.theory.axioms:
        if not isinstance(ax, EqDecl):
            continue
        if not all(op in defined for op in _ops_of_axiom(ax)):
            continue
        for env in m.envs(ax.context):
            vals = [m.eval_term(t, env) for t in ax.sides]
            if any(vals[i] != vals[i + 1] for i in range(len(vals) - 1)):
                return False
    return True


def _ops_of_axiom(ax: EqDecl) -> set[str]:
    out: set[str] = set()

    def walk(t: Term):
        if isinstance(t, App):
            out.add(t.op)
            for x in t.args:
                walk(x)

    for t in ax.sides:
        walk(t)
    return out


def enumerate_models_upto(ct: CheckedTheory, max_sizes: dict[str, int]) \
        -> list[TheoryModel]:
    """Union over all size vectors below the bounds, ascending order."""
    names = list(ct.sort_order)
    vectors = sorted(itertools.product(
        *[range(max_sizes.get(s, 0) + 1) for s in names]),
        key=lambda v: (sum(v), v))
    out = []
    for vec in vectors:
        out.extend(enumerate_models(ct, dict(zip(names, vec))))
    return out


def _relabelings(m: TheoryModel) -> Iterator[Callable[[str, Env, Elem], Elem]]:
    """All model self-relabelings: per family, fiber-respecting bijections
    compatible with the environment renaming induced by earlier families."""
    ct = m.ct

    def extend(i: int, fn_map: dict[tuple[str, Env, Elem], Elem]):
        if i == len(ct.sort_order):
            yield dict(fn_map)
            return
        s = ct.sort_order[i]
        decl = ct.sort_decls[s]

        def map_env(env: Env) -> Optional[Env]:
            out = []
            for j in range(len(env)):
                key = m.sort_key(decl.context.sorts[j], env[:j])
                img = fn_map.get((decl.context.sorts[j].head, key, env[j]))
                if img is None:
                    return None
                out.append(img)
            return tuple(out)

        envs = m.family_envs(s)
        env_imgs = {}
        ok = True
        for env in envs:
            img = map_env(env)
            if img is None or img not in m.carriers[s]:
                ok = False
                break
            if len(m.carriers[s][env]) != len(m.carriers[s][img]):
                ok = False
                break
            env_imgs[env] = img
        if not ok:
            return
        # product of fiber bijections
        fiber_bijections = []
        for env in envs:
            src = m.carriers[s][env]
            dst = m.carriers[s][env_imgs[env]]
            fiber_bijections.append([dict(zip(src, p))
                                     for p in itertools.permutations(dst)])
        for combo in itertools.product(*fiber_bijections):
            fn2 = dict(fn_map)
            for env, bij in zip(envs, combo):
                for v, w in bij.items():
                    fn2[(s, env, v)] = w
            yield from extend(i + 1, fn2)

    yield from extend(0, {})


def standardize(m: TheoryModel) -> TheoryModel:
    """Rename elements to consecutive integers per family, structurally."""
    counter: dict[str, int] = {}
    names: dict[Point, int] = {}
    for s in m.ct.sort_order:
        for env in m.family_envs(s):
            for v in m.carriers[s][env]:
                names[(s, env, v)] = counter.get(s, 0)
                counter[s] = counter.get(s, 0) + 1
    return m.relabel(lambda s, env, v: names[(s, env, v)])


def canonical_form(m: TheoryModel) -> tuple:
    """Smallest standardized relabeling; equal iff isomorphic."""
    best = None
    for fn_map in _relabelings(m):
        m2 = standardize(m.relabel(lambda s, env, v: fn_map[(s, env, v)]))
        key = m2.table_fingerprint()
        sk = repr(key)
        if best is None or sk < best[0]:
            best = (sk, key)
    assert best is not None
    return best[1]


def models_isomorphic(a: TheoryModel, b: TheoryModel) -> bool:
    if a.total_size() != b.total_size():
        return False
    return canonical_form(a) == canonical_form(b)
