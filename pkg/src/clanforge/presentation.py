"""Presented models: ground congruence closure over a theory.

A presentation is a set of generators (each a fresh element of some sort
family over an environment of earlier values) together with the table of a
base model; the presented model is computed by saturating the operation
tables and merging by the theory's equations until a fixpoint, with a cap
guarding divergence (free extensions need not be finite).

This is what pushouts of models along the display generators H(p) amount
to: glue fresh elements onto a model at an attaching environment, then
re-close.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .gat.checker import CheckedTheory
from .gat.syntax import Context, EqDecl, SortExpr
from .models import Env, ModelMorphism, TheoryModel, check_model


class PushoutDiverged(RuntimeError):
    pass


class _Closure:
    """Union-find with congruence over operation applications."""

    def __init__(self, ct: CheckedTheory, cap: int):
        self.ct = ct
        self.cap = cap
        self.parent: dict[object, object] = {}
        self.sort_of: dict[object, tuple[str, tuple]] = {}  # node -> (family, env nodes)
        self.app_table: dict[tuple, object] = {}  # (op, arg class reps) -> node
        self.birth: dict[object, int] = {}
        self.n_nodes = 0

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def add_node(self, node, family: str, env: tuple):
        if node in self.parent:
            return self.find(node)
        self.parent[node] = node
        self.sort_of[node] = (family, env)
        self.birth[node] = self.n_nodes
        self.n_nodes += 1
        if self.n_nodes > self.cap:
            raise PushoutDiverged("closure exceeded the element cap")
        return node

    def union(self, a, b) -> bool:
        # the oldest node wins, keeping representatives stable as towers of
        # derived applications are merged away
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.birth[ra] <= self.birth[rb]:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True


def saturate(ct: CheckedTheory, generators: list[tuple[str, tuple]],
             base: Optional[TheoryModel] = None,
             cap: int = 96, max_rounds: int = 64) \
        -> tuple[TheoryModel, dict]:
    """Close a presentation to a model.

    `generators` lists (sort family, environment) pairs in dependency
    order, where environments may mention base elements (as ("b", family,
    env, elem) nodes) and earlier generators (as ("g", index) nodes).
    Returns the model (elements are class representatives) plus a mapping
    from base points to elements witnessing the inclusion of the base.
    """
    cl = _Closure(ct, cap)

    def base_node(s, env, v):
        return ("b", s, env, v)

    # import base elements and tables
    if base is not None:
        for s in ct.sort_order:
            decl = ct.sort_decls[s]
            for env in base.family_envs(s):
                env_nodes = tuple(
                    base_node(decl.context.sorts[i].head,
                              base.sort_key(decl.context.sorts[i], env[:i]),
                              env[i])
                    for i in range(len(env)))
                for v in base.carriers[s][env]:
                    cl.add_node(base_node(s, env, v), s, env_nodes)
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env, val in base.ops.get(o, {}).items():
                arg_nodes = tuple(
                    base_node(decl.context.sorts[i].head,
                              base.sort_key(decl.context.sorts[i], env[:i]),
                              env[i])
                    for i in range(len(env)))
                res_key = base.sort_key(decl.result, env)
                cl.app_table[(o,) + arg_nodes] = \
                    base_node(decl.result.head, res_key, val)
    for k, (s, env_nodes) in enumerate(generators):
        cl.add_node(("g", k), s, tuple(env_nodes))

    def class_env(node):
        fam, env = cl.sort_of[node]
        return tuple(cl.find(e) for e in env)

    def eval_term(t, env_map):
        from .gat.syntax import App, Var
        if isinstance(t, Var):
            return env_map[t.index]
        args = tuple(cl.find(eval_term(a, env_map)) for a in t.args)
        key = (t.op,) + args
        hit = cl.app_table.get(key)
        if hit is not None:
            return cl.find(hit)
        decl = ct.op_decls[t.op]
        fam = decl.result.head
        node = ("app",) + key
        # the result's fiber environment: evaluate the result sort's args
        renv = tuple(cl.find(eval_term(a, dict(enumerate(args))))
                     for a in decl.result.args)
        cl.add_node(node, fam, renv)
        cl.app_table[key] = node
        return node

    def current_model() -> TheoryModel:
        carriers: dict[str, dict[Env, tuple]] = {s: {} for s in ct.sort_order}
        reps: dict[str, dict[object, None]] = {s: {} for s in ct.sort_order}
        for node in list(cl.parent):
            fam, _ = cl.sort_of[node]
            reps[fam][cl.find(node)] = None
        for s in ct.sort_order:
            for r in reps[s]:
                env = class_env(r)
                carriers[s].setdefault(env, [])
                if r not in carriers[s][env]:
                    carriers[s][env].append(r)
        ops: dict[str, dict[Env, object]] = {o: {} for o in ct.op_order}
        for key, node in cl.app_table.items():
            op = key[0]
            env = tuple(cl.find(a) for a in key[1:])
            ops[op][env] = cl.find(node)
        m = TheoryModel(ct, {s: {e: tuple(vs) for e, vs in t.items()}
                             for s, t in carriers.items()}, ops)
        # carriers must be keyed by every valid environment (even empty)
        carriers2 = {s: dict(m.carriers.get(s, {})) for s in ct.sort_order}
        for s in ct.sort_order:
            decl = ct.sort_decls[s]
            for env in m.envs(decl.context):
                carriers2[s].setdefault(env, ())
        return TheoryModel(ct, carriers2, m.ops)

    for _ in range(max_rounds):
        changed = False
        m = current_model()
        # totalize operations
        for o in ct.op_order:
            decl = ct.op_decls[o]
            for env in m.envs(decl.context):
                key = (o,) + tuple(cl.find(e) for e in env)
                if key not in cl.app_table:
                    eval_term_env = dict(enumerate(key[1:]))
                    from .gat.syntax import App, Var
                    eval_term(App(o, tuple(Var(i) for i in range(len(env)))),
                              eval_term_env)
                    changed = True
        # congruence after merges: rebuild app table keys
        rebuilt: dict[tuple, object] = {}
        for key, node in list(cl.app_table.items()):
            nk = (key[0],) + tuple(cl.find(a) for a in key[1:])
            other = rebuilt.get(nk)
            if other is None:
                rebuilt[nk] = cl.find(node)
            else:
                if cl.union(other, node):
                    changed = True
                rebuilt[nk] = cl.find(node)
        cl.app_table = rebuilt
        # equations on all environments
        m = current_model()
        for ax in ct.theory.axioms:
            if not isinstance(ax, EqDecl):
                continue
            for env in m.envs(ax.context):
                vals = [cl.find(eval_term(t, dict(enumerate(env))))
                        for t in ax.sides]
                for i in range(len(vals) - 1):
                    if cl.union(vals[i], vals[i + 1]):
                        changed = True
        if not changed:
            break
    else:
        raise PushoutDiverged("closure did not stabilize")

    model = current_model()
    rep = check_model(ct, model, max_violations=1)
    if not rep.ok:
        raise PushoutDiverged(
            f"closure produced a non-model: {rep.violations[0].message}")
    point_map = {}
    if base is not None:
        for s in ct.sort_order:
            for env in base.family_envs(s):
                for v in base.carriers[s][env]:
                    point_map[(s, env, v)] = cl.find(base_node(s, env, v))
    gen_map = {k: cl.find(("g", k)) for k in range(len(generators))}
    return model, {"points": point_map, "generators": gen_map}


def initial_model(ct: CheckedTheory, cap: int = 96) -> TheoryModel:
    """The model presented by no generators (closed terms modulo equations)."""
    m, _ = saturate(ct, [], None, cap)
    return m


def base_inclusion(ct: CheckedTheory, base: TheoryModel, model: TheoryModel,
                   point_map: dict) -> ModelMorphism:
    maps: dict[str, dict[Env, dict]] = {}
    for s in ct.sort_order:
        maps[s] = {}
        for env in base.family_envs(s):
            maps[s][env] = {v: point_map[(s, env, v)]
                            for v in base.carriers[s][env]}
    return ModelMorphism(base, model, maps, check=False)


def pushout_along_display(ct: CheckedTheory, a: TheoryModel,
                          base_ctx: Context, ext_ctx: Context,
                          attach_env: Env, cap: int = 96) \
        -> tuple[TheoryModel, ModelMorphism, Env]:
    """Pushout of a <- H(base_ctx) >-> H(ext_ctx) at an attaching environment.

    ext_ctx must extend base_ctx; attach_env is an environment of base_ctx
    in a.  Returns the new model, the inclusion of a, and the environment
    of ext_ctx in the result given by the glued generators.
    """
    assert ext_ctx.sorts[:len(base_ctx)] == base_ctx.sorts
    gens = []
    # nodes for the attaching environment
    def env_node(i):
        key = a.sort_key(base_ctx.sorts[i], attach_env[:i])
        return ("b", base_ctx.sorts[i].head, key, attach_env[i])

    glued = [env_node(i) for i in range(len(base_ctx))]
    for j in range(len(base_ctx), len(ext_ctx)):
        s = ext_ctx.sorts[j]
        env_nodes = []
        for t in s.args:
            from .gat.syntax import Var
            assert isinstance(t, Var) or not t.args, \
                "display generator sorts must have variable or constant indices"
            if isinstance(t, Var):
                env_nodes.append(glued[t.index])
            else:
                raise PushoutDiverged("nonvariable sort index in generator")
        gens.append((s.head, tuple(env_nodes)))
        glued.append(("g", len(gens) - 1))
    model, info = saturate(ct, gens, a, cap)
    incl = base_inclusion(ct, a, model, info["points"])
    out_env = []
    for i, node in enumerate(glued):
        if node[0] == "b":
            out_env.append(info["points"][(node[1], node[2], node[3])])
        else:
            out_env.append(info["generators"][node[1]])
    # normalize to the final class representatives
    return model, incl, tuple(out_env)
