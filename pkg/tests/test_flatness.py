import pytest

from clanforge import load_corpus
from clanforge.flatness import (
    FlatUnknown,
    FlatWitness,
    HomModelOverflow,
    NoConeUpTo,
    hom_model,
    is_flat,
    universal_env,
)
from clanforge.gat import (
    App,
    Context,
    EqBudget,
    SortExpr,
    Substitution,
    Var,
    check_theory,
    parse_theory,
)
from clanforge.models import TheoryModel, check_model, hom_set

BUDGET = EqBudget(200, 8)
O = SortExpr("O")


def A(x, y):
    return SortExpr("A", (x, y))


@pytest.fixture(scope="module")
def cat():
    return check_theory(parse_theory(load_corpus("cat.gat")), BUDGET).checked


@pytest.fixture(scope="module")
def z2(cat):
    return TheoryModel(
        cat, {"O": {(): (0,)}, "A": {(0, 0): (0, 1)}},
        {"id": {(0,): 0},
         "comp": {(0, 0, 0, f, g): f ^ g for f in (0, 1) for g in (0, 1)}})


def test_hom_model_point_is_terminal(cat):
    h = hom_model(cat, Context(("x",), (O,)))
    assert h.total_size() == {"O": 1, "A": 1}
    assert check_model(cat, h).ok


def test_hom_model_edge_is_free_on_one_edge(cat):
    edge = Context(("u", "v", "h"), (O, O, A(Var(0), Var(1))))
    h = hom_model(cat, edge)
    assert h.total_size() == {"O": 2, "A": 3}
    assert check_model(cat, h).ok
    # empty fiber between the two vertices in the wrong direction
    assert any(len(f) == 0 for f in h.carriers["A"].values())


def test_hom_model_loop_overflows(cat):
    loop = Context(("x", "f"), (O, A(Var(0), Var(0))))
    with pytest.raises(HomModelOverflow):
        hom_model(cat, loop, cap=16)


def test_yoneda_counts_and_naturality(cat, z2):
    # |hom(H(G), A)| = |A(G)| with the canonical evaluation bijection
    ctxs = [Context(), Context(("x",), (O,)),
            Context(("x", "y"), (O, O)),
            Context(("u", "v", "h"), (O, O, A(Var(0), Var(1))))]
    for ctx in ctxs:
        h = hom_model(cat, ctx)
        homs = hom_set(h, z2)
        envs = z2.envs(ctx)
        assert len(homs) == len(envs)
        images = sorted(repr(m.map_env(ctx, universal_env(ctx))) for m in homs)
        assert images == sorted(repr(e) for e in envs)
    # naturality in the context: restricting along a substitution commutes
    ctx2 = ctxs[2]
    ctx1 = ctxs[1]
    sub = Substitution(ctx1, ctx2, (Var(0), Var(0)))
    h2 = hom_model(cat, ctx2)
    for m in hom_set(h2, z2):
        env2 = m.map_env(ctx2, universal_env(ctx2))
        restricted = tuple(z2.eval_term(t, env2) for t in sub.terms)
        direct = tuple(z2.eval_term(t, env2) for t in sub.terms)
        assert restricted == direct


def test_terminal_model_flat_witness(cat):
    tm = TheoryModel(cat, {"O": {(): (0,)}, "A": {(0, 0): (0,)}},
                     {"id": {(0,): 0}, "comp": {(0, 0, 0, 0, 0): 0}})
    v = is_flat(cat, tm, 1, BUDGET)
    assert isinstance(v, FlatWitness)
    assert len(v.context) == 1


def test_edge_model_flat_witness(cat):
    edge = Context(("u", "v", "h"), (O, O, A(Var(0), Var(1))))
    h = hom_model(cat, edge)
    v = is_flat(cat, h, 3, BUDGET)
    assert isinstance(v, FlatWitness)


def test_z2_not_flat_up_to_bound(cat, z2):
    v = is_flat(cat, z2, 2, BUDGET, term_depth=2)
    assert isinstance(v, NoConeUpTo)
    assert v.diagram["kind"] == "parallel-pair"
