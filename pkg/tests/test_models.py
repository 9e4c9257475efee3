import pytest

from clanforge import load_corpus
from clanforge.gat import EqBudget, check_theory, parse_theory
from clanforge.models import (
    EquivRelation,
    FullnessViolated,
    TheoryModel,
    canonical_form,
    check_model,
    enumerate_models,
    enumerate_models_upto,
    hom_set,
    identity_morphism,
    is_full,
    is_surjective,
    kernel_pair,
    models_isomorphic,
    pullback_model,
    quotient,
    terminal_model,
)


@pytest.fixture(scope="module")
def cat():
    return check_theory(parse_theory(load_corpus("cat.gat")), EqBudget()).checked


@pytest.fixture(scope="module")
def z2(cat):
    carriers = {"O": {(): (0,)}, "A": {(0, 0): (0, 1)}}
    ops = {"id": {(0,): 0},
           "comp": {(0, 0, 0, f, g): f ^ g for f in (0, 1) for g in (0, 1)}}
    return TheoryModel(cat, carriers, ops)


def interval_model(cat):
    """The interval category as a model: two objects, one non-identity arrow."""
    carriers = {"O": {(): (0, 1)},
                "A": {(0, 0): ("i0",), (0, 1): ("u",), (1, 0): (), (1, 1): ("i1",)}}
    comp = {}
    arrows = {(0, 0): ["i0"], (0, 1): ["u"], (1, 1): ["i1"], (1, 0): []}
    def compose(f, g):  # f: x->y, g: y->z
        return g if f in ("i0", "i1") else (f if g in ("i0", "i1") else None)
    for x in (0, 1):
        for y in (0, 1):
            for z in (0, 1):
                for f in arrows[(x, y)]:
                    for g in arrows[(y, z)]:
                        comp[(x, y, z, f, g)] = compose(f, g)
    ops = {"id": {(0,): "i0", (1,): "i1"}, "comp": comp}
    return TheoryModel(cat, carriers, ops)


def test_terminal_model_ok(cat):
    assert check_model(cat, terminal_model(cat)).ok


def test_z2_model_ok(cat, z2):
    assert check_model(cat, z2).ok


def test_flipped_unit_entry_fails(cat, z2):
    ops = {"id": dict(z2.ops["id"]), "comp": dict(z2.ops["comp"])}
    ops["comp"][(0, 0, 0, 0, 1)] = 0  # comp(id, g) must be g
    bad = TheoryModel(cat, z2.carriers, ops)
    rep = check_model(cat, bad)
    assert not rep.ok
    assert any(v.kind == "equation" for v in rep.violations)


def test_enumerate_exact_sizes(cat):
    assert len(enumerate_models(cat, {"O": 1, "A": 2})) == 2
    assert len(enumerate_models(cat, {"O": 1, "A": 1})) == 1


def test_enumerate_zero_bound_with_constant_sort():
    src = "theory pointed\nsort X()\nop pt() : X\n"
    ct = check_theory(parse_theory(src)).checked
    assert enumerate_models(ct, {"X": 0}) == []


def test_enumeration_deduplicates_up_to_iso(cat):
    ms = enumerate_models(cat, {"O": 1, "A": 2}, dedup=False)
    assert len(ms) >= 2
    keys = {canonical_form(m) for m in ms}
    assert len(keys) == 2


def test_hom_to_terminal_is_singleton(cat, z2):
    assert len(hom_set(z2, terminal_model(cat))) == 1


def test_hom_z2_to_trivial(cat, z2):
    triv = enumerate_models(cat, {"O": 1, "A": 1})[0]
    assert len(hom_set(z2, triv)) == 1


def test_identity_is_full(cat, z2):
    ok, _ = is_full(identity_morphism(z2))
    assert ok


def test_collapse_interval_not_full_witnessed(cat):
    iv = interval_model(cat)
    tm = terminal_model(cat)
    f = hom_set(iv, tm)[0]
    ok, wit = is_full(f)
    # the interval has an empty hom-set (1,0), so interval -> 1 is not full
    assert not ok and wit["env"] == (1, 0)
    # the inclusion of the discrete two-object model into the interval
    # is not full either: the fiber over (0,1) is missed
    disc = TheoryModel(cat, {"O": {(): (0, 1)},
                             "A": {(0, 0): ("i0",), (0, 1): (), (1, 0): (),
                                   (1, 1): ("i1",)}},
                       {"id": {(0,): "i0", (1,): "i1"},
                        "comp": {(0, 0, 0, "i0", "i0"): "i0",
                                 (1, 1, 1, "i1", "i1"): "i1"}})
    assert check_model(cat, disc).ok
    gs = [g for g in hom_set(disc, iv)
          if g.maps["O"][()] == {0: 0, 1: 1}]
    assert len(gs) == 1
    ok2, wit2 = is_full(gs[0])
    assert not ok2
    assert wit2["display"] == "A" and wit2["target_env"] == (0, 1)


def test_kernel_pair_of_identity_is_diagonal(cat, z2):
    r = kernel_pair(identity_morphism(z2))
    assert r.is_equivalence()
    pairs = r.pairs()["A"]
    assert all(x == y for (x, y) in pairs)


def test_kernel_pair_of_collapse_is_codiscrete(cat, z2):
    f = hom_set(z2, terminal_model(cat))[0]
    r = kernel_pair(f)
    assert r.is_equivalence()
    assert len(r.pairs()["A"]) == 4


def test_quotient_by_diagonal_is_isomorphic(cat, z2):
    r = kernel_pair(identity_morphism(z2))
    b, q = quotient(z2, r)
    assert check_model(cat, b).ok
    assert models_isomorphic(b, z2)


def test_quotient_effectivity(cat, z2):
    f = hom_set(z2, terminal_model(cat))[0]
    r = kernel_pair(f)
    b, q = quotient(z2, r)
    assert check_model(cat, b).ok
    okq, _ = is_full(q)
    assert okq
    assert kernel_pair(q).pairs() == r.pairs()


def test_quotient_requires_full_components(cat):
    # discrete two-object model, R = A x A (codiscrete): projections are not
    # full because the (0,1) fiber of the product is empty while pairs of
    # objects relate; build R as kernel pair of the collapse to terminal
    disc = TheoryModel(cat, {"O": {(): (0, 1)},
                             "A": {(0, 0): ("i0",), (0, 1): (), (1, 0): (),
                                   (1, 1): ("i1",)}},
                       {"id": {(0,): "i0", (1,): "i1"},
                        "comp": {(0, 0, 0, "i0", "i0"): "i0",
                                 (1, 1, 1, "i1", "i1"): "i1"}})
    f = hom_set(disc, terminal_model(cat))[0]
    r = kernel_pair(f)
    with pytest.raises(FullnessViolated):
        quotient(disc, r)


def test_pullback_model_of_fold(cat):
    iv = interval_model(cat)
    tm = terminal_model(cat)
    f = hom_set(iv, tm)[0]
    p, p0, p1 = pullback_model(f, f)
    assert check_model(cat, p).ok
    assert p.size("O") == 4


def test_surjectivity_helper(cat, z2):
    f = hom_set(z2, terminal_model(cat))[0]
    assert is_surjective(f)


def test_models_upto_enumeration_order(cat):
    ms = enumerate_models_upto(cat, {"O": 1, "A": 2})
    sizes = [tuple(m.total_size().values()) for m in ms]
    assert sizes == sorted(sizes, key=lambda v: (sum(v), v))
