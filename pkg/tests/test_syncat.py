import pytest

from clanforge import load_corpus
from clanforge.gat import (
    App,
    Context,
    EqBudget,
    SortExpr,
    Var,
    check_theory,
    parse_theory,
)
from clanforge.syncat import SynCat, SynCatBounds

BUDGET = EqBudget(200, 6)
O = SortExpr("O")


def A(x, y):
    return SortExpr("A", (x, y))


@pytest.fixture(scope="module")
def cat():
    return check_theory(parse_theory(load_corpus("cat.gat")), BUDGET).checked


@pytest.fixture(scope="module")
def sc_obj(cat):
    return SynCat(cat, SynCatBounds(2, 0, BUDGET, sort_filter=frozenset({"O"})))


@pytest.fixture(scope="module")
def sc31(cat):
    return SynCat(cat, SynCatBounds(3, 1, BUDGET))


def test_objects_include_small_contexts(sc_obj):
    lens = sorted(len(c) for c in sc_obj.contexts)
    assert lens == [0, 1, 2]


def test_hom_two_objects_to_one(sc_obj):
    i2 = next(i for i, c in enumerate(sc_obj.contexts) if len(c) == 2)
    i1 = next(i for i, c in enumerate(sc_obj.contexts) if len(c) == 1)
    assert len(sc_obj.hom(i2, i1)) == 2


def test_empty_theory_syncat():
    ct = check_theory(parse_theory("theory empty\n")).checked
    sc = SynCat(ct, SynCatBounds(2, 1, BUDGET))
    assert len(sc.contexts) == 1
    assert len(sc.arrows) == 1
    assert sc.ids == [0]
    assert set(sc.displays) == {0}


def test_edge_to_edge_hom_matches_graph_functors(cat, sc31):
    edge = Context(("u", "v", "h"), (O, O, A(Var(0), Var(1))))
    i = sc31.find_context(edge)
    assert i is not None
    # vertex maps with edge-to-path assignments into the free category on
    # one edge: (u,u)->id, (u,v)->h, (v,v)->id
    assert len(sc31.hom(i, i)) == 3


def test_displays_decompose_and_include_identities(sc31):
    for u, w in sc31.displays.items():
        i, j, _ = sc31.arrows[u]
        assert sc31.comp.get((w.projection, w.iso)) == u
    for i, ident in enumerate(sc31.ids):
        assert ident in sc31.displays


def test_projections_are_displays(cat, sc31):
    edge = Context(("u", "v", "h"), (O, O, A(Var(0), Var(1))))
    two = Context(("x", "y"), (O, O))
    i, j = sc31.find_context(edge), sc31.find_context(two)
    from clanforge.gat import Substitution
    proj = Substitution(edge, two, (Var(0), Var(1)))
    ix = sc31._class_of(i, j, proj)
    assert ix is not None and ix in sc31.displays


def test_bounded_clan_check_reports_skips_not_violations(sc_obj):
    rep = sc_obj.check_clan_bounded()
    assert rep["ok"], rep["violations"]
    assert rep["skipped_pullbacks"] >= 0


def test_unknowns_never_merge(sc31):
    # the cat rewrite system is complete, so no unknown flags at all here
    assert sc31.unknown_flags == []


def test_json_dump_has_witnesses(sc31):
    data = sc31.to_json()
    assert len(data["objects"]) == len(sc31.contexts)
    assert all("substitution" in a for a in data["arrows"])
    assert data["displays"]


def test_identity_extension_adds_display(cat):
    # under the object-identity extension the diagonal (x:O) -> (x y:O)
    # becomes a display map via the isomorphism to an extension
    cto = check_theory(parse_theory(load_corpus("cat_o.gat")), BUDGET).checked
    sc = SynCat(cto, SynCatBounds(3, 1, BUDGET,
                                  sort_filter=frozenset({"O", "EO"})))
    one = sc.find_context(Context(("x",), (O,)))
    two = sc.find_context(Context(("x", "y"), (O, O)))
    from clanforge.gat import Substitution
    diag = Substitution(sc.contexts[one], sc.contexts[two], (Var(0), Var(0)))
    ix = sc._class_of(one, two, diag)
    assert ix is not None
    assert ix in sc.displays

    # whereas in plain cat the diagonal is not a display
    sc_plain = SynCat(cat, SynCatBounds(3, 1, BUDGET,
                                        sort_filter=frozenset({"O"})))
    one_p = sc_plain.find_context(Context(("x",), (O,)))
    two_p = sc_plain.find_context(Context(("x", "y"), (O, O)))
    diag_p = Substitution(sc_plain.contexts[one_p], sc_plain.contexts[two_p],
                          (Var(0), Var(0)))
    ix_p = sc_plain._class_of(one_p, two_p, diag_p)
    assert ix_p is not None
    assert ix_p not in sc_plain.displays
