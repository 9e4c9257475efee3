from clanforge import load_corpus
from clanforge.gat import (
    EqBudget,
    Theory,
    check_theory,
    parse_theory,
)

BUDGET = EqBudget(400, 8)


def check_src(src: str, budget=BUDGET):
    return check_theory(parse_theory(src), budget)


def test_corpus_accepted():
    for name in ["cat.gat", "graded_rings.gat", "cat_o.gat", "cat_a.gat",
                 "cat_oa.gat"]:
        res = check_theory(parse_theory(load_corpus(name)), BUDGET)
        assert res.status == "accepted", (name, [str(d) for d in res.diagnostics])


def test_altered_comp_codomain_rejected_with_sort_mismatch():
    src = load_corpus("cat.gat").replace("A(x, z)", "A(x, y)")
    res = check_src(src)
    assert res.status == "rejected"
    assert any("sort mismatch" in d.message for d in res.diagnostics)


def test_unknown_symbol_rejected():
    src = "theory t\nsort X()\nop f(x: Y) : X\n"
    res = check_src(src)
    assert res.status == "rejected"
    assert any("unknown sort" in d.message for d in res.diagnostics)


def test_unknown_op_rejected():
    src = "theory t\nsort X()\nop c() : X\neq bad(x: X) : d(x) = x\n"
    res = check_src(src)
    assert res.status == "rejected"
    assert any("unknown operation" in d.message for d in res.diagnostics)


def test_ill_formed_telescope_rejected():
    # the sort of x mentions a later variable
    from clanforge.gat import App, Context, SortDecl, SortExpr, Var
    ctx = Context(("x", "y"), (SortExpr("P", (Var(1),)), SortExpr("X")))
    th = Theory("t", (SortDecl("X", Context()),
                      SortDecl("P", Context(("a",), (SortExpr("X"),))),
                      SortDecl("Q", ctx)))
    res = check_theory(th, BUDGET)
    assert res.status == "rejected"
    assert any("telescope" in d.message for d in res.diagnostics)


def test_budget_exhaustion_is_unknown_not_rejected():
    # an equation whose side condition needs more rewriting than the budget
    # allows: R(mul(e, u)) vs R(u) with a one-step budget that cannot finish
    src = load_corpus("graded_rings.gat")
    res = check_src(src, EqBudget(2, 2))
    assert res.status == "unknown"
    assert all(d.severity != "error" for d in res.diagnostics)


def test_monotone_prefixes():
    th = parse_theory(load_corpus("cat.gat"))
    for k in range(len(th.axioms) + 1):
        res = check_theory(Theory(th.name, th.axioms[:k]), BUDGET)
        assert res.status == "accepted", k


def test_checked_json_shape():
    res = check_theory(parse_theory(load_corpus("cat.gat")), BUDGET)
    dump = res.checked.to_json()
    assert dump["theory"] == "cat"
    kinds = [a["kind"] for a in dump["axioms"]]
    assert kinds == ["sort", "sort", "op", "op", "eq", "eq", "eq"]
    comp = dump["axioms"][3]
    assert [e["name"] for e in comp["telescope"]] == ["x", "y", "z", "f", "g"]


def test_duplicate_across_kinds_rejected():
    # the parser already rejects duplicate lines; build the Theory directly
    # to exercise the checker's own duplicate detection
    from clanforge.gat import Context, OpDecl, SortDecl, SortExpr
    th = Theory("t", (SortDecl("X", Context()),
                      OpDecl("X", Context(), SortExpr("X"))))
    res = check_theory(th, BUDGET)
    assert res.status == "rejected"
    assert any("duplicate" in d.message for d in res.diagnostics)
