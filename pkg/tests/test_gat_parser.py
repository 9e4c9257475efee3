import pytest

from clanforge import load_corpus
from clanforge.gat import ParseError, parse_theory


def test_cat_counts():
    th = parse_theory(load_corpus("cat.gat"))
    assert th.name == "cat"
    assert th.counts() == {"sorts": 2, "ops": 2, "eqs": 3, "sort_eqs": 0}


def test_graded_rings_counts():
    th = parse_theory(load_corpus("graded_rings.gat"))
    assert th.counts() == {"sorts": 2, "ops": 7, "eqs": 9, "sort_eqs": 0}


def test_empty_source():
    th = parse_theory("")
    assert th.axioms == ()


def test_comments_and_whitespace():
    th = parse_theory("# nothing\n  theory   t  # trailing\n\nsort X( )\n")
    assert th.name == "t"
    assert len(th.axioms) == 1


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse_theory("theory t\nsort X()\nop f(x: X) A(x)\n")
    assert e.value.line == 3


def test_duplicate_identifier_rejected():
    with pytest.raises(ParseError) as e:
        parse_theory("theory t\nsort X()\nsort X()\n")
    assert "duplicate" in e.value.message


def test_duplicate_telescope_variable_rejected():
    with pytest.raises(ParseError):
        parse_theory("theory t\nsort X()\nop f(x: X, x: X) : X\n")


def test_chained_equation_is_one_axiom():
    th = parse_theory(
        "theory t\nsort X()\nop u() : X\nop m(a: X, b: X) : X\n"
        "eq law(a: X) : m(u, a) = a = m(a, u)\n")
    assert th.counts()["eqs"] == 1
    assert len(th.axioms[-1].sides) == 3


def test_sorteq_line():
    th = parse_theory("theory t\nsort X()\nsort Y()\nsorteq xy() : X = Y\n")
    assert th.counts()["sort_eqs"] == 1
