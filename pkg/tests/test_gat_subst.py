import random

import pytest

from clanforge import load_corpus
from clanforge.gat import (
    App,
    Context,
    EqBudget,
    SortExpr,
    Substitution,
    SubstitutionError,
    TermJudgment,
    Var,
    check_theory,
    compose_subst,
    identity_subst,
    parse_theory,
    substitute,
)

BUDGET = EqBudget(400, 8)

O = SortExpr("O")


def A(x, y):
    return SortExpr("A", (x, y))


CTX_XY = Context(("x", "y"), (O, O))
CTX_XYF = Context(("x", "y", "f"), (O, O, A(Var(0), Var(1))))


@pytest.fixture(scope="module")
def cat():
    return check_theory(parse_theory(load_corpus("cat.gat")), BUDGET).checked


def test_identity_substitution_fixes_judgments():
    j = TermJudgment(CTX_XYF, Var(2), A(Var(0), Var(1)))
    assert substitute(j, identity_subst(CTX_XYF)) == j


def test_variable_collapse():
    # f : A(x,y) under x,y |-> a,a  becomes  f' : A(a,a)
    ctx_a = Context(("a",), (O,))
    s = Substitution(ctx_a, CTX_XY, (Var(0), Var(0)))
    j = substitute(TermJudgment(CTX_XY, Var(0), O), s)
    assert j.context == ctx_a and j.term == Var(0)
    sort_j = substitute(
        TermJudgment(CTX_XYF, Var(2), A(Var(0), Var(1))),
        Substitution(Context(("a", "h"), (O, A(Var(0), Var(0)))), CTX_XYF,
                     (Var(0), Var(0), Var(1))))
    assert sort_j.sort == A(Var(0), Var(0))


def test_length_mismatch_raises():
    with pytest.raises(SubstitutionError):
        Substitution(CTX_XY, CTX_XYF, (Var(0), Var(1)))


def test_out_of_scope_term_raises():
    with pytest.raises(SubstitutionError):
        Substitution(CTX_XY, CTX_XY, (Var(0), Var(5)))


def test_compose_with_identity_both_sides(cat):
    subs = cat.enumerate_substitutions(CTX_XYF, CTX_XY, 1)
    for s in subs:
        assert compose_subst(s, identity_subst(CTX_XYF)).terms == s.terms
        assert compose_subst(identity_subst(CTX_XY), s).terms == s.terms


def test_renaming_chain():
    ctx_b = Context(("b",), (O,))
    ctx_a = Context(("a",), (O,))
    sigma = Substitution(ctx_a, CTX_XY, (Var(0), Var(0)))
    tau = Substitution(ctx_b, ctx_a, (Var(0),))
    out = compose_subst(sigma, tau)
    assert out.terms == (Var(0), Var(0))
    assert out.source == ctx_b and out.target == CTX_XY


def _context_pool(cat):
    z = Context((), ())
    c1 = Context(("x",), (O,))
    c2 = CTX_XY
    c3 = CTX_XYF
    c4 = Context(("x", "f"), (O, A(Var(0), Var(0))))
    return [z, c1, c2, c3, c4]


def _random_triples(cat, rng, n):
    """(judgment, sigma, tau) with j in sigma.target, composable sigma, tau."""
    pool = _context_pool(cat)
    triples = []
    while len(triples) < n:
        tgt = rng.choice(pool)
        mid = rng.choice(pool)
        src = rng.choice(pool)
        sigmas = cat.enumerate_substitutions(mid, tgt, 1)
        taus = cat.enumerate_substitutions(src, mid, 1)
        if not sigmas or not taus:
            continue
        sigma = rng.choice(sigmas)
        tau = rng.choice(taus)
        terms = cat.enumerate_terms(tgt, SortExpr("O"), 2) + [
            t for s in tgt.sorts if s.head == "A"
            for t in cat.enumerate_terms(tgt, s, 2)]
        if not terms:
            j = TermJudgment(tgt, Var(0), tgt.sorts[0]) if len(tgt) else None
            if j is None:
                continue
        else:
            t = rng.choice(terms)
            j = TermJudgment(tgt, t, cat.infer_sort(tgt, t, BUDGET))
        triples.append((j, sigma, tau))
    return triples


def test_substitution_functoriality_random(cat):
    rng = random.Random(20240811)
    for j, sigma, tau in _random_triples(cat, rng, 100):
        lhs = substitute(substitute(j, sigma), tau)
        rhs = substitute(j, compose_subst(sigma, tau))
        assert lhs == rhs


def test_compose_associativity_random(cat):
    rng = random.Random(987)
    pool = _context_pool(cat)
    done = 0
    while done < 100:
        a, b, c, d = (rng.choice(pool) for _ in range(4))
        s1 = cat.enumerate_substitutions(b, a, 1)
        s2 = cat.enumerate_substitutions(c, b, 1)
        s3 = cat.enumerate_substitutions(d, c, 1)
        if not (s1 and s2 and s3):
            continue
        sig, tau, rho = rng.choice(s1), rng.choice(s2), rng.choice(s3)
        left = compose_subst(compose_subst(sig, tau), rho)
        right = compose_subst(sig, compose_subst(tau, rho))
        assert left.terms == right.terms
        done += 1
