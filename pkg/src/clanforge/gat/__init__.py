from .syntax import (
    App,
    Axiom,
    Context,
    EMPTY_CONTEXT,
    EqBudget,
    EqDecl,
    EqJudgment,
    Judgment,
    OpDecl,
    SortDecl,
    SortEqDecl,
    SortEqJudgment,
    SortExpr,
    SortJudgment,
    Substitution,
    SubstitutionError,
    Term,
    TermJudgment,
    Theory,
    Var,
    compose_subst,
    identity_subst,
    show_context,
    show_sort,
    show_term,
    substitute,
)
from .parser import ParseError, parse_theory
from .rewrite import Distinct, Equal, Step, Unknown, Verdict
from .checker import CheckResult, CheckedTheory, Diagnostic, check_theory, judg_equal

__all__ = [
    "App", "Axiom", "Context", "EMPTY_CONTEXT", "EqBudget", "EqDecl",
    "EqJudgment", "Judgment", "OpDecl", "SortDecl", "SortEqDecl", "SortExpr",
    "SortEqJudgment", "SortJudgment", "Substitution", "SubstitutionError",
    "Term", "TermJudgment", "Theory", "Var", "compose_subst", "identity_subst",
    "show_context", "show_sort", "show_term", "substitute", "ParseError",
    "parse_theory", "Distinct", "Equal", "Step", "Unknown", "Verdict",
    "CheckResult", "CheckedTheory", "Diagnostic", "check_theory", "judg_equal",
]
