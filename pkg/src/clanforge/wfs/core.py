"""Lifting problems, cofibrant generation, and the staged factorization.

The engine is generic over a backend exposing hom-set enumeration and
pushouts along generator arrows.  A factorization run proceeds in fat
stages: every outstanding lifting problem against the generators (one
without a diagonal) is filled by simultaneous attachment, in deterministic
order, until the right part acquires the right lifting property or the
stage cap is reached.  Traces replay bit-exactly.

Extension certificates follow the retract reading: factor f = r . l, then
a single lift of f against r exhibits f as a retract of the cellular left
part.  Verdicts are {yes, unknown}; there is no refutation procedure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional


class SearchSpaceInfinite(RuntimeError):
    pass


class BackendError(RuntimeError):
    pass


@dataclass
class Generator:
    """An arrow dom -> cod used as a left-class generator."""

    name: str
    dom: object
    cod: object
    arrow: object


@dataclass
class PushoutResult:
    obj: object
    incl: object          # X -> P
    coproj: object        # cod(gen) -> P
    factor: Callable      # (q1: X -> Z, q2: cod -> Z) -> P -> Z


class Backend:
    """Abstract interface the lifting engine runs against."""

    def homs(self, x, y) -> list:
        raise NotImplementedError

    def compose(self, g, f):
        raise NotImplementedError

    def identity(self, x):
        raise NotImplementedError

    def source(self, f):
        raise NotImplementedError

    def target(self, f):
        raise NotImplementedError

    def eq_arrows(self, f, g) -> bool:
        return f == g

    def pushout(self, gen: Generator, attach) -> PushoutResult:
        raise NotImplementedError

    # -- generic square machinery (overridable for efficiency) --------------

    def gen_squares(self, gen: Generator, r) -> list[tuple]:
        """All commuting squares (top, bottom) of gen against r."""
        out = []
        rs, rt = self.source(r), self.target(r)
        for top in self.homs(gen.dom, rs):
            left_then_bottom = self.compose(r, top)
            for bottom in self.homs(gen.cod, rt):
                if self.eq_arrows(self.compose(bottom, gen.arrow),
                                  left_then_bottom):
                    out.append((top, bottom))
        return out

    def gen_lift(self, gen: Generator, r, square) -> Optional[object]:
        top, bottom = square
        for d in self.homs(gen.cod, self.source(r)):
            if self.eq_arrows(self.compose(d, gen.arrow), top) and \
               self.eq_arrows(self.compose(r, d), bottom):
                return d
        return None

    def transport_top(self, incl, top):
        """Move an attaching map along an inclusion (default: composition)."""
        return self.compose(incl, top)


# ---------------------------------------------------------------------------
# Lifting


@dataclass
class LiftingProblem:
    backend: Backend
    left: object
    right: object
    top: object
    bottom: object

    def commutes(self) -> bool:
        b = self.backend
        return b.eq_arrows(b.compose(self.right, self.top),
                           b.compose(self.bottom, self.left))


def solve_lift(p: LiftingProblem) -> Optional[object]:
    """A diagonal filler, or None after exhaustive search."""
    if not p.commutes():
        raise BackendError("lifting problem does not commute")
    b = p.backend
    for d in b.homs(b.target(p.left), b.source(p.right)):
        if b.eq_arrows(b.compose(d, p.left), p.top) and \
           b.eq_arrows(b.compose(p.right, d), p.bottom):
            return d
    return None


def has_rlp(backend: Backend, r, gens: list[Generator]) \
        -> tuple[bool, Optional[dict]]:
    """Exhaustive right-lifting-property check against the generators."""
    for gen in gens:
        for square in backend.gen_squares(gen, r):
            if backend.gen_lift(gen, r, square) is None:
                return False, {"generator": gen.name, "square": square}
    return True, None


# ---------------------------------------------------------------------------
# Staged factorization


@dataclass
class Attachment:
    stage: int
    generator: str
    top: object            # attaching arrow dom(gen) -> stage-start object
    bottom: object         # the square's bottom arrow cod(gen) -> target


@dataclass
class CellComplex:
    base: object
    attachments: list[Attachment]
    composite: object      # the arrow base -> top object
    top_obj: object


@dataclass
class Factorization:
    f: object
    left: CellComplex
    right: object
    stages: int

    def verify(self, backend: Backend, gens: list[Generator]) -> dict:
        ok_comp = backend.eq_arrows(
            backend.compose(self.right, self.left.composite), self.f)
        rlp, wit = has_rlp(backend, self.right, gens)
        return {"composite_equals_f": ok_comp, "right_has_rlp": rlp,
                "rlp_witness": None if wit is None else wit["generator"]}


@dataclass
class Partial:
    stages: int
    pending: list[dict]
    left_so_far: CellComplex
    right_so_far: object


def soa_factorize(backend: Backend, f, gens: list[Generator],
                  stage_cap: int = 6):
    """Factor f as (cellular left part) . (right part with the RLP).

    Each stage fills all outstanding squares at once; the result is either
    a verified Factorization or Partial at the cap.  Deterministic given
    the backend's hom order.
    """
    gen_by_name = {g.name: g for g in gens}
    m = backend.source(f)
    r = f
    incl_composite = backend.identity(m)
    attachments: list[Attachment] = []
    for stage in range(stage_cap + 1):
        outstanding = []
        for gen in gens:
            for square in backend.gen_squares(gen, r):
                if backend.gen_lift(gen, r, square) is None:
                    outstanding.append((gen, square))
        if not outstanding:
            cc = CellComplex(backend.source(f), attachments, incl_composite, m)
            return Factorization(f, cc, r, stage)
        if stage == stage_cap:
            cc = CellComplex(backend.source(f), attachments, incl_composite, m)
            return Partial(stage, [{"generator": g.name} for g, _ in outstanding],
                           cc, r)
        # fat stage: attach every outstanding cell, transporting attaching
        # maps through the inclusions added earlier in the same stage
        stage_incl = backend.identity(m)
        try:
            for gen, (top, bottom) in outstanding:
                top_now = backend.transport_top(stage_incl, top)
                po = backend.pushout(gen, top_now)
                m = po.obj
                r = po.factor(r, bottom)
                stage_incl = backend.compose(po.incl, stage_incl)
                attachments.append(Attachment(stage + 1, gen.name, top, bottom))
        except Exception as e:  # divergent pushout: report partial progress
            from ..presentation import PushoutDiverged
            if not isinstance(e, (PushoutDiverged, SearchSpaceInfinite)):
                raise
            cc = CellComplex(backend.source(f), attachments, incl_composite, m)
            return Partial(stage, [{"diverged": str(e)}], cc, r)
        incl_composite = backend.compose(stage_incl, incl_composite)
    raise AssertionError("unreachable")


def replay_factorization(backend: Backend, fact: Factorization,
                         gens: list[Generator], f) -> bool:
    """Re-run the attachment trace and confirm the same factorization."""
    gen_by_name = {g.name: g for g in gens}
    m = backend.source(f)
    r = f
    incl_composite = backend.identity(m)
    by_stage: dict[int, list[Attachment]] = {}
    for att in fact.left.attachments:
        by_stage.setdefault(att.stage, []).append(att)
    for stage in sorted(by_stage):
        stage_incl = backend.identity(m)
        for att in by_stage[stage]:
            gen = gen_by_name[att.generator]
            top_now = backend.transport_top(stage_incl, att.top)
            po = backend.pushout(gen, top_now)
            m = po.obj
            r = po.factor(r, att.bottom)
            stage_incl = backend.compose(po.incl, stage_incl)
        incl_composite = backend.compose(stage_incl, incl_composite)
    if not backend.eq_arrows(backend.compose(r, incl_composite), f):
        return False
    return backend.eq_arrows(incl_composite, fact.left.composite) and \
        backend.eq_arrows(r, fact.right)


@dataclass
class RetractWitness:
    factorization: Factorization
    section: object      # target(f) -> top of the cell complex

    def replay(self, backend: Backend, f) -> bool:
        l = self.factorization.left.composite
        r = self.factorization.right
        d = self.section
        return backend.eq_arrows(backend.compose(d, f), l) and \
            backend.eq_arrows(backend.compose(r, d),
                              backend.identity(backend.target(f)))


def is_extension_bounded(backend: Backend, f, gens: list[Generator],
                         stage_cap: int = 6):
    """{yes(RetractWitness), unknown}; never a false no."""
    fact = soa_factorize(backend, f, gens, stage_cap)
    if isinstance(fact, Partial):
        return "unknown", None
    problem = LiftingProblem(backend, f, fact.right,
                             fact.left.composite,
                             backend.identity(backend.target(f)))
    d = solve_lift(problem)
    if d is None:
        return "unknown", None
    return "yes", RetractWitness(fact, d)
