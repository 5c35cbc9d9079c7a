"""Normalization operators: negation normal form, flattening, parts.

Flattening rewrites every quantified or counting subconcept so that its
filler is a plain concept name (the nullary Top/Bottom count as atomic and
are left in place), introducing fresh definitional names under the reserved
``__f`` prefix.  The resulting axioms are and/or-combinations of literals
and quantified atoms, which is the shape the domino machinery consumes.
"""

from __future__ import annotations

import re
from typing import Iterable, Union

from .syntax import (
    BOTTOM,
    And,
    AtLeast,
    AtMost,
    Bottom,
    Concept,
    ConceptName,
    Exists,
    ForAll,
    Gci,
    KnowledgeBase,
    Not,
    Or,
    TOP,
    Top,
    concept_of,
    is_quantified,
)

FRESH_CONCEPT_PREFIX = "__f"
FRESH_ROLE_PREFIX = "__r"
SELF_CONCEPT_PREFIX = "__self_"

_ATOMIC_FILLERS = (ConceptName, Top, Bottom)


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------

def nnf(c: Concept) -> Concept:
    """Push negation down to concept names.

    Negated counting restrictions flip between atleast and atmost with the
    bound adjusted by one; the atleast bound is at least 1 by construction,
    so the atmost bound never goes negative.
    """
    if isinstance(c, (Top, Bottom, ConceptName)):
        return c
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, ForAll):
        return ForAll(c.role, nnf(c.filler))
    if isinstance(c, AtLeast):
        return AtLeast(c.bound, c.role, nnf(c.filler))
    if isinstance(c, AtMost):
        return AtMost(c.bound, c.role, nnf(c.filler))
    # negation cases
    inner = c.operand
    if isinstance(inner, Top):
        return BOTTOM
    if isinstance(inner, Bottom):
        return TOP
    if isinstance(inner, ConceptName):
        return c
    if isinstance(inner, Not):
        return nnf(inner.operand)
    if isinstance(inner, And):
        return Or(nnf(Not(inner.left)), nnf(Not(inner.right)))
    if isinstance(inner, Or):
        return And(nnf(Not(inner.left)), nnf(Not(inner.right)))
    if isinstance(inner, Exists):
        return ForAll(inner.role, nnf(Not(inner.filler)))
    if isinstance(inner, ForAll):
        return Exists(inner.role, nnf(Not(inner.filler)))
    if isinstance(inner, AtMost):
        return AtLeast(inner.bound + 1, inner.role, nnf(inner.filler))
    if isinstance(inner, AtLeast):
        return AtMost(inner.bound - 1, inner.role, nnf(inner.filler))
    raise TypeError(f"not a concept: {c!r}")


def nnf_kb(kb: KnowledgeBase) -> KnowledgeBase:
    """NNF every TBox axiom (as a universally valid concept); rest untouched."""
    return kb.with_tbox(Gci(TOP, nnf(concept_of(ax))) for ax in kb.tbox)


# ---------------------------------------------------------------------------
# Parts
# ---------------------------------------------------------------------------

def parts(x: Union[Concept, KnowledgeBase, Iterable[Concept]]) -> list[Concept]:
    """Quantified and atomic parts, in first-occurrence order.

    Negation is transparent, and/or recurse both sides, a quantified
    concept contributes itself and then the parts of its filler, and any
    other leaf contributes itself.  For a knowledge base the union over
    its TBox axioms (in the top-subsumes reading) is returned.
    """
    out: list[Concept] = []
    seen: set[Concept] = set()

    def walk(c: Concept) -> None:
        if isinstance(c, Not):
            walk(c.operand)
        elif isinstance(c, (And, Or)):
            walk(c.left)
            walk(c.right)
        elif is_quantified(c):
            if c not in seen:
                seen.add(c)
                out.append(c)
            walk(c.filler)
        else:
            if c not in seen:
                seen.add(c)
                out.append(c)

    if isinstance(x, KnowledgeBase):
        for ax in x.tbox:
            walk(concept_of(ax))
    elif isinstance(x, (Top, Bottom, ConceptName, Not, And, Or)) or is_quantified(x):
        walk(x)
    else:
        for c in x:
            walk(c)
    return out


# ---------------------------------------------------------------------------
# Fresh names
# ---------------------------------------------------------------------------

class FreshNames:
    """Allocator for reserved-prefix names, collision-free by construction.

    Counters resume after the largest index already present in the
    knowledge base, so repeated normalization passes over a partially
    processed base never reuse a name.
    """

    def __init__(self, concept_start: int = 0, role_start: int = 0):
        self._concept = concept_start
        self._role = role_start

    @staticmethod
    def for_kb(kb: KnowledgeBase) -> "FreshNames":
        def next_index(names: Iterable[str], prefix: str) -> int:
            pattern = re.compile(re.escape(prefix) + r"(\d+)$")
            indices = [int(m.group(1)) for n in names if (m := pattern.match(n))]
            return max(indices) + 1 if indices else 0

        return FreshNames(
            next_index(kb.signature.concept_names, FRESH_CONCEPT_PREFIX),
            next_index(kb.signature.role_names, FRESH_ROLE_PREFIX),
        )

    def concept(self) -> str:
        name = f"{FRESH_CONCEPT_PREFIX}{self._concept}"
        self._concept += 1
        return name

    def role(self) -> str:
        name = f"{FRESH_ROLE_PREFIX}{self._role}"
        self._role += 1
        return name


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------

def _flatten_concept(c: Concept, sink: list[Concept], fresh: FreshNames) -> Concept:
    """Replace every outermost non-atomic filler by a fresh name.

    Left-to-right within the axiom; the defining axiom for each fresh name
    is appended to the sink and processed later, which realizes the
    outermost-first strategy.
    """
    if isinstance(c, And):
        left = _flatten_concept(c.left, sink, fresh)
        return And(left, _flatten_concept(c.right, sink, fresh))
    if isinstance(c, Or):
        left = _flatten_concept(c.left, sink, fresh)
        return Or(left, _flatten_concept(c.right, sink, fresh))
    if is_quantified(c):
        if isinstance(c.filler, _ATOMIC_FILLERS):
            return c
        name = ConceptName(fresh.concept())
        if isinstance(c, AtMost):
            sink.append(Or(nnf(Not(c.filler)), name))
            return AtMost(c.bound, c.role, name)
        sink.append(Or(Not(name), c.filler))
        if isinstance(c, Exists):
            return Exists(c.role, name)
        if isinstance(c, ForAll):
            return ForAll(c.role, name)
        return AtLeast(c.bound, c.role, name)
    return c


def flatten(kb: KnowledgeBase) -> KnowledgeBase:
    """NNF the TBox, then give every quantified subconcept an atomic filler."""
    fresh = FreshNames.for_kb(kb)
    work: list[Concept] = []
    for ax in kb.tbox:
        c = nnf(concept_of(ax))
        if c not in work:
            work.append(c)
    i = 0
    while i < len(work):
        work[i] = _flatten_concept(work[i], work, fresh)
        i += 1
    return kb.with_tbox(Gci(TOP, c) for c in work)


def is_flat_concept(c: Concept) -> bool:
    """No quantifier or counting node has a composite filler."""
    if isinstance(c, (Top, Bottom, ConceptName)):
        return True
    if isinstance(c, Not):
        return isinstance(c.operand, ConceptName)
    if isinstance(c, (And, Or)):
        return is_flat_concept(c.left) and is_flat_concept(c.right)
    if is_quantified(c):
        return isinstance(c.filler, _ATOMIC_FILLERS)
    raise TypeError(f"not a concept: {c!r}")


def is_flat_kb(kb: KnowledgeBase) -> bool:
    return all(is_flat_concept(concept_of(ax)) for ax in kb.tbox)
