"""Compile a terminology into a decision diagram over domino variables.

The variable set pairs every relevant concept with a side marker (1 for
the left element of a domino, 2 for the right) and adds one variable per
atomic role.  A satisfying variable set of the compiled function is
exactly a packed domino of the canonical set, which is what the explicit
engine computes by enumeration; the two paths are tested against each
other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .dominoes import DominoSet, DominoUniverse
from .errors import CapacityError
from .normalize import flatten, parts
from .obdd import DiagramManager, Func
from .syntax import (
    And,
    AtomicRole,
    Bottom,
    Concept,
    ConceptName,
    Exists,
    ForAll,
    KnowledgeBase,
    Not,
    Or,
    RoleAnd,
    RoleExpr,
    RoleNot,
    RoleOr,
    Top,
    concept_of,
    invert,
    is_quantified,
    render_concept,
    render_role,
)

DEFAULT_EXTRACTION_CAP = 1 << 20


@dataclass(frozen=True)
class RoleVar:
    role: AtomicRole


@dataclass(frozen=True)
class ConceptVar:
    concept: Concept
    side: int

    def __post_init__(self) -> None:
        if self.side not in (1, 2):
            raise ValueError("side must be 1 or 2")


DominoVar = Union[RoleVar, ConceptVar]


def render_var(var: DominoVar) -> str:
    if isinstance(var, RoleVar):
        return render_role(var.role)
    return f"<{render_concept(var.concept)}, {var.side}>"


def default_var_order(universe: DominoUniverse) -> tuple[DominoVar, ...]:
    """Role variables first, then side-1 concepts, then side-2."""
    return (
        tuple(RoleVar(r) for r in universe.roles)
        + tuple(ConceptVar(c, 1) for c in universe.concepts)
        + tuple(ConceptVar(c, 2) for c in universe.concepts)
    )


@dataclass(frozen=True)
class CompiledTBox:
    """The fixpoint function together with everything needed to read it."""

    manager: DiagramManager
    root: Func
    var_order: tuple[DominoVar, ...]
    universe: DominoUniverse
    flat_kb: KnowledgeBase
    iterates: tuple[Func, ...]

    @property
    def iteration_count(self) -> int:
        return max(len(self.iterates) - 1, 0)

    def var_label(self, index: int) -> str:
        return render_var(self.var_order[index])

    def to_dot(self) -> str:
        return self.root.to_dot(self.var_label)


class _Encoder:
    def __init__(self, manager: DiagramManager, var_order: Sequence[DominoVar]):
        self.manager = manager
        self.index: dict[DominoVar, int] = {v: i for i, v in enumerate(var_order)}
        if len(self.index) != len(var_order):
            raise ValueError("duplicate variables in order")

    def var(self, v: DominoVar) -> Func:
        return self.manager.variable(self.index[v])

    def concept_side(self, concept: Concept, side: int) -> Func:
        """Characteristic function of one relevant concept on one side."""
        if isinstance(concept, Top):
            return self.manager.true
        if isinstance(concept, Bottom):
            return self.manager.false
        return self.var(ConceptVar(concept, side))

    def concept(self, c: Concept) -> Func:
        """Boolean translation of a flat concept, side-1 atoms."""
        key = ConceptVar(c, 1)
        if key in self.index:
            return self.var(key)
        if isinstance(c, Top):
            return self.manager.true
        if isinstance(c, Bottom):
            return self.manager.false
        if isinstance(c, Not):
            return ~self.concept(c.operand)
        if isinstance(c, And):
            return self.concept(c.left) & self.concept(c.right)
        if isinstance(c, Or):
            return self.concept(c.left) | self.concept(c.right)
        raise ValueError(f"concept is not in the compiled vocabulary: {render_concept(c)}")

    def role(self, u: RoleExpr) -> Func:
        if isinstance(u, AtomicRole):
            return self.var(RoleVar(u))
        if isinstance(u, RoleNot):
            return ~self.role(u.operand)
        if isinstance(u, RoleAnd):
            return self.role(u.left) & self.role(u.right)
        if isinstance(u, RoleOr):
            return self.role(u.left) | self.role(u.right)
        raise TypeError(f"not a role expression: {u!r}")


def encode_concept(ct: CompiledTBox, c: Concept) -> Func:
    """Boolean translation of a concept over the compiled variable set."""
    return _Encoder(ct.manager, ct.var_order).concept(c)


def encode_role(ct: CompiledTBox, u: RoleExpr) -> Func:
    return _Encoder(ct.manager, ct.var_order).role(u)


def _build_initial(enc: _Encoder, flat: KnowledgeBase, relevant: Sequence[Concept]) -> Func:
    """Seed function: axioms on side 1, witnesses recorded, universals pushed."""
    m = enc.manager
    kb_part = m.true
    for ax in flat.tbox:
        kb_part &= enc.concept(concept_of(ax))
    uni_part = m.true
    ex_part = m.true
    for concept in relevant:
        if isinstance(concept, ForAll):
            uni_part &= (enc.concept_side(concept, 1) & enc.role(concept.role)).implies(
                enc.concept_side(concept.filler, 2))
        elif isinstance(concept, Exists):
            ex_part &= (enc.concept_side(concept.filler, 2) & enc.role(concept.role)).implies(
                enc.concept_side(concept, 1))
    return kb_part & uni_part & ex_part


def build_initial(ct: CompiledTBox) -> Func:
    """Recompute the seed function of a compiled terminology (for tests)."""
    enc = _Encoder(ct.manager, ct.var_order)
    return _build_initial(enc, ct.flat_kb, ct.universe.concepts)


def fixpoint_compile(
    kb: KnowledgeBase,
    *,
    manager: DiagramManager | None = None,
    var_order: Sequence[DominoVar] | None = None,
    max_iterations: int | None = None,
) -> CompiledTBox:
    """Run the deletion fixpoint on the Boolean representation.

    Each round conjoins three restrictions onto the previous function:
    existential claims must have a remaining witness (role and right-side
    variables projected away), missing universal claims must have a
    remaining counterexample, and the side-swapped role-inverted mirror
    must remain.  Iteration stops when the function is unchanged, which
    canonicity turns into a handle comparison.
    """
    flat = flatten(kb)
    universe = DominoUniverse.for_flat_kb(flat)
    order = tuple(var_order) if var_order is not None else default_var_order(universe)
    _check_order(order, universe)
    m = manager if manager is not None else DiagramManager(len(order))
    if m.num_vars != len(order):
        raise ValueError("manager was created for a different variable count")
    enc = _Encoder(m, order)

    relevant = universe.concepts
    tau = _build_initial(enc, flat, relevant)
    iterates = [tau]

    projected = [enc.index[v] for v in order
                 if isinstance(v, RoleVar) or v.side == 2]
    swap: dict[int, int] = {}
    for v in order:
        if isinstance(v, RoleVar):
            swap[enc.index[v]] = enc.index[RoleVar(invert(v.role))]
        else:
            swap[enc.index[v]] = enc.index[ConceptVar(v.concept, 3 - v.side)]

    existentials = [c for c in relevant if isinstance(c, Exists)]
    universals = [c for c in relevant if isinstance(c, ForAll)]
    for c in relevant:
        if is_quantified(c) and not isinstance(c, (Exists, ForAll)):
            raise ValueError("counting restriction reached the compiler; reduce first")

    cap = max_iterations if max_iterations is not None else 1 << min(len(order), 40)
    rounds = 0
    while True:
        if rounds > cap:
            raise RuntimeError("fixpoint failed to converge within the iteration bound")
        rounds += 1
        prev = tau
        drop_ex = m.true
        for concept in existentials:
            witness = m.quantify(
                "exists", projected,
                prev & enc.role(concept.role) & enc.concept_side(concept.filler, 2))
            drop_ex &= enc.concept_side(concept, 1).implies(witness)
        drop_uni = m.true
        for concept in universals:
            counterexample = m.quantify(
                "exists", projected,
                prev & enc.role(concept.role) & ~enc.concept_side(concept.filler, 2))
            drop_uni &= (~enc.concept_side(concept, 1)).implies(counterexample)
        mirrored = m.rename(swap, prev)
        tau = prev & drop_ex & drop_uni & mirrored
        if tau == prev:
            break
        iterates.append(tau)

    return CompiledTBox(m, tau, order, universe, flat, tuple(iterates))


def _check_order(order: Sequence[DominoVar], universe: DominoUniverse) -> None:
    expected = set(default_var_order(universe))
    given = set(order)
    if given != expected or len(given) != len(order):
        missing = expected - given
        extra = given - expected
        detail = []
        if missing:
            detail.append(f"missing {render_var(next(iter(missing)))}")
        if extra:
            detail.append(f"unexpected {render_var(next(iter(extra)))}")
        raise ValueError("variable order is not a permutation of the domino variables: "
                         + ", ".join(detail))


def extract_domino_set(ct: CompiledTBox, *, cap: int = DEFAULT_EXTRACTION_CAP) -> DominoSet:
    """Decode every satisfying variable set of the fixpoint into a domino."""
    count = ct.root.count_satisfying()
    if count > cap:
        raise CapacityError(f"{count} dominoes exceed the extraction cap {cap}")
    universe = ct.universe
    shift_a = universe.n_roles + universe.n_concepts
    codes = []
    for assignment in ct.root.satisfying_sets():
        a = r = b = 0
        for index in assignment:
            var = ct.var_order[index]
            if isinstance(var, RoleVar):
                r |= 1 << universe.role_index[var.role]
            elif var.side == 1:
                a |= 1 << universe.concept_index[var.concept]
            else:
                b |= 1 << universe.concept_index[var.concept]
        codes.append((a << shift_a) | (r << universe.n_concepts) | b)
    return DominoSet(universe, codes)


def compile_domino_set(
    ds: DominoSet,
    flat_kb: KnowledgeBase,
    *,
    var_order: Sequence[DominoVar] | None = None,
) -> CompiledTBox:
    """Encode an explicitly computed domino set as a decision diagram.

    This is the alternative engine behind the reasoning facade: the
    deletion fixpoint runs on explicit sets and only the result is turned
    into a diagram (one cube per domino) for the Datalog translation.
    """
    universe = ds.universe
    order = tuple(var_order) if var_order is not None else default_var_order(universe)
    _check_order(order, universe)
    m = DiagramManager(len(order))
    enc = _Encoder(m, order)

    position: list[tuple[int, int]] = []  # (bit position in packed code, var index)
    for var, index in enc.index.items():
        if isinstance(var, RoleVar):
            bit = universe.n_concepts + universe.role_index[var.role]
        elif var.side == 1:
            bit = universe.n_concepts + universe.n_roles + universe.concept_index[var.concept]
        else:
            bit = universe.concept_index[var.concept]
        position.append((bit, index))

    root = m.false
    for code in ds.codes:
        cube = m.true
        for bit, index in sorted(position, key=lambda p: -p[1]):
            chi = m.variable(index)
            cube = (chi & cube) if (code >> bit & 1) else (~chi & cube)
        root |= cube
    return CompiledTBox(m, root, order, universe, flat_kb, (root,))
