"""Stepwise reduction of full SHIQbs to the counting-free ALCIb core.

Five satisfiability-preserving stages run in a fixed order:

1. transitivity elimination (universal restrictions are propagated one
   step, and DL-safe rules recover transitive ground facts),
2. lower-bound elimination (fresh subroles with pairwise disjointness),
3. role-hierarchy internalization (inclusions become TBox axioms),
4. upper-bound elimination down to functionality axioms,
5. functionality elimination (successor indiscernibility plus an equality
   rule).

Each stage also preserves entailment of positive and negative ground
facts, so the composite feeds the compiler without losing answers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .normalize import SELF_CONCEPT_PREFIX, FreshNames, flatten, nnf, parts
from .syntax import (
    And,
    AtLeast,
    AtMost,
    AtomicRole,
    BOTTOM,
    Concept,
    ConceptAtom,
    ConceptName,
    EqualityAtom,
    Exists,
    ForAll,
    Gci,
    KnowledgeBase,
    Not,
    Or,
    RoleAnd,
    RoleExpr,
    RoleInclusion,
    RoleNot,
    Rule,
    TOP,
    Top,
    Transitivity,
    Var,
    ValidationError,
    classify_roles,
    concept_of,
    invert,
    is_quantified,
    render_axiom,
    render_rule,
    render_role,
    role_atom,
    validate_shiqbs,
)


# ---------------------------------------------------------------------------
# Trace plumbing
# ---------------------------------------------------------------------------

@dataclass
class StageTrace:
    stage: str
    added_axioms: list = field(default_factory=list)
    removed_axioms: list = field(default_factory=list)
    added_rules: list = field(default_factory=list)
    fresh_concepts: list = field(default_factory=list)
    fresh_roles: list = field(default_factory=list)


@dataclass
class ReductionTrace:
    """Per-stage record of everything a transformation touched."""

    stages: list[StageTrace] = field(default_factory=list)

    def stage(self, name: str) -> StageTrace:
        st = StageTrace(name)
        self.stages.append(st)
        return st

    def render(self) -> str:
        lines = []
        for st in self.stages:
            for ax in st.removed_axioms:
                lines.append(f"{st.stage}\tremove\t{render_axiom(ax)}")
            for ax in st.added_axioms:
                lines.append(f"{st.stage}\tadd\t{render_axiom(ax)}")
            for rule in st.added_rules:
                lines.append(f"{st.stage}\tadd\t{render_rule(rule)}")
        return "\n".join(lines) + ("\n" if lines else "")


class _NullStage:
    def __getattr__(self, name):
        return []


def _stage(trace: ReductionTrace | None, name: str):
    return trace.stage(name) if trace is not None else _NullStage()


# ---------------------------------------------------------------------------
# Transitivity elimination
# ---------------------------------------------------------------------------

def cl_closure(kb: KnowledgeBase) -> list[Concept]:
    """Concept expressions relevant for pushing universals over transitive roles.

    Closed under: the normal form of every TBox axiom, subexpressions, the
    normalized complement of upper-bound fillers, and one-step propagation
    of universal restrictions down the role hierarchy onto declared
    transitive roles.
    """
    cls = classify_roles(kb)
    transitive = kb.transitive_role_names()

    def declared_transitive(role: AtomicRole) -> bool:
        return role.name in transitive

    out: list[Concept] = []
    seen: set[Concept] = set()

    def add(c: Concept) -> None:
        if c in seen:
            return
        seen.add(c)
        out.append(c)
        if isinstance(c, Not):
            add(c.operand)
        elif isinstance(c, (And, Or)):
            add(c.left)
            add(c.right)
        elif is_quantified(c):
            add(c.filler)
            if isinstance(c, AtMost):
                add(nnf(Not(c.filler)))

    for ax in kb.tbox:
        add(nnf(concept_of(ax)))

    changed = True
    while changed:
        changed = False
        for c in list(out):
            if not isinstance(c, ForAll) or not isinstance(c.role, AtomicRole):
                continue
            for s in kb.atomic_roles():
                if declared_transitive(s) and cls.subsumed_by(s, c.role):
                    prop = ForAll(s, c.filler)
                    if prop not in seen:
                        add(prop)
                        changed = True
    return out


def _self_concept_name(role: AtomicRole) -> str:
    return f"{SELF_CONCEPT_PREFIX}{role.name}_inv" if role.inverted else \
        f"{SELF_CONCEPT_PREFIX}{role.name}"


def transform_es(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Remove transitivity axioms.

    Universal restrictions found in the closure are re-propagated one role
    step, and every declared-transitive atomic role (in both orientations)
    receives a self-loop detector concept plus DL-safe rules that keep
    transitive ground facts derivable.
    """
    st = _stage(trace, "es")
    transitive = kb.transitive_role_names()
    closure = cl_closure(kb)

    tbox = list(kb.tbox)
    rbox = []
    for ax in kb.rbox:
        if isinstance(ax, Transitivity):
            st.removed_axioms.append(ax)
        else:
            rbox.append(ax)

    # one-step propagation is a consequence of transitivity and nothing
    # else, so only universals over transitive roles receive the axiom;
    # the closure already pushed every inherited universal onto them
    for c in closure:
        if isinstance(c, ForAll) and isinstance(c.role, AtomicRole) \
                and c.role.name in transitive:
            axiom = Gci(TOP, Or(
                Exists(c.role, nnf(Not(c.filler))),
                ForAll(c.role, ForAll(c.role, c.filler)),
            ))
            if axiom not in tbox:
                tbox.append(axiom)
                st.added_axioms.append(axiom)

    rules = list(kb.rules)
    self_roles = [r for r in kb.atomic_roles() if r.name in transitive]
    for role in self_roles:
        name = _self_concept_name(role)
        st.fresh_concepts.append(name)
        axiom = Gci(TOP, Or(ForAll(RoleAnd(role, invert(role)), BOTTOM), ConceptName(name)))
        tbox.append(axiom)
        st.added_axioms.append(axiom)
        x, y, z = Var("x"), Var("y"), Var("z")
        loop_rule = Rule((ConceptAtom(name, x),), (role_atom(role, x, x),))
        chain_rule = Rule((role_atom(role, x, y), role_atom(role, y, z)), (role_atom(role, x, z),))
        for rule in (loop_rule, chain_rule):
            if rule not in rules:
                rules.append(rule)
                st.added_rules.append(rule)

    return KnowledgeBase.make(tbox, rbox, rules, kb.signature)


# ---------------------------------------------------------------------------
# Lower-bound elimination
# ---------------------------------------------------------------------------

def _first_atleast(c: Concept) -> AtLeast | None:
    """Leftmost outermost lower-bound node of a flat axiom."""
    if isinstance(c, (And, Or)):
        return _first_atleast(c.left) or _first_atleast(c.right)
    if isinstance(c, AtLeast):
        return c
    return None


def _replace_once(c: Concept, target: Concept, replacement: Concept) -> Concept:
    """Substitute the first occurrence of a subconcept (identity-free AST,
    so all structurally equal occurrences denote the same constraint)."""
    if c == target:
        return replacement
    if isinstance(c, And):
        left = _replace_once(c.left, target, replacement)
        if left != c.left:
            return And(left, c.right)
        return And(c.left, _replace_once(c.right, target, replacement))
    if isinstance(c, Or):
        left = _replace_once(c.left, target, replacement)
        if left != c.left:
            return Or(left, c.right)
        return Or(c.left, _replace_once(c.right, target, replacement))
    return c


def transform_ege(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Eliminate lower bounds from the flattened base.

    Each occurrence of a lower bound becomes a conjunction of existentials
    over fresh pairwise-disjoint subroles of the bounded role expression.
    """
    st = _stage(trace, "ege")
    kb = flatten(kb)
    fresh = FreshNames.for_kb(kb)
    tbox = [concept_of(ax) for ax in kb.tbox]
    rbox = list(kb.rbox)

    i = 0
    while i < len(tbox):
        target = _first_atleast(tbox[i])
        if target is None:
            i += 1
            continue
        n = target.bound
        roles = [AtomicRole(fresh.role()) for _ in range(n)]
        st.fresh_roles.extend(r.name for r in roles)
        conj: Concept = Exists(roles[0], target.filler)
        for r in roles[1:]:
            conj = And(conj, Exists(r, target.filler))
        tbox[i] = _replace_once(tbox[i], target, conj)
        for r in roles:
            axiom = RoleInclusion(r, target.role)
            rbox.append(axiom)
            st.added_axioms.append(axiom)
        for a in range(n):
            for b in range(a + 1, n):
                axiom_c = ForAll(RoleAnd(roles[a], roles[b]), BOTTOM)
                tbox.append(axiom_c)
                st.added_axioms.append(Gci(TOP, axiom_c))

    return KnowledgeBase.make([Gci(TOP, c) for c in tbox], rbox, kb.rules, kb.signature)


# ---------------------------------------------------------------------------
# Role-hierarchy internalization
# ---------------------------------------------------------------------------

def transform_eh(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Turn every role inclusion into a TBox axiom about the difference role."""
    st = _stage(trace, "eh")
    tbox = list(kb.tbox)
    rbox = []
    for ax in kb.rbox:
        if isinstance(ax, RoleInclusion):
            st.removed_axioms.append(ax)
            axiom = Gci(TOP, ForAll(RoleAnd(ax.sub, RoleNot(ax.sup)), BOTTOM))
            tbox.append(axiom)
            st.added_axioms.append(axiom)
        else:
            rbox.append(ax)
    return KnowledgeBase.make(tbox, rbox, kb.rules, kb.signature)


# ---------------------------------------------------------------------------
# Upper-bound elimination
# ---------------------------------------------------------------------------

def atomize_counting_roles(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Give every counting restriction an atomic role.

    Each distinct composite role under a bound gets one fresh role name,
    sandwiched to the original expression by two emptiness axioms.
    """
    st = _stage(trace, "atomize")
    fresh = FreshNames.for_kb(kb)
    replacements: dict[RoleExpr, AtomicRole] = {}
    new_axioms: list[Gci] = []

    def rewrite(c: Concept) -> Concept:
        if isinstance(c, Not):
            return Not(rewrite(c.operand))
        if isinstance(c, And):
            return And(rewrite(c.left), rewrite(c.right))
        if isinstance(c, Or):
            return Or(rewrite(c.left), rewrite(c.right))
        if isinstance(c, Exists):
            return Exists(c.role, rewrite(c.filler))
        if isinstance(c, ForAll):
            return ForAll(c.role, rewrite(c.filler))
        if isinstance(c, (AtLeast, AtMost)):
            filler = rewrite(c.filler)
            role = c.role
            if not isinstance(role, AtomicRole):
                if role not in replacements:
                    named = AtomicRole(fresh.role())
                    replacements[role] = named
                    st.fresh_roles.append(named.name)
                    for guard in (
                        ForAll(RoleAnd(role, RoleNot(named)), BOTTOM),
                        ForAll(RoleAnd(RoleNot(role), named), BOTTOM),
                    ):
                        axiom = Gci(TOP, guard)
                        new_axioms.append(axiom)
                        st.added_axioms.append(axiom)
                role = replacements[role]
            kind = AtLeast if isinstance(c, AtLeast) else AtMost
            return kind(c.bound, role, filler)
        return c

    tbox = [Gci(TOP, rewrite(concept_of(ax))) for ax in kb.tbox]
    return KnowledgeBase.make(tbox + new_axioms, kb.rbox, kb.rules, kb.signature)


def _first_atmost(c: Concept, whole_axiom: bool) -> AtMost | None:
    """Leftmost upper bound that is not itself a functionality axiom."""
    if whole_axiom and isinstance(c, AtMost) and c.bound == 1 and isinstance(c.filler, Top):
        return None
    if isinstance(c, (And, Or)):
        return _first_atmost(c.left, False) or _first_atmost(c.right, False)
    if isinstance(c, AtMost):
        return c
    return None


def transform_ele(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Reduce upper bounds to functionality axioms.

    After atomization and flattening, every upper bound other than a
    standalone functionality axiom is replaced by a universal restriction
    over the bounded role minus fresh functional roles that each absorb
    one permitted successor.
    """
    kb = atomize_counting_roles(kb, trace)
    st = _stage(trace, "ele")
    kb = flatten(kb)
    fresh = FreshNames.for_kb(kb)
    tbox = [concept_of(ax) for ax in kb.tbox]

    i = 0
    while i < len(tbox):
        target = _first_atmost(tbox[i], whole_axiom=True)
        if target is None:
            i += 1
            continue
        n = target.bound
        assert isinstance(target.role, AtomicRole), "counting roles must be atomized first"
        roles = [AtomicRole(fresh.role()) for _ in range(n)]
        st.fresh_roles.extend(r.name for r in roles)
        guard: RoleExpr = target.role
        for r in roles:
            guard = RoleAnd(guard, RoleNot(r))
        replacement = ForAll(guard, nnf(Not(target.filler)))
        tbox[i] = _replace_once(tbox[i], target, replacement)
        for r in roles:
            for extra in (ForAll(r, target.filler), AtMost(1, r, TOP)):
                tbox.append(extra)
                st.added_axioms.append(Gci(TOP, extra))

    return KnowledgeBase.make([Gci(TOP, c) for c in tbox], kb.rbox, kb.rules, kb.signature)


# ---------------------------------------------------------------------------
# Functionality elimination
# ---------------------------------------------------------------------------

def _is_functionality(c: Concept) -> bool:
    return isinstance(c, AtMost) and c.bound == 1 and isinstance(c.filler, Top) \
        and isinstance(c.role, AtomicRole)


def transform_ef(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Eliminate functionality axioms.

    For every functional role, all successors are forced to agree on every
    relevant concept and on every atomic role back to the predecessor, and
    a DL-safe rule merges named successors outright.
    """
    st = _stage(trace, "ef")
    functional: list[AtomicRole] = []
    remaining: list[Gci] = []
    for ax in kb.tbox:
        c = concept_of(ax)
        if _is_functionality(c):
            if c.role not in functional:
                functional.append(c.role)
            st.removed_axioms.append(ax)
        else:
            remaining.append(ax)

    if not functional:
        return kb

    relevant = parts(KnowledgeBase.make(remaining, (), (), kb.signature))
    tbox = list(remaining)
    rules = list(kb.rules)
    for role in functional:
        for concept in relevant:
            axiom = Gci(TOP, Or(ForAll(role, nnf(Not(concept))), ForAll(role, concept)))
            tbox.append(axiom)
            st.added_axioms.append(axiom)
        for other in kb.atomic_roles():
            axiom = Gci(TOP, Or(
                ForAll(RoleAnd(role, other), BOTTOM),
                ForAll(RoleAnd(role, RoleNot(other)), BOTTOM),
            ))
            tbox.append(axiom)
            st.added_axioms.append(axiom)
        x, y, z = Var("x"), Var("y"), Var("z")
        merge = Rule((role_atom(role, x, y), role_atom(role, x, z)), (EqualityAtom(y, z),))
        if merge not in rules:
            rules.append(merge)
            st.added_rules.append(merge)

    return KnowledgeBase.make(tbox, kb.rbox, rules, kb.signature)


# ---------------------------------------------------------------------------
# Composite
# ---------------------------------------------------------------------------

def transform_full(kb: KnowledgeBase, trace: ReductionTrace | None = None) -> KnowledgeBase:
    """Run all five stages in order, after validating the input."""
    report = validate_shiqbs(kb)
    if not report.ok:
        raise ValidationError(report)
    kb = transform_es(kb, trace)
    kb = transform_ege(kb, trace)
    kb = transform_eh(kb, trace)
    kb = transform_ele(kb, trace)
    kb = transform_ef(kb, trace)
    return kb
