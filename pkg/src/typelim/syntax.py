"""Abstract syntax for SHIQbs knowledge bases with Boolean role expressions.

The data model covers concept and role expressions, TBox/RBox axioms,
DL-safe rules (which subsume ABox assertions), and the derived notions
needed everywhere downstream: entailment between role sets and role
expressions, restrictedness, simplicity of roles, and well-formedness
checks.

All values are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


# ---------------------------------------------------------------------------
# Roles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomicRole:
    """A role name or the inverse of a role name."""

    name: str
    inverted: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("role name must be nonempty")


def invert(role: AtomicRole) -> AtomicRole:
    """Inverse of an atomic role; involutive."""
    return AtomicRole(role.name, not role.inverted)


@dataclass(frozen=True)
class RoleNot:
    operand: "RoleExpr"


@dataclass(frozen=True)
class RoleAnd:
    left: "RoleExpr"
    right: "RoleExpr"


@dataclass(frozen=True)
class RoleOr:
    left: "RoleExpr"
    right: "RoleExpr"


RoleExpr = Union[AtomicRole, RoleNot, RoleAnd, RoleOr]


def role_leaves(expr: RoleExpr) -> Iterator[AtomicRole]:
    """All atomic roles occurring in a role expression."""
    if isinstance(expr, AtomicRole):
        yield expr
    elif isinstance(expr, RoleNot):
        yield from role_leaves(expr.operand)
    else:
        yield from role_leaves(expr.left)
        yield from role_leaves(expr.right)


def role_entails(roles: Iterable[AtomicRole], expr: RoleExpr) -> bool:
    """Decide whether a set of atomic roles entails a role expression.

    An atomic role is entailed iff it is a member of the set; the Boolean
    connectives are evaluated accordingly.
    """
    rs = roles if isinstance(roles, (set, frozenset)) else frozenset(roles)
    if isinstance(expr, AtomicRole):
        return expr in rs
    if isinstance(expr, RoleNot):
        return not role_entails(rs, expr.operand)
    if isinstance(expr, RoleAnd):
        return role_entails(rs, expr.left) and role_entails(rs, expr.right)
    if isinstance(expr, RoleOr):
        return role_entails(rs, expr.left) or role_entails(rs, expr.right)
    raise TypeError(f"not a role expression: {expr!r}")


def is_restricted(expr: RoleExpr) -> bool:
    """True iff the empty role set does not entail the expression.

    Only restricted expressions may appear in quantifiers and role
    inclusions: they cannot hold between two entirely unrelated elements.
    """
    return not role_entails(frozenset(), expr)


# ---------------------------------------------------------------------------
# Concepts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True)
class ConceptName:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("concept name must be nonempty")


@dataclass(frozen=True)
class Not:
    operand: "Concept"


@dataclass(frozen=True)
class And:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Or:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Exists:
    role: RoleExpr
    filler: "Concept"


@dataclass(frozen=True)
class ForAll:
    role: RoleExpr
    filler: "Concept"


@dataclass(frozen=True)
class AtLeast:
    bound: int
    role: RoleExpr
    filler: "Concept"

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise ValueError("atleast bound must be >= 1")


@dataclass(frozen=True)
class AtMost:
    bound: int
    role: RoleExpr
    filler: "Concept"

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValueError("atmost bound must be >= 0")


Concept = Union[Top, Bottom, ConceptName, Not, And, Or, Exists, ForAll, AtLeast, AtMost]

_QUANTIFIED = (Exists, ForAll, AtLeast, AtMost)


def is_quantified(c: Concept) -> bool:
    return isinstance(c, _QUANTIFIED)


def subconcepts(c: Concept) -> Iterator[Concept]:
    """The concept itself and all concept subexpressions, preorder."""
    yield c
    if isinstance(c, Not):
        yield from subconcepts(c.operand)
    elif isinstance(c, (And, Or)):
        yield from subconcepts(c.left)
        yield from subconcepts(c.right)
    elif isinstance(c, _QUANTIFIED):
        yield from subconcepts(c.filler)


def role_exprs_in(c: Concept) -> Iterator[RoleExpr]:
    for sub in subconcepts(c):
        if isinstance(sub, _QUANTIFIED):
            yield sub.role


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gci:
    """General concept inclusion, lhs subsumed by rhs."""

    lhs: Concept
    rhs: Concept


@dataclass(frozen=True)
class RoleInclusion:
    sub: RoleExpr
    sup: RoleExpr


@dataclass(frozen=True)
class Transitivity:
    role: AtomicRole


Axiom = Union[Gci, RoleInclusion, Transitivity]


def concept_of(axiom: Gci) -> Concept:
    """The universally valid concept equivalent to a GCI.

    A GCI with a top-concept left side is read as its right side alone;
    anything else becomes the usual negation-disjunction rewriting.
    """
    if axiom.lhs == TOP:
        return axiom.rhs
    return Or(Not(axiom.lhs), axiom.rhs)


def valid_axiom(c: Concept) -> Gci:
    """Wrap a concept as the axiom stating it holds everywhere."""
    return Gci(TOP, c)


# ---------------------------------------------------------------------------
# DL-safe rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Ind:
    name: str


Term = Union[Var, Ind]


@dataclass(frozen=True)
class ConceptAtom:
    concept: str
    term: Term


@dataclass(frozen=True)
class RoleAtom:
    role: str
    subject: Term
    object: Term


@dataclass(frozen=True)
class EqualityAtom:
    left: Term
    right: Term


Atom = Union[ConceptAtom, RoleAtom, EqualityAtom]


def role_atom(role: AtomicRole, subject: Term, object: Term) -> RoleAtom:
    """Role atom over an atomic role; inverses swap the argument order."""
    if role.inverted:
        return RoleAtom(role.name, object, subject)
    return RoleAtom(role.name, subject, object)


@dataclass(frozen=True)
class Rule:
    """DL-safe rule: conjunctive body implies conjunctive head.

    Variables range over named individuals only.  An empty body makes the
    head unconditional (an assertion); an empty head makes the body
    inconsistent (a negated assertion).
    """

    body: tuple[Atom, ...]
    head: tuple[Atom, ...]


def atom_terms(atom: Atom) -> tuple[Term, ...]:
    if isinstance(atom, ConceptAtom):
        return (atom.term,)
    if isinstance(atom, RoleAtom):
        return (atom.subject, atom.object)
    return (atom.left, atom.right)


def rule_variables(rule: Rule) -> list[str]:
    """Variable names in first-occurrence order, body before head."""
    seen: list[str] = []
    for atom in rule.body + rule.head:
        for term in atom_terms(atom):
            if isinstance(term, Var) and term.name not in seen:
                seen.append(term.name)
    return seen


_CANONICAL_VARS = ("x", "y", "z")


def canonicalize_rule(rule: Rule) -> Rule:
    """Rename variables positionally (x, y, z, v3, ...) for stable output."""
    names = rule_variables(rule)
    mapping = {}
    for i, name in enumerate(names):
        mapping[name] = _CANONICAL_VARS[i] if i < 3 else f"v{i}"

    def sub(term: Term) -> Term:
        return Var(mapping[term.name]) if isinstance(term, Var) else term

    def sub_atom(atom: Atom) -> Atom:
        if isinstance(atom, ConceptAtom):
            return ConceptAtom(atom.concept, sub(atom.term))
        if isinstance(atom, RoleAtom):
            return RoleAtom(atom.role, sub(atom.subject), sub(atom.object))
        return EqualityAtom(sub(atom.left), sub(atom.right))

    return Rule(tuple(sub_atom(a) for a in rule.body), tuple(sub_atom(a) for a in rule.head))


# ---------------------------------------------------------------------------
# Knowledge bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    concept_names: frozenset[str] = frozenset()
    role_names: frozenset[str] = frozenset()
    individual_names: frozenset[str] = frozenset()

    def union(self, other: "Signature") -> "Signature":
        return Signature(
            self.concept_names | other.concept_names,
            self.role_names | other.role_names,
            self.individual_names | other.individual_names,
        )


def _dedup(items: Iterable) -> tuple:
    out = []
    seen = set()
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _names_of_concept(c: Concept) -> tuple[set[str], set[str]]:
    cnames: set[str] = set()
    rnames: set[str] = set()
    for sub in subconcepts(c):
        if isinstance(sub, ConceptName):
            cnames.add(sub.name)
        elif isinstance(sub, _QUANTIFIED):
            rnames.update(leaf.name for leaf in role_leaves(sub.role))
    return cnames, rnames


@dataclass(frozen=True)
class KnowledgeBase:
    """A TBox of GCIs, an RBox, and a DL-safe rule base.

    The signature always covers every name used anywhere in the axioms and
    rules; axiom and rule order is the deterministic insertion order with
    structural duplicates removed.
    """

    tbox: tuple[Gci, ...] = ()
    rbox: tuple[Axiom, ...] = ()
    rules: tuple[Rule, ...] = ()
    signature: Signature = field(default_factory=Signature)

    @staticmethod
    def make(
        tbox: Iterable[Gci] = (),
        rbox: Iterable[Axiom] = (),
        rules: Iterable[Rule] = (),
        signature: Signature | None = None,
    ) -> "KnowledgeBase":
        tbox = _dedup(tbox)
        rbox = _dedup(rbox)
        rules = _dedup(rules)
        cnames: set[str] = set()
        rnames: set[str] = set()
        inames: set[str] = set()
        for ax in tbox:
            for side in (ax.lhs, ax.rhs):
                cs, rs = _names_of_concept(side)
                cnames |= cs
                rnames |= rs
        for ax in rbox:
            if isinstance(ax, RoleInclusion):
                for expr in (ax.sub, ax.sup):
                    rnames.update(leaf.name for leaf in role_leaves(expr))
            elif isinstance(ax, Transitivity):
                rnames.add(ax.role.name)
        for rule in rules:
            for atom in rule.body + rule.head:
                if isinstance(atom, ConceptAtom):
                    cnames.add(atom.concept)
                elif isinstance(atom, RoleAtom):
                    rnames.add(atom.role)
                for term in atom_terms(atom):
                    if isinstance(term, Ind):
                        inames.add(term.name)
        sig = Signature(frozenset(cnames), frozenset(rnames), frozenset(inames))
        if signature is not None:
            sig = sig.union(signature)
        return KnowledgeBase(tbox, rbox, rules, sig)

    def atomic_roles(self) -> tuple[AtomicRole, ...]:
        """All atomic roles of the signature, names before inverses."""
        names = sorted(self.signature.role_names)
        return tuple(AtomicRole(n) for n in names) + tuple(AtomicRole(n, True) for n in names)

    def transitive_role_names(self) -> frozenset[str]:
        # a relation is transitive iff its inverse is, so track names only
        return frozenset(ax.role.name for ax in self.rbox if isinstance(ax, Transitivity))

    def role_inclusions(self) -> tuple[RoleInclusion, ...]:
        return tuple(ax for ax in self.rbox if isinstance(ax, RoleInclusion))

    def with_tbox(self, tbox: Iterable[Gci]) -> "KnowledgeBase":
        return KnowledgeBase.make(tbox, self.rbox, self.rules, self.signature)


def tbox_only(kb: KnowledgeBase) -> KnowledgeBase:
    """The terminological part alone, keeping the full signature."""
    return KnowledgeBase.make(kb.tbox, (), (), kb.signature)


# ---------------------------------------------------------------------------
# Role classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoleClassification:
    """Non-simple roles plus the reflexive-transitive role hierarchy."""

    non_simple: frozenset[AtomicRole]
    subsumes: frozenset[tuple[AtomicRole, AtomicRole]]

    def is_simple(self, role: AtomicRole) -> bool:
        return role not in self.non_simple

    def subsumed_by(self, sub: AtomicRole, sup: AtomicRole) -> bool:
        return (sub, sup) in self.subsumes


def classify_roles(kb: KnowledgeBase) -> RoleClassification:
    """Compute non-simple roles and the hierarchy preorder over atomic roles.

    A role is non-simple if a transitivity axiom declares it (in either
    orientation), or an atomic role inclusion propagates non-simplicity
    upward; the set is closed under inverses.  The preorder is the
    reflexive-transitive closure of the atomic role inclusion axioms,
    closed under inverting both sides.
    """
    atomic = kb.atomic_roles()
    edges: set[tuple[AtomicRole, AtomicRole]] = set()
    for ax in kb.role_inclusions():
        if isinstance(ax.sub, AtomicRole) and isinstance(ax.sup, AtomicRole):
            edges.add((ax.sub, ax.sup))
            edges.add((invert(ax.sub), invert(ax.sup)))

    non_simple: set[AtomicRole] = set()
    for name in kb.transitive_role_names():
        non_simple.add(AtomicRole(name))
        non_simple.add(AtomicRole(name, True))
    changed = True
    while changed:
        changed = False
        for sub, sup in edges:
            if sub in non_simple and sup not in non_simple:
                non_simple.add(sup)
                non_simple.add(invert(sup))
                changed = True

    closure: set[tuple[AtomicRole, AtomicRole]] = {(r, r) for r in atomic}
    closure |= edges
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return RoleClassification(frozenset(non_simple), frozenset(closure))


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


class ValidationError(Exception):
    """Raised when a pipeline stage requires a well-formed knowledge base."""

    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(f"{v.kind}: {v.detail}" for v in report.violations))
        self.report = report


def validate_shiqbs(kb: KnowledgeBase) -> ValidationReport:
    """Collect all admissibility violations; never raises.

    Flags non-simple roles inside non-atomic Boolean role expressions,
    non-simple roles under counting restrictions, and unrestricted role
    expressions in quantifiers or role inclusion axioms.
    """
    cls = classify_roles(kb)
    violations: list[Violation] = []

    def check_expr(expr: RoleExpr, context: str, counting: bool) -> None:
        if not isinstance(expr, AtomicRole):
            bad = [r for r in role_leaves(expr) if not cls.is_simple(r)]
            if bad:
                violations.append(Violation(
                    "non-simple-in-boolean-role",
                    f"{render_role(expr)} in {context} uses non-simple {render_role(bad[0])}",
                ))
        if counting:
            bad = [r for r in role_leaves(expr) if not cls.is_simple(r)]
            if bad:
                violations.append(Violation(
                    "non-simple-in-counting",
                    f"counting over {render_role(expr)} uses non-simple {render_role(bad[0])}",
                ))
        if not is_restricted(expr):
            violations.append(Violation(
                "unrestricted-role",
                f"{render_role(expr)} in {context} holds between unrelated elements",
            ))

    for ax in kb.tbox:
        for side in (ax.lhs, ax.rhs):
            for sub in subconcepts(side):
                if isinstance(sub, _QUANTIFIED):
                    check_expr(sub.role, render_concept(sub), isinstance(sub, (AtLeast, AtMost)))
    for ax in kb.role_inclusions():
        check_expr(ax.sub, render_axiom(ax), False)
        check_expr(ax.sup, render_axiom(ax), False)
    return ValidationReport(tuple(violations))


# ---------------------------------------------------------------------------
# Canonical text rendering (same grammar the parser accepts)
# ---------------------------------------------------------------------------

def render_role(expr: RoleExpr) -> str:
    if isinstance(expr, AtomicRole):
        return f"inv({expr.name})" if expr.inverted else expr.name
    if isinstance(expr, RoleNot):
        return f"not({render_role(expr.operand)})"
    if isinstance(expr, RoleAnd):
        return f"and({render_role(expr.left)}, {render_role(expr.right)})"
    if isinstance(expr, RoleOr):
        return f"or({render_role(expr.left)}, {render_role(expr.right)})"
    raise TypeError(f"not a role expression: {expr!r}")


def render_concept(c: Concept) -> str:
    if isinstance(c, Top):
        return "Top"
    if isinstance(c, Bottom):
        return "Bottom"
    if isinstance(c, ConceptName):
        return c.name
    if isinstance(c, Not):
        return f"not({render_concept(c.operand)})"
    if isinstance(c, And):
        return f"and({render_concept(c.left)}, {render_concept(c.right)})"
    if isinstance(c, Or):
        return f"or({render_concept(c.left)}, {render_concept(c.right)})"
    if isinstance(c, Exists):
        return f"some({render_role(c.role)}, {render_concept(c.filler)})"
    if isinstance(c, ForAll):
        return f"all({render_role(c.role)}, {render_concept(c.filler)})"
    if isinstance(c, AtLeast):
        return f"atleast({c.bound}, {render_role(c.role)}, {render_concept(c.filler)})"
    if isinstance(c, AtMost):
        return f"atmost({c.bound}, {render_role(c.role)}, {render_concept(c.filler)})"
    raise TypeError(f"not a concept: {c!r}")


def render_term(term: Term) -> str:
    return f"?{term.name}" if isinstance(term, Var) else term.name


def render_atom(atom: Atom) -> str:
    if isinstance(atom, ConceptAtom):
        return f"{atom.concept}({render_term(atom.term)})"
    if isinstance(atom, RoleAtom):
        return f"{atom.role}({render_term(atom.subject)}, {render_term(atom.object)})"
    return f"{render_term(atom.left)} ~ {render_term(atom.right)}"


def render_rule(rule: Rule) -> str:
    body = ", ".join(render_atom(a) for a in rule.body)
    head = ", ".join(render_atom(a) for a in rule.head)
    return f"Rule({body} -> {head})"


def render_axiom(ax: Axiom) -> str:
    if isinstance(ax, Gci):
        if ax.lhs == TOP:
            return f"Valid({render_concept(ax.rhs)})"
        return f"SubClassOf({render_concept(ax.lhs)}, {render_concept(ax.rhs)})"
    if isinstance(ax, RoleInclusion):
        return f"SubRoleOf({render_role(ax.sub)}, {render_role(ax.sup)})"
    if isinstance(ax, Transitivity):
        # transitivity is orientation-independent, so render on the name
        return f"Transitive({ax.role.name})"
    raise TypeError(f"not an axiom: {ax!r}")
