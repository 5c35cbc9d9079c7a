"""Explicit domino-set engine: the trusted oracle for the compiled path.

A domino abstracts an ordered pair of interpretation elements: the concept
memberships of each element (over a fixed universe of relevant concepts)
and the atomic roles connecting them.  Satisfiability of a terminology is
decided by starting from all locally consistent dominoes and deleting, to
a fixpoint, those whose existential obligations, universal refusals, or
mirror images lack support.

Sets of concepts and roles are packed into machine integers against a
fixed universe ordering, and the deletion rounds run on numpy arrays, so
the engine copes with the oracle-scale inputs used for testing.  It
refuses anything larger; the decision-diagram path has no such limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CapacityError
from .normalize import flatten, parts
from .syntax import (
    And,
    AtLeast,
    AtMost,
    AtomicRole,
    BOTTOM,
    Bottom,
    Concept,
    ConceptAtom,
    ConceptName,
    EqualityAtom,
    Exists,
    ForAll,
    Gci,
    Ind,
    KnowledgeBase,
    Not,
    Or,
    RoleAtom,
    RoleExpr,
    RoleInclusion,
    Rule,
    TOP,
    Top,
    Transitivity,
    Var,
    atom_terms,
    concept_of,
    invert,
    is_quantified,
    role_entails,
)

DEFAULT_UNIVERSE_CAP = 22
DEFAULT_DOMINO_CAP = 1 << 20
DEFAULT_PAIR_CAP = 1 << 18


# ---------------------------------------------------------------------------
# Dominoes and their packed universe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domino:
    left: frozenset
    roles: frozenset
    right: frozenset


class DominoUniverse:
    """Fixed ordering of the governing concepts and atomic roles.

    Concept sets and role sets are represented as bit masks against this
    ordering; a whole domino packs into a single integer.
    """

    def __init__(self, concepts: Sequence[Concept], roles: Sequence[AtomicRole]):
        self.concepts = tuple(concepts)
        self.roles = tuple(roles)
        self.concept_index = {c: i for i, c in enumerate(self.concepts)}
        self.role_index = {r: i for i, r in enumerate(self.roles)}
        if len(self.concept_index) != len(self.concepts):
            raise ValueError("duplicate concepts in universe")
        if len(self.role_index) != len(self.roles):
            raise ValueError("duplicate roles in universe")
        self.n_concepts = len(self.concepts)
        self.n_roles = len(self.roles)

    @staticmethod
    def for_flat_kb(kb: KnowledgeBase) -> "DominoUniverse":
        concepts = [c for c in parts(kb) if c not in (TOP, BOTTOM)]
        return DominoUniverse(concepts, kb.atomic_roles())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DominoUniverse)
            and self.concepts == other.concepts
            and self.roles == other.roles
        )

    def __hash__(self) -> int:
        return hash((self.concepts, self.roles))

    def concept_mask(self, concepts: Iterable[Concept]) -> int:
        mask = 0
        for c in concepts:
            mask |= 1 << self.concept_index[c]
        return mask

    def role_mask(self, roles: Iterable[AtomicRole]) -> int:
        mask = 0
        for r in roles:
            mask |= 1 << self.role_index[r]
        return mask

    def pack(self, domino: Domino) -> int:
        a = self.concept_mask(domino.left)
        r = self.role_mask(domino.roles)
        b = self.concept_mask(domino.right)
        return (a << (self.n_roles + self.n_concepts)) | (r << self.n_concepts) | b

    def unpack(self, code: int) -> Domino:
        c, r = self.n_concepts, self.n_roles
        b = code & ((1 << c) - 1)
        rm = (code >> c) & ((1 << r) - 1)
        a = code >> (c + r)
        return Domino(
            frozenset(self.concepts[i] for i in range(c) if a >> i & 1),
            frozenset(self.roles[i] for i in range(r) if rm >> i & 1),
            frozenset(self.concepts[i] for i in range(c) if b >> i & 1),
        )

    def inverse_role_table(self) -> np.ndarray:
        """Maps each role mask to the mask of the element-wise inverses."""
        r = self.n_roles
        bit_inverse = [1 << self.role_index[invert(role)] for role in self.roles]
        table = np.zeros(1 << r, dtype=np.int64)
        for mask in range(1 << r):
            out = 0
            for i in range(r):
                if mask >> i & 1:
                    out |= bit_inverse[i]
            table[mask] = out
        return table

    def roles_of_mask(self, mask: int) -> frozenset[AtomicRole]:
        return frozenset(self.roles[i] for i in range(self.n_roles) if mask >> i & 1)


class DominoSet:
    """A finite set of dominoes over one universe."""

    def __init__(self, universe: DominoUniverse, codes: Iterable[int]):
        self.universe = universe
        self.codes = tuple(sorted(int(c) for c in codes))

    @staticmethod
    def from_dominoes(universe: DominoUniverse, dominoes: Iterable[Domino]) -> "DominoSet":
        return DominoSet(universe, {universe.pack(d) for d in dominoes})

    def __len__(self) -> int:
        return len(self.codes)

    def __bool__(self) -> bool:
        return bool(self.codes)

    def __iter__(self) -> Iterator[Domino]:
        for code in self.codes:
            yield self.universe.unpack(code)

    def __contains__(self, domino: Domino) -> bool:
        return self.universe.pack(domino) in set(self.codes)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DominoSet)
            and self.universe == other.universe
            and self.codes == other.codes
        )

    def __repr__(self) -> str:
        return f"DominoSet({len(self.codes)} dominoes)"

    def issubset(self, other: "DominoSet") -> bool:
        if self.universe != other.universe:
            raise ValueError("domino sets over different universes")
        return set(self.codes) <= set(other.codes)


# ---------------------------------------------------------------------------
# Finite interpretations
# ---------------------------------------------------------------------------

class FiniteInterpretation:
    """A desk-scale interpretation: explicit extensions over a finite domain.

    Missing concept or role names read as empty; the individual map must
    cover every name that gets queried.
    """

    def __init__(
        self,
        domain: Iterable,
        concepts: Mapping[str, Iterable] | None = None,
        roles: Mapping[str, Iterable[tuple]] | None = None,
        individuals: Mapping[str, object] | None = None,
    ):
        self.domain = tuple(domain)
        domain_set = set(self.domain)
        self.concepts = {n: frozenset(xs) for n, xs in (concepts or {}).items()}
        self.roles = {n: frozenset((x, y) for x, y in ps) for n, ps in (roles or {}).items()}
        self.individuals = dict(individuals or {})
        for name, ext in self.concepts.items():
            if not ext <= domain_set:
                raise ValueError(f"extension of {name} leaves the domain")
        for name, ext in self.roles.items():
            for x, y in ext:
                if x not in domain_set or y not in domain_set:
                    raise ValueError(f"extension of {name} leaves the domain")
        for name, elem in self.individuals.items():
            if elem not in domain_set:
                raise ValueError(f"individual {name} mapped outside the domain")

    # -- evaluation ---------------------------------------------------------

    def eval_role(self, expr: RoleExpr) -> frozenset[tuple]:
        if isinstance(expr, AtomicRole):
            ext = self.roles.get(expr.name, frozenset())
            if expr.inverted:
                return frozenset((y, x) for x, y in ext)
            return ext
        if hasattr(expr, "operand"):  # RoleNot
            full = frozenset(product(self.domain, self.domain))
            return full - self.eval_role(expr.operand)
        left = self.eval_role(expr.left)
        right = self.eval_role(expr.right)
        if expr.__class__.__name__ == "RoleAnd":
            return left & right
        return left | right

    def eval_concept(self, c: Concept) -> frozenset:
        """Extension of a concept by structural recursion on the semantics."""
        if isinstance(c, Top):
            return frozenset(self.domain)
        if isinstance(c, Bottom):
            return frozenset()
        if isinstance(c, ConceptName):
            return self.concepts.get(c.name, frozenset())
        if isinstance(c, Not):
            return frozenset(self.domain) - self.eval_concept(c.operand)
        if isinstance(c, And):
            return self.eval_concept(c.left) & self.eval_concept(c.right)
        if isinstance(c, Or):
            return self.eval_concept(c.left) | self.eval_concept(c.right)
        pairs = self.eval_role(c.role)
        filler = self.eval_concept(c.filler)
        successors: dict = {x: set() for x in self.domain}
        for x, y in pairs:
            successors[x].add(y)
        if isinstance(c, Exists):
            return frozenset(x for x in self.domain if successors[x] & filler)
        if isinstance(c, ForAll):
            return frozenset(x for x in self.domain if successors[x] <= filler)
        if isinstance(c, AtLeast):
            return frozenset(x for x in self.domain if len(successors[x] & filler) >= c.bound)
        if isinstance(c, AtMost):
            return frozenset(x for x in self.domain if len(successors[x] & filler) <= c.bound)
        raise TypeError(f"not a concept: {c!r}")

    # -- model checking -----------------------------------------------------

    def _term_value(self, term, assignment: Mapping[str, object]):
        if isinstance(term, Var):
            return assignment[term.name]
        return self.individuals[term.name]

    def satisfies_rule(self, rule: Rule) -> bool:
        named = sorted({self.individuals[n] for n in self.individuals}, key=repr)
        variables = sorted({t.name for atom in rule.body + rule.head
                            for t in atom_terms(atom) if isinstance(t, Var)})
        for values in product(named, repeat=len(variables)):
            assignment = dict(zip(variables, values))

            def holds(atom) -> bool:
                if isinstance(atom, ConceptAtom):
                    return self._term_value(atom.term, assignment) in self.concepts.get(
                        atom.concept, frozenset())
                if isinstance(atom, RoleAtom):
                    pair = (self._term_value(atom.subject, assignment),
                            self._term_value(atom.object, assignment))
                    return pair in self.roles.get(atom.role, frozenset())
                if isinstance(atom, EqualityAtom):
                    return self._term_value(atom.left, assignment) == self._term_value(
                        atom.right, assignment)
                raise TypeError(f"not an atom: {atom!r}")

            if all(holds(a) for a in rule.body) and not all(holds(a) for a in rule.head):
                return False
        return True

    def satisfies_axiom(self, axiom) -> bool:
        if isinstance(axiom, Gci):
            return self.eval_concept(axiom.lhs) <= self.eval_concept(axiom.rhs)
        if isinstance(axiom, RoleInclusion):
            return self.eval_role(axiom.sub) <= self.eval_role(axiom.sup)
        if isinstance(axiom, Transitivity):
            ext = self.eval_role(axiom.role)
            return all((x, w) in ext for x, y in ext for z, w in ext if y == z)
        raise TypeError(f"not an axiom: {axiom!r}")

    def check_model(self, kb: KnowledgeBase) -> bool:
        """True iff every axiom holds and every rule holds under all
        assignments of variables to named elements."""
        return (
            all(self.satisfies_axiom(ax) for ax in kb.tbox)
            and all(self.satisfies_axiom(ax) for ax in kb.rbox)
            and all(self.satisfies_rule(rule) for rule in kb.rules)
        )


def domino_projection(
    interp: FiniteInterpretation,
    concepts: Sequence[Concept],
    roles: Sequence[AtomicRole] | None = None,
) -> DominoSet:
    """One domino per ordered pair of elements of the interpretation.

    The left and right components collect which of the given concepts hold
    at each element; the role component collects the atomic roles (names
    and inverses) connecting the pair.
    """
    if roles is None:
        names = sorted(interp.roles)
        roles = tuple(AtomicRole(n) for n in names) + tuple(AtomicRole(n, True) for n in names)
    universe = DominoUniverse(tuple(concepts), tuple(roles))
    member: dict[Concept, frozenset] = {c: interp.eval_concept(c) for c in universe.concepts}
    role_ext: dict[AtomicRole, frozenset] = {r: interp.eval_role(r) for r in universe.roles}
    codes = set()
    for x in interp.domain:
        a = universe.concept_mask(c for c in universe.concepts if x in member[c])
        for y in interp.domain:
            b = universe.concept_mask(c for c in universe.concepts if y in member[c])
            rm = universe.role_mask(r for r in universe.roles if (x, y) in role_ext[r])
            codes.add((a << (universe.n_roles + universe.n_concepts))
                      | (rm << universe.n_concepts) | b)
    return DominoSet(universe, codes)


# ---------------------------------------------------------------------------
# Canonical domino set (type elimination)
# ---------------------------------------------------------------------------

_TRUE_FILLER = -1
_FALSE_FILLER = -2


def _filler_ref(universe: DominoUniverse, filler: Concept) -> int:
    if isinstance(filler, Top):
        return _TRUE_FILLER
    if isinstance(filler, Bottom):
        return _FALSE_FILLER
    return universe.concept_index[filler]


def _axiom_truth_vector(universe: DominoUniverse, concept: Concept, all_masks: np.ndarray) -> np.ndarray:
    """Vector of truth values of a flat axiom over every left-side mask.

    Quantified parts and names are read as propositional atoms: true on a
    mask exactly when the mask contains them.
    """
    idx = universe.concept_index.get(concept)
    if idx is not None:
        return (all_masks >> idx & 1).astype(bool)
    if isinstance(concept, Top):
        return np.ones(len(all_masks), dtype=bool)
    if isinstance(concept, Bottom):
        return np.zeros(len(all_masks), dtype=bool)
    if isinstance(concept, Not):
        return ~_axiom_truth_vector(universe, concept.operand, all_masks)
    if isinstance(concept, And):
        return _axiom_truth_vector(universe, concept.left, all_masks) & _axiom_truth_vector(
            universe, concept.right, all_masks)
    if isinstance(concept, Or):
        return _axiom_truth_vector(universe, concept.left, all_masks) | _axiom_truth_vector(
            universe, concept.right, all_masks)
    raise ValueError(f"axiom mentions a concept outside the universe: {concept!r}")


def canonical_domino_set(
    kb: KnowledgeBase,
    *,
    universe_cap: int = DEFAULT_UNIVERSE_CAP,
    domino_cap: int = DEFAULT_DOMINO_CAP,
    pair_cap: int = DEFAULT_PAIR_CAP,
    history: list | None = None,
) -> DominoSet:
    """Greatest set of locally supported dominoes for a terminology.

    The TBox is flattened internally; rules and RBox content are ignored
    (the terminology must already be free of counting and role axioms).
    The returned set is empty exactly when the terminology is
    unsatisfiable.

    When ``history`` is given, the packed set after the seed stage and
    after every deletion round is appended to it, so tests can observe the
    monotone shrinking.
    """
    flat = flatten(kb)
    universe = DominoUniverse.for_flat_kb(flat)
    c, r = universe.n_concepts, universe.n_roles
    if c + r > universe_cap:
        raise CapacityError(
            f"domino universe needs {c} concepts + {r} roles, cap is {universe_cap}")

    all_a = np.arange(1 << c, dtype=np.int64)
    keep = np.ones(1 << c, dtype=bool)
    for ax in flat.tbox:
        keep &= _axiom_truth_vector(universe, concept_of(ax), all_a)
    locally_valid = [int(a) for a in all_a[keep]]

    if len(locally_valid) << r > pair_cap:
        raise CapacityError("too many locally valid left sides for the oracle engine")

    exists_members: list[tuple[Concept, int, int]] = []  # (role expr owner, own bit, filler ref)
    forall_members: list[tuple[Concept, int, int]] = []
    for concept in universe.concepts:
        if isinstance(concept, Exists):
            exists_members.append((concept, universe.concept_index[concept],
                                   _filler_ref(universe, concept.filler)))
        elif isinstance(concept, ForAll):
            forall_members.append((concept, universe.concept_index[concept],
                                   _filler_ref(universe, concept.filler)))
        elif is_quantified(concept):
            raise ValueError("counting restriction reached the domino engine; reduce first")

    # truth of each quantifier's role expression on every role mask
    entails: dict[RoleExpr, np.ndarray] = {}
    for concept, _, _ in exists_members + forall_members:
        if concept.role not in entails:
            entails[concept.role] = np.array(
                [role_entails(universe.roles_of_mask(m), concept.role) for m in range(1 << r)],
                dtype=bool,
            )

    # seed stage: left side locally valid, witnesses recorded, universals pushed
    all_b = np.arange(1 << c, dtype=np.int64)
    chunks: list[np.ndarray] = []
    total = 0
    for a in locally_valid:
        for rm in range(1 << r):
            required = 0
            forbidden = 0
            impossible = False
            for concept, bit, filler in exists_members:
                if not entails[concept.role][rm]:
                    continue
                if filler == _FALSE_FILLER:
                    continue
                if filler == _TRUE_FILLER:
                    if not a >> bit & 1:
                        impossible = True
                        break
                elif not a >> bit & 1:
                    forbidden |= 1 << filler
            if impossible:
                continue
            for concept, bit, filler in forall_members:
                if not (a >> bit & 1 and entails[concept.role][rm]):
                    continue
                if filler == _TRUE_FILLER:
                    continue
                if filler == _FALSE_FILLER:
                    impossible = True
                    break
                required |= 1 << filler
            if impossible:
                continue
            ok = all_b[((all_b & forbidden) == 0) & ((all_b & required) == required)]
            total += len(ok)
            if total > domino_cap:
                raise CapacityError(f"seed domino set exceeds {domino_cap} entries")
            if len(ok):
                chunks.append((a << (r + c)) | (rm << c) | ok)

    codes = np.unique(np.concatenate(chunks)) if chunks else np.empty(0, dtype=np.int64)
    if history is not None:
        history.append(frozenset(int(x) for x in codes))

    inverse_table = universe.inverse_role_table()
    role_bits = (1 << r) - 1
    concept_bits = (1 << c) - 1

    def filler_holds(filler: int, b_part: np.ndarray) -> np.ndarray:
        if filler == _TRUE_FILLER:
            return np.ones(len(b_part), dtype=bool)
        if filler == _FALSE_FILLER:
            return np.zeros(len(b_part), dtype=bool)
        return (b_part >> filler & 1).astype(bool)

    while len(codes):
        a_part = codes >> (r + c)
        r_part = (codes >> c) & role_bits
        b_part = codes & concept_bits

        # group support: every claimed existential needs a witness with the
        # same left side, every refused universal needs a counterexample
        alive: list[int] = []
        uniq_a = np.unique(a_part)
        starts = np.searchsorted(a_part, uniq_a, side="left")
        ends = np.searchsorted(a_part, uniq_a, side="right")
        for a, lo, hi in zip(uniq_a, starts, ends):
            rs = r_part[lo:hi]
            bs = b_part[lo:hi]
            ok = True
            for concept, bit, filler in exists_members:
                if a >> bit & 1:
                    if not (entails[concept.role][rs] & filler_holds(filler, bs)).any():
                        ok = False
                        break
            if ok:
                for concept, bit, filler in forall_members:
                    if not a >> bit & 1:
                        if not (entails[concept.role][rs] & ~filler_holds(filler, bs)).any():
                            ok = False
                            break
            if ok:
                alive.append(int(a))

        alive_arr = np.isin(a_part, np.array(alive, dtype=np.int64))
        mirror = (b_part << (r + c)) | (inverse_table[r_part] << c) | a_part
        pos = np.searchsorted(codes, mirror)
        pos_clipped = np.minimum(pos, len(codes) - 1)
        mirror_present = codes[pos_clipped] == mirror
        surviving = codes[alive_arr & mirror_present]
        if history is not None:
            history.append(frozenset(int(x) for x in surviving))
        if len(surviving) == len(codes):
            break
        codes = surviving

    return DominoSet(universe, (int(x) for x in codes))


# ---------------------------------------------------------------------------
# Bounded domino interpretation (debug aid)
# ---------------------------------------------------------------------------

def build_bounded_domino_interpretation(ds: DominoSet, depth: int) -> FiniteInterpretation:
    """Prefix of the word model induced by a domino set.

    Elements are the linkable domino words of length 1 up to ``depth``;
    each word satisfies exactly the concept names recorded on its last
    letter's right side.  Words of maximal length are a frontier whose
    existential obligations may dangle, so this is a debugging aid, not a
    model construction.
    """
    if not ds:
        raise ValueError("no dominoes")
    if depth < 1:
        raise ValueError("depth must be at least 1; there are no words of length 0")
    dominoes = list(ds)
    words: list[tuple[Domino, ...]] = [(d,) for d in dominoes]
    frontier = words
    for _ in range(depth - 1):
        extended = [w + (d,) for w in frontier for d in dominoes if w[-1].right == d.left]
        words.extend(extended)
        frontier = extended

    concept_names = sorted({c.name for d in dominoes
                            for c in (d.left | d.right) if isinstance(c, ConceptName)})
    role_names = sorted({r.name for d in dominoes for r in d.roles})
    concepts = {
        n: frozenset(w for w in words if ConceptName(n) in w[-1].right) for n in concept_names
    }
    roles: dict[str, set[tuple]] = {n: set() for n in role_names}
    by_prefix = {w: w[:-1] for w in words if len(w) > 1}
    for w, prefix in by_prefix.items():
        last = w[-1]
        for role in last.roles:
            if role.inverted:
                roles[role.name].add((w, prefix))
            else:
                roles[role.name].add((prefix, w))
    return FiniteInterpretation(words, concepts, roles, {})
