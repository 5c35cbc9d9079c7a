"""Ground disjunctive-Datalog reasoning.

Rules are instantiated over the program's constants, read as propositional
clauses (body implies head disjunction), and decided by a small systematic
search with unit propagation.  Cautious entailment of a positive ground
atom reduces to unsatisfiability of the grounding plus the constraint
forbidding the atom; the programs are negation-free, so an atom false in
some model is false in some minimal model, making the classical check
agree with truth in all minimal models.  An exhaustive minimal-model
enumerator doubles as the testing oracle for that reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Sequence

from .datalog import DatalogAtom, DatalogProgram, Pred, axiomatize_equality
from .errors import CapacityError, ReasoningError
from .syntax import Var

MINIMAL_MODEL_ATOM_CAP = 24


@dataclass(frozen=True)
class GroundAtom:
    pred: Pred
    args: tuple[str, ...]


class GroundProgram:
    """Instantiated rules as clauses over an interned atom universe.

    Clause literals are signed indices: ``i + 1`` asserts atom ``i`` and
    ``-(i + 1)`` refutes it.  Atom indices follow first occurrence during
    grounding, which makes the search deterministic.
    """

    def __init__(self) -> None:
        self.atoms: list[GroundAtom] = []
        self.index: dict[GroundAtom, int] = {}
        self.clauses: list[tuple[int, ...]] = []
        self._clause_set: set[tuple[int, ...]] = set()

    def intern(self, atom: GroundAtom) -> int:
        i = self.index.get(atom)
        if i is None:
            i = len(self.atoms)
            self.index[atom] = i
            self.atoms.append(atom)
        return i

    def add_clause(self, neg: Sequence[int], pos: Sequence[int]) -> None:
        clause = tuple(-(i + 1) for i in neg) + tuple(i + 1 for i in pos)
        if clause not in self._clause_set:
            self._clause_set.add(clause)
            self.clauses.append(clause)

    def __len__(self) -> int:
        return len(self.clauses)


def _instantiate(atom: DatalogAtom, binding: Mapping[str, str]) -> GroundAtom:
    args = tuple(binding[t.name] if isinstance(t, Var) else t.name for t in atom.args)
    return GroundAtom(atom.pred, args)


def ground(program: DatalogProgram) -> GroundProgram:
    """Instantiate every rule under all substitutions over the constants."""
    gp = GroundProgram()
    constants = program.constants
    for rule in program.rules:
        variables: list[str] = []
        for atom in rule.body + rule.head:
            for term in atom.args:
                if isinstance(term, Var) and term.name not in variables:
                    variables.append(term.name)
        for values in product(constants, repeat=len(variables)):
            binding = dict(zip(variables, values))
            neg = [gp.intern(_instantiate(a, binding)) for a in rule.body]
            pos = [gp.intern(_instantiate(a, binding)) for a in rule.head]
            gp.add_clause(neg, pos)
    return gp


# ---------------------------------------------------------------------------
# Propositional search
# ---------------------------------------------------------------------------

class _Search:
    """DPLL with unit propagation; branches on atoms in index order."""

    def __init__(self, n_atoms: int, clauses: Sequence[tuple[int, ...]]):
        self.n = n_atoms
        self.clauses = list(clauses)

    def solve(self, fixed: Mapping[int, bool] | None = None) -> list[bool] | None:
        assign: list[bool | None] = [None] * (self.n + 1)
        trail: list[int] = []

        def value(lit: int) -> bool | None:
            v = assign[abs(lit)]
            if v is None:
                return None
            return v if lit > 0 else not v

        def set_literal(lit: int) -> bool:
            var = abs(lit)
            want = lit > 0
            current = assign[var]
            if current is not None:
                return current == want
            assign[var] = want
            trail.append(var)
            return True

        def propagate() -> bool:
            changed = True
            while changed:
                changed = False
                for clause in self.clauses:
                    unassigned = None
                    satisfied = False
                    count = 0
                    for lit in clause:
                        v = value(lit)
                        if v is True:
                            satisfied = True
                            break
                        if v is None:
                            unassigned = lit
                            count += 1
                            if count > 1:
                                break
                    if satisfied:
                        continue
                    if count == 0:
                        return False
                    if count == 1:
                        if not set_literal(unassigned):
                            return False
                        changed = True
            return True

        if fixed:
            for var, val in fixed.items():
                if not set_literal(var + 1 if val else -(var + 1)):
                    return None

        def search() -> bool:
            if not propagate():
                return False
            var = next((v for v in range(1, self.n + 1) if assign[v] is None), None)
            if var is None:
                return True
            mark = len(trail)
            for val in (False, True):
                assign[var] = val
                trail.append(var)
                if search():
                    return True
                while len(trail) > mark:
                    assign[trail.pop()] = None
            return False

        if search():
            return [bool(assign[v]) for v in range(1, self.n + 1)]
        return None


def is_satisfiable(gp: GroundProgram) -> bool:
    """Classical satisfiability of the ground rules read as clauses."""
    return _Search(len(gp.atoms), gp.clauses).solve() is not None


def entailed_in_grounding(gp: GroundProgram, atom: GroundAtom) -> bool:
    """Unsatisfiability of the grounding with the atom constrained false."""
    index = gp.index.get(atom)
    search = _Search(len(gp.atoms), gp.clauses)
    if index is None:
        # the atom occurs in no rule instance, so only inconsistency entails it
        return search.solve() is None
    return search.solve({index: False}) is None


def cautious_entails(program: DatalogProgram, atom: GroundAtom) -> bool:
    """Truth of a ground atom in every minimal model of the program.

    Equality is axiomatized on the fly; an atom whose constants are
    foreign to the program is never entailed (and left to the caller to
    report), while an unknown predicate is an error.
    """
    if not program.has_predicate(atom.pred):
        raise ReasoningError(f"unknown predicate {atom.pred!r}")
    if not all(c in program.constants for c in atom.args):
        return False
    return entailed_in_grounding(ground(axiomatize_equality(program)), atom)


def enumerate_minimal_models(gp: GroundProgram) -> Iterator[frozenset[GroundAtom]]:
    """All subset-minimal models, each exactly once (testing oracle).

    Works by repeatedly solving, shrinking the found model to a minimal
    one, emitting it, and blocking its supersets; distinct minimal models
    are incomparable, so blocking never hides one.
    """
    n = len(gp.atoms)
    if n > MINIMAL_MODEL_ATOM_CAP:
        raise CapacityError(f"{n} ground atoms exceed the oracle cap {MINIMAL_MODEL_ATOM_CAP}")
    blocking: list[tuple[int, ...]] = []
    while True:
        model = _Search(n, gp.clauses + blocking).solve()
        if model is None:
            return
        true_set = {i for i in range(n) if model[i]}
        while True:
            shrink_clauses = list(gp.clauses)
            shrink_clauses.append(tuple(-(i + 1) for i in sorted(true_set)))
            fixed = {i: False for i in range(n) if i not in true_set}
            smaller = _Search(n, shrink_clauses).solve(fixed)
            if smaller is None:
                break
            true_set = {i for i in range(n) if smaller[i]}
        yield frozenset(gp.atoms[i] for i in sorted(true_set))
        blocking.append(tuple(-(i + 1) for i in sorted(true_set)))
