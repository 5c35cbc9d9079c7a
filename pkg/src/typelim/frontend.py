"""End-to-end reasoning facade.

The pipeline validates the knowledge base, reduces it to the counting-free
core, compiles the terminology into a decision diagram (or, with the
explicit engine, runs the set-based elimination and encodes its result),
translates diagram plus rules into disjunctive Datalog, and grounds the
program over the named individuals.

Satisfiability of a base without individuals is decided by the compiled
function alone; with individuals the ground program is authoritative and
an unsatisfiable function short-circuits it.  Fact queries are answered by
cautious entailment over the ground program.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import solver
from .compiler import CompiledTBox, compile_domino_set, fixpoint_compile
from .datalog import (
    ConceptPred,
    DatalogProgram,
    EQUALITY,
    RolePred,
    axiomatize_equality,
    emit_program,
)
from .dominoes import canonical_domino_set
from .errors import ReasoningError
from .kbtext import parse_kb  # re-exported: the facade owns the text format
from .normalize import flatten
from .reduction import ReductionTrace, transform_full
from .solver import GroundAtom
from .syntax import ConceptName, KnowledgeBase, tbox_only

__all__ = [
    "Query",
    "Verdict",
    "Statistics",
    "parse_kb",
    "reason",
    "ReductionTrace",
]


@dataclass(frozen=True)
class Query:
    """What to ask: plain satisfiability or a ground fact."""

    kind: str  # "satisfiability", "concept", "role", "same"
    concept: str | None = None
    role: str | None = None
    individuals: tuple[str, ...] = ()

    @staticmethod
    def satisfiability() -> "Query":
        return Query("satisfiability")

    @staticmethod
    def concept_fact(concept: str, individual: str) -> "Query":
        return Query("concept", concept=concept, individuals=(individual,))

    @staticmethod
    def role_fact(role: str, subject: str, object: str) -> "Query":
        return Query("role", role=role, individuals=(subject, object))

    @staticmethod
    def same_as(left: str, right: str) -> "Query":
        return Query("same", individuals=(left, right))


@dataclass(frozen=True)
class Statistics:
    variables: int
    obdd_nodes: int
    iterations: int
    datalog_rules: int
    ground_atoms: int


@dataclass(frozen=True)
class Verdict:
    """Answer plus the sizes of everything the pipeline built."""

    answer: bool
    statistics: Statistics

    @property
    def satisfiable(self) -> bool:
        return self.answer


@dataclass(frozen=True)
class PipelineResult:
    """Intermediate artifacts, for tools that need more than the verdict."""

    reduced: KnowledgeBase
    compiled: CompiledTBox
    program: DatalogProgram


def _check_query(kb: KnowledgeBase, query: Query) -> None:
    sig = kb.signature
    for name in query.individuals:
        if name not in sig.individual_names:
            raise ReasoningError(f"unknown individual {name!r}")
    if query.kind == "concept" and query.concept not in sig.concept_names:
        raise ReasoningError(f"unknown concept name {query.concept!r}")
    if query.kind == "role" and query.role not in sig.role_names:
        raise ReasoningError(f"unknown role name {query.role!r}")


def compile_pipeline(
    kb: KnowledgeBase,
    *,
    engine: str = "obdd",
    var_order=None,
    trace: ReductionTrace | None = None,
) -> PipelineResult:
    """Reduce, compile, and translate; no grounding yet."""
    if engine not in ("obdd", "explicit"):
        raise ValueError(f"unknown engine {engine!r}")
    reduced = transform_full(kb, trace)
    terminology = tbox_only(reduced)
    if engine == "obdd":
        compiled = fixpoint_compile(terminology, var_order=var_order)
    else:
        dominoes = canonical_domino_set(terminology)
        compiled = compile_domino_set(dominoes, flatten(terminology), var_order=var_order)
    program = emit_program(compiled, reduced.rules, signature=reduced.signature)
    return PipelineResult(reduced, compiled, program)


def _query_atom(program: DatalogProgram, query: Query) -> GroundAtom:
    if query.kind == "concept":
        return GroundAtom(ConceptPred(ConceptName(query.concept)), query.individuals)
    if query.kind == "role":
        return GroundAtom(RolePred(query.role), query.individuals)
    return GroundAtom(EQUALITY, query.individuals)


def reason(
    kb: KnowledgeBase,
    query: Query,
    *,
    engine: str = "obdd",
    var_order=None,
    trace: ReductionTrace | None = None,
    short_circuit: bool = True,
) -> Verdict:
    """Decide satisfiability or cautious ground entailment.

    ``short_circuit`` skips the Datalog stage when the compiled function
    is already unsatisfiable; disabling it exercises the full path (the
    ground program must then agree, which the tests assert).
    """
    _check_query(kb, query)
    result = compile_pipeline(kb, engine=engine, var_order=var_order, trace=trace)
    compiled = result.compiled
    program = result.program

    ground_atoms = 0
    tbox_unsat = compiled.root.is_false
    if query.kind == "satisfiability":
        if tbox_unsat and short_circuit:
            answer = False
        elif not program.constants:
            # an empty grounding is vacuously satisfiable; the compiled
            # function already is the whole story
            answer = not tbox_unsat
        else:
            grounding = solver.ground(axiomatize_equality(program))
            ground_atoms = len(grounding.atoms)
            answer = solver.is_satisfiable(grounding)
    else:
        if tbox_unsat and short_circuit:
            answer = True  # everything follows from an inconsistent base
        else:
            atom = _query_atom(program, query)
            if not all(c in program.constants for c in atom.args):
                # individuals that no rule mentions are unconstrained
                answer = False
            else:
                grounding = solver.ground(axiomatize_equality(program))
                ground_atoms = len(grounding.atoms)
                answer = solver.entailed_in_grounding(grounding, atom)

    stats = Statistics(
        variables=len(compiled.var_order),
        obdd_nodes=compiled.root.node_count(),
        iterations=compiled.iteration_count,
        datalog_rules=len(program.rules),
        ground_atoms=ground_atoms,
    )
    return Verdict(answer, stats)
