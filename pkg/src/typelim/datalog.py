"""Translate a compiled terminology plus DL-safe rules into disjunctive Datalog.

The program simulates the decision diagram on every pair of named
individuals: a node predicate holds for a pair when the evaluation of the
diagram can reach that node under some admissible reading of the pair's
concept and role memberships.  Reaching the false terminal is forbidden,
which forces every pair onto an accepted domino.

Predicates are mangled to short indexed names; a structured comment header
maps every name back to the concept, role, or diagram node it stands for,
so the text format is reversible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .compiler import CompiledTBox, ConceptVar, RoleVar
from .obdd import FALSE_ID, TRUE_ID
from .syntax import (
    Concept,
    ConceptAtom,
    ConceptName,
    EqualityAtom,
    Ind,
    RoleAtom,
    Rule,
    Signature,
    Term,
    Var,
    canonicalize_rule,
    render_concept,
)


# ---------------------------------------------------------------------------
# Predicates, atoms, rules, programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConceptPred:
    concept: Concept


@dataclass(frozen=True)
class RolePred:
    name: str


@dataclass(frozen=True)
class NodePred:
    key: str  # "root", "true", "false", or a decimal index


@dataclass(frozen=True)
class EqualityPred:
    pass


EQUALITY = EqualityPred()

Pred = object  # union of the four classes above


def arity(pred: Pred) -> int:
    return 1 if isinstance(pred, ConceptPred) else 2


@dataclass(frozen=True)
class DatalogAtom:
    pred: Pred
    args: tuple[Term, ...]


@dataclass(frozen=True)
class DatalogRule:
    """Conjunctive body, disjunctive head; both may be empty."""

    body: tuple[DatalogAtom, ...]
    head: tuple[DatalogAtom, ...]


@dataclass(frozen=True)
class PredicateEntry:
    name: str
    pred: Pred
    note: str  # canonical text of the concept / role / node label


@dataclass(frozen=True)
class DatalogProgram:
    rules: tuple[DatalogRule, ...]
    constants: tuple[str, ...]
    predicates: tuple[PredicateEntry, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def name_of(self, pred: Pred) -> str:
        for entry in self.predicates:
            if entry.pred == pred:
                return entry.name
        if isinstance(pred, EqualityPred):
            return "~"
        raise KeyError(f"unknown predicate {pred!r}")

    def has_predicate(self, pred: Pred) -> bool:
        return isinstance(pred, EqualityPred) or any(e.pred == pred for e in self.predicates)

    def mentions_equality(self) -> bool:
        return any(
            isinstance(atom.pred, EqualityPred)
            for rule in self.rules
            for atom in rule.body + rule.head
        )


class _Table:
    def __init__(self) -> None:
        self.entries: list[PredicateEntry] = []
        self._names: dict[Pred, str] = {}
        self._counts = {"c": 0, "r": 0}

    def concept(self, concept: Concept) -> ConceptPred:
        pred = ConceptPred(concept)
        if pred not in self._names:
            name = f"s_c{self._counts['c']}"
            self._counts["c"] += 1
            self._names[pred] = name
            self.entries.append(PredicateEntry(name, pred, render_concept(concept)))
        return pred

    def role(self, name: str) -> RolePred:
        pred = RolePred(name)
        if pred not in self._names:
            mangled = f"s_r{self._counts['r']}"
            self._counts["r"] += 1
            self._names[pred] = mangled
            self.entries.append(PredicateEntry(mangled, pred, name))
        return pred

    def node(self, key: str, note: str) -> NodePred:
        pred = NodePred(key)
        if pred not in self._names:
            name = f"a_{key}"
            self._names[pred] = name
            self.entries.append(PredicateEntry(name, pred, note))
        return pred


_X = Var("x")
_Y = Var("y")


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _translate_atom(atom, table: _Table) -> DatalogAtom:
    if isinstance(atom, ConceptAtom):
        return DatalogAtom(table.concept(ConceptName(atom.concept)), (atom.term,))
    if isinstance(atom, RoleAtom):
        return DatalogAtom(table.role(atom.role), (atom.subject, atom.object))
    if isinstance(atom, EqualityAtom):
        return DatalogAtom(EQUALITY, (atom.left, atom.right))
    raise TypeError(f"not an atom: {atom!r}")


def emit_program(
    ct: CompiledTBox,
    rules: Sequence[Rule],
    *,
    signature: Signature | None = None,
) -> DatalogProgram:
    """Build the disjunctive Datalog program for one compiled knowledge base.

    Every DL-safe rule is translated predicate-for-predicate, with
    conjunctive heads split into one emitted rule per head atom and empty
    heads kept as constraints.  The diagram contributes a fact for the
    root, a constraint for the false terminal, and two rules per reachable
    interior node.
    """
    table = _Table()
    out: list[DatalogRule] = []
    warnings: list[str] = []

    known_concepts = set(signature.concept_names) if signature is not None else None
    for rule in rules:
        rule = canonicalize_rule(rule)
        if known_concepts is not None:
            for atom in rule.body + rule.head:
                if isinstance(atom, ConceptAtom) and atom.concept not in known_concepts:
                    warnings.append(f"rule mentions undeclared concept name {atom.concept}")
        body = tuple(_translate_atom(a, table) for a in rule.body)
        heads = tuple(_translate_atom(a, table) for a in rule.head)
        if heads:
            for head in heads:
                out.append(DatalogRule(body, (head,)))
        else:
            out.append(DatalogRule(body, ()))

    manager = ct.manager
    root_id = ct.root.node

    def node_note(node: int) -> str:
        if node == TRUE_ID:
            return "node(true)"
        if node == FALSE_ID:
            return "node(false)"
        var = ct.var_order[manager._var[node]]
        if isinstance(var, RoleVar):
            role = var.role
            return f"node(inv({role.name}))" if role.inverted else f"node({role.name})"
        return f"node({render_concept(var.concept)}, {var.side})"

    def node_key(node: int) -> str:
        if node == root_id:
            # the unsatisfiable-root case must collapse onto the terminal
            return "false" if node == FALSE_ID else ("true" if node == TRUE_ID else "root")
        if node == TRUE_ID:
            return "true"
        if node == FALSE_ID:
            return "false"
        return str(interior_ids[node])

    interior_ids: dict[int, int] = {}
    order: list[int] = []
    queue = [root_id]
    seen = {root_id}
    while queue:
        node = queue.pop(0)
        order.append(node)
        if node <= TRUE_ID:
            continue
        if node != root_id:
            interior_ids.setdefault(node, len(interior_ids))
        for child in (manager._high[node], manager._low[node]):
            if child not in seen:
                seen.add(child)
                if child > TRUE_ID:
                    interior_ids.setdefault(child, len(interior_ids))
                queue.append(child)

    root_pred = table.node(node_key(root_id), node_note(root_id))
    out.append(DatalogRule((), (DatalogAtom(root_pred, (_X, _Y)),)))
    false_pred = table.node("false", "node(false)")
    out.append(DatalogRule((DatalogAtom(false_pred, (_X, _Y)),), ()))

    for node in order:
        if node <= TRUE_ID:
            continue
        var = ct.var_order[manager._var[node]]
        here = table.node(node_key(node), node_note(node))
        high = table.node(node_key(manager._high[node]), node_note(manager._high[node]))
        low = table.node(node_key(manager._low[node]), node_note(manager._low[node]))
        here_atom = DatalogAtom(here, (_X, _Y))
        high_atom = DatalogAtom(high, (_X, _Y))
        low_atom = DatalogAtom(low, (_X, _Y))
        if isinstance(var, ConceptVar):
            test = DatalogAtom(table.concept(var.concept), (_X if var.side == 1 else _Y,))
        elif not var.role.inverted:
            test = DatalogAtom(table.role(var.role.name), (_X, _Y))
        else:
            test = DatalogAtom(table.role(var.role.name), (_Y, _X))
        out.append(DatalogRule((test, here_atom), (high_atom,)))
        out.append(DatalogRule((here_atom,), (low_atom, test)))

    if signature is not None:
        for name in sorted(signature.concept_names):
            table.concept(ConceptName(name))
        for name in sorted(signature.role_names):
            table.role(name)

    constants = sorted({
        term.name
        for rule in rules
        for atom in rule.body + rule.head
        for term in _atom_terms(atom)
        if isinstance(term, Ind)
    })
    return DatalogProgram(tuple(out), tuple(constants), tuple(table.entries), tuple(warnings))


def _atom_terms(atom) -> tuple:
    if isinstance(atom, ConceptAtom):
        return (atom.term,)
    if isinstance(atom, RoleAtom):
        return (atom.subject, atom.object)
    return (atom.left, atom.right)


# ---------------------------------------------------------------------------
# Equality axiomatization
# ---------------------------------------------------------------------------

_Z = Var("z")


def axiomatize_equality(program: DatalogProgram) -> DatalogProgram:
    """Replace built-in equality by its axioms.

    Reflexivity facts are always added (one per constant).  Symmetry,
    transitivity, and per-argument congruence rules are added only when
    the program mentions equality at all; without equality atoms the
    extra rules could never fire.
    """
    extra: list[DatalogRule] = []
    for c in program.constants:
        extra.append(DatalogRule((), (DatalogAtom(EQUALITY, (Ind(c), Ind(c))),)))
    if program.mentions_equality():
        eq = lambda s, t: DatalogAtom(EQUALITY, (s, t))  # noqa: E731
        extra.append(DatalogRule((eq(_X, _Y),), (eq(_Y, _X),)))
        extra.append(DatalogRule((eq(_X, _Y), eq(_Y, _Z)), (eq(_X, _Z),)))
        fresh = Var("w")
        for entry in program.predicates:
            pred = entry.pred
            if arity(pred) == 1:
                extra.append(DatalogRule(
                    (DatalogAtom(pred, (_X,)), eq(_X, _Y)),
                    (DatalogAtom(pred, (_Y,)),)))
            else:
                extra.append(DatalogRule(
                    (DatalogAtom(pred, (_X, _Y)), eq(_X, _Z)),
                    (DatalogAtom(pred, (_Z, _Y)),)))
                extra.append(DatalogRule(
                    (DatalogAtom(pred, (_X, _Y)), eq(_Y, fresh)),
                    (DatalogAtom(pred, (_X, fresh)),)))
    return DatalogProgram(
        program.rules + tuple(extra),
        program.constants,
        program.predicates,
        program.warnings,
    )


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _render_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name.upper()
    return term.name


def _render_datalog_atom(program: DatalogProgram, atom: DatalogAtom) -> str:
    if isinstance(atom.pred, EqualityPred):
        left, right = atom.args
        return f"{_render_term(left)} ~ {_render_term(right)}"
    args = ",".join(_render_term(t) for t in atom.args)
    return f"{program.name_of(atom.pred)}({args})"


def serialize(program: DatalogProgram) -> str:
    """Deterministic text form; see the module docstring for the layout."""
    lines = [f"%! map {e.name} = {e.note}" for e in program.predicates]
    for rule in program.rules:
        head = " | ".join(_render_datalog_atom(program, a) for a in rule.head)
        body = ", ".join(_render_datalog_atom(program, a) for a in rule.body)
        if rule.body and rule.head:
            lines.append(f"{head} :- {body}.")
        elif rule.head:
            lines.append(f"{head}.")
        else:
            lines.append(f":- {body}." if body else ":- .")
    return "\n".join(lines) + "\n"


class ProgramParseError(ValueError):
    pass


def parse_program(text: str) -> DatalogProgram:
    """Parse the text format back into a structurally equal program."""
    from .kbtext import parse_concept_text  # deferred: kbtext needs only syntax

    entries: list[PredicateEntry] = []
    by_name: dict[str, Pred] = {}
    rules: list[DatalogRule] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%!"):
            payload = line[2:].strip()
            if not payload.startswith("map "):
                raise ProgramParseError(f"unknown directive: {line}")
            name, _, note = payload[4:].partition(" = ")
            name = name.strip()
            note = note.strip()
            if name.startswith("s_c"):
                pred: Pred = ConceptPred(parse_concept_text(note))
            elif name.startswith("s_r"):
                pred = RolePred(note)
            elif name.startswith("a_"):
                pred = NodePred(name[2:])
            else:
                raise ProgramParseError(f"unrecognized predicate name: {name}")
            entries.append(PredicateEntry(name, pred, note))
            by_name[name] = pred
            continue
        if line.startswith("%"):
            continue
        if not line.endswith("."):
            raise ProgramParseError(f"rule does not end with a period: {line}")
        line = line[:-1].strip()
        if line.startswith(":-"):
            head_text, body_text = "", line[2:].strip()
        elif " :- " in line:
            head_text, body_text = line.split(" :- ", 1)
        else:
            head_text, body_text = line, ""
        head = tuple(_parse_datalog_atom(a.strip(), by_name)
                     for a in head_text.split(" | ") if a.strip())
        body = tuple(_parse_datalog_atom(a.strip(), by_name)
                     for a in _split_atoms(body_text))
        rules.append(DatalogRule(body, head))

    constants = sorted({
        t.name for rule in rules for atom in rule.body + rule.head
        for t in atom.args if isinstance(t, Ind)
    })
    return DatalogProgram(tuple(rules), tuple(constants), tuple(entries))


def _split_atoms(text: str) -> Iterator[str]:
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            chunk = "".join(current).strip()
            if chunk:
                yield chunk
            current = []
        else:
            current.append(ch)
    chunk = "".join(current).strip()
    if chunk:
        yield chunk


def _parse_term(token: str) -> Term:
    token = token.strip()
    if not token:
        raise ProgramParseError("empty term")
    if token[0].isupper():
        return Var(token.lower())
    return Ind(token)


def _parse_datalog_atom(text: str, by_name: dict[str, Pred]) -> DatalogAtom:
    if "~" in text:
        left, _, right = text.partition("~")
        return DatalogAtom(EQUALITY, (_parse_term(left), _parse_term(right)))
    name, _, rest = text.partition("(")
    name = name.strip()
    if not rest.endswith(")"):
        raise ProgramParseError(f"malformed atom: {text}")
    args = tuple(_parse_term(t) for t in rest[:-1].split(","))
    pred = by_name.get(name)
    if pred is None:
        raise ProgramParseError(f"atom uses undeclared predicate {name}")
    if len(args) != arity(pred):
        raise ProgramParseError(f"wrong arity in atom: {text}")
    return DatalogAtom(pred, args)
