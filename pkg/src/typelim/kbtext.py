"""Line-oriented functional-style text format for knowledge bases.

Statements wrap axioms, assertions, and DL-safe rules; ``#`` starts a
comment.  Assertions desugar into rules: a concept or role assertion
becomes a rule with an empty (vacuously true) body, and equality
statements likewise.  Individual names must start with a lowercase letter
so the Datalog text format can tell constants from variables, and the
``__`` prefix is reserved for generated names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .syntax import (
    And,
    AtLeast,
    AtMost,
    AtomicRole,
    BOTTOM,
    Concept,
    ConceptAtom,
    EqualityAtom,
    Gci,
    Ind,
    KnowledgeBase,
    Not,
    Or,
    RoleAnd,
    RoleAtom,
    RoleExpr,
    RoleInclusion,
    RoleNot,
    RoleOr,
    Rule,
    TOP,
    Term,
    Transitivity,
    Var,
    Exists,
    ForAll,
)

MAX_COUNT = 64

_CONCEPT_KEYWORDS = {"Top", "Bottom", "not", "and", "or", "some", "all", "atleast", "atmost", "inv"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    kind: str  # "name", "number", "punct", "variable"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    column = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            column = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            column += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "(),":
            tokens.append(_Token("punct", ch, line, column))
            i += 1
            column += 1
            continue
        if ch == "~":
            tokens.append(_Token("punct", "~", line, column))
            i += 1
            column += 1
            continue
        if text.startswith("->", i):
            tokens.append(_Token("punct", "->", line, column))
            i += 2
            column += 2
            continue
        if ch == "?":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                raise ParseError("expected a variable name after '?'", line, column)
            tokens.append(_Token("variable", text[i + 1:j], line, column))
            column += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], line, column))
            column += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], line, column))
            column += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, column)
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], max_count: int):
        self.tokens = tokens
        self.pos = 0
        self.max_count = max_count

    # -- token helpers -------------------------------------------------------

    def _fail(self, message: str) -> ParseError:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            return ParseError(message, tok.line, tok.column)
        last = self.tokens[-1] if self.tokens else _Token("punct", "", 1, 1)
        return ParseError(message + " (at end of input)", last.line, last.column)

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> _Token:
        if self.at_end():
            raise self._fail("unexpected end of input")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            raise self._fail(f"expected {text!r}")
        return self.take()

    def name(self, what: str) -> str:
        tok = self.peek()
        if tok is None or tok.kind != "name":
            raise self._fail(f"expected a {what} name")
        if tok.text.startswith("__"):
            raise self._fail(f"the reserved prefix '__' may not appear in {what} names")
        return self.take().text

    # -- statements ----------------------------------------------------------

    def statements(self) -> Iterator[tuple]:
        while not self.at_end():
            tok = self.take()
            if tok.kind != "name":
                raise ParseError("expected a statement keyword", tok.line, tok.column)
            yield self.statement(tok.text, tok)

    def statement(self, keyword: str, tok: _Token):
        self.expect("(")
        if keyword == "SubClassOf":
            lhs = self.concept()
            self.expect(",")
            rhs = self.concept()
            self.expect(")")
            # the pipeline works on universally valid concepts
            if lhs == TOP:
                return ("axiom", Gci(TOP, rhs))
            return ("axiom", Gci(TOP, Or(Not(lhs), rhs)))
        if keyword == "Valid":
            c = self.concept()
            self.expect(")")
            return ("axiom", Gci(TOP, c))
        if keyword == "SubRoleOf":
            sub = self.role()
            self.expect(",")
            sup = self.role()
            self.expect(")")
            return ("rbox", RoleInclusion(sub, sup))
        if keyword == "Transitive":
            role = self.name("role")
            self.expect(")")
            return ("rbox", Transitivity(AtomicRole(role)))
        if keyword == "ConceptAssertion":
            concept = self.name("concept")
            self.expect(",")
            ind = self.individual()
            self.expect(")")
            return ("rule", Rule((), (ConceptAtom(concept, ind),)))
        if keyword == "RoleAssertion":
            role = self.name("role")
            self.expect(",")
            first = self.individual()
            self.expect(",")
            second = self.individual()
            self.expect(")")
            return ("rule", Rule((), (RoleAtom(role, first, second),)))
        if keyword == "SameAs":
            first = self.individual()
            self.expect(",")
            second = self.individual()
            self.expect(")")
            return ("rule", Rule((), (EqualityAtom(first, second),)))
        if keyword == "Rule":
            body = self.atoms(stop="->")
            self.expect("->")
            head = self.atoms(stop=")")
            self.expect(")")
            return ("rule", Rule(tuple(body), tuple(head)))
        raise ParseError(f"unknown statement {keyword!r}", tok.line, tok.column)

    # -- concepts and roles --------------------------------------------------

    def concept(self) -> Concept:
        tok = self.peek()
        if tok is None:
            raise self._fail("expected a concept")
        if tok.text == "Top":
            self.take()
            return TOP
        if tok.text == "Bottom":
            self.take()
            return BOTTOM
        if tok.text == "not":
            self.take()
            self.expect("(")
            inner = self.concept()
            self.expect(")")
            return Not(inner)
        if tok.text in ("and", "or"):
            self.take()
            self.expect("(")
            items = [self.concept()]
            while self.peek() is not None and self.peek().text == ",":
                self.take()
                items.append(self.concept())
            self.expect(")")
            if len(items) < 2:
                raise self._fail(f"{tok.text} needs at least two operands")
            combine = And if tok.text == "and" else Or
            out = items[0]
            for item in items[1:]:
                out = combine(out, item)
            return out
        if tok.text in ("some", "all"):
            self.take()
            self.expect("(")
            role = self.role()
            self.expect(",")
            filler = self.concept()
            self.expect(")")
            return Exists(role, filler) if tok.text == "some" else ForAll(role, filler)
        if tok.text in ("atleast", "atmost"):
            self.take()
            self.expect("(")
            bound = self.number()
            self.expect(",")
            role = self.role()
            self.expect(",")
            filler = self.concept()
            self.expect(")")
            if tok.text == "atleast":
                # a zero lower bound holds everywhere
                return TOP if bound == 0 else AtLeast(bound, role, filler)
            return AtMost(bound, role, filler)
        return ConceptName(self.name("concept"))

    def role(self) -> RoleExpr:
        tok = self.peek()
        if tok is None:
            raise self._fail("expected a role")
        if tok.text == "inv":
            self.take()
            self.expect("(")
            name = self.name("role")
            self.expect(")")
            return AtomicRole(name, True)
        if tok.text == "not":
            self.take()
            self.expect("(")
            inner = self.role()
            self.expect(")")
            return RoleNot(inner)
        if tok.text in ("and", "or"):
            kind = tok.text
            self.take()
            self.expect("(")
            items = [self.role()]
            while self.peek() is not None and self.peek().text == ",":
                self.take()
                items.append(self.role())
            self.expect(")")
            if len(items) < 2:
                raise self._fail(f"{kind} needs at least two operands")
            combine = RoleAnd if kind == "and" else RoleOr
            out = items[0]
            for item in items[1:]:
                out = combine(out, item)
            return out
        return AtomicRole(self.name("role"))

    def number(self) -> int:
        tok = self.peek()
        if tok is None or tok.kind != "number":
            raise self._fail("expected a number")
        self.take()
        value = int(tok.text)
        if value > self.max_count:
            raise ParseError(
                f"count {value} exceeds the configured cap {self.max_count}",
                tok.line, tok.column)
        return value

    # -- rule atoms ----------------------------------------------------------

    def individual(self) -> Ind:
        tok = self.peek()
        name = self.name("individual")
        if not name[0].islower():
            raise ParseError(
                f"individual name {name!r} must start with a lowercase letter",
                tok.line, tok.column)
        return Ind(name)

    def term(self) -> Term:
        tok = self.peek()
        if tok is not None and tok.kind == "variable":
            self.take()
            return Var(tok.text)
        return self.individual()

    def atoms(self, stop: str) -> list:
        out = []
        while True:
            tok = self.peek()
            if tok is None:
                raise self._fail(f"expected {stop!r}")
            if tok.text == stop:
                return out
            out.append(self.atom())
            tok = self.peek()
            if tok is not None and tok.text == ",":
                self.take()
                continue
        return out

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise self._fail("expected an atom")
        if tok.kind in ("variable",) or (tok.kind == "name" and self._peek_next_text() == "~"):
            left = self.term()
            self.expect("~")
            right = self.term()
            return EqualityAtom(left, right)
        if tok.kind != "name":
            raise self._fail("expected an atom")
        if tok.text in _CONCEPT_KEYWORDS:
            raise ParseError(f"{tok.text!r} is reserved and cannot be a predicate",
                             tok.line, tok.column)
        name = self.take().text
        if name.startswith("__"):
            raise ParseError("the reserved prefix '__' may not appear in predicates",
                             tok.line, tok.column)
        self.expect("(")
        first = self.term()
        tok2 = self.peek()
        if tok2 is not None and tok2.text == ",":
            self.take()
            second = self.term()
            self.expect(")")
            return RoleAtom(name, first, second)
        self.expect(")")
        return ConceptAtom(name, first)

    def _peek_next_text(self) -> str | None:
        if self.pos + 1 < len(self.tokens):
            return self.tokens[self.pos + 1].text
        return None


def parse_kb(text: str, *, max_count: int = MAX_COUNT) -> KnowledgeBase:
    """Parse the knowledge base text format.

    Counting bounds are rejected above ``max_count`` because every later
    transformation expands them into that many fresh names.
    """
    parser = _Parser(_tokenize(text), max_count)
    tbox = []
    rbox = []
    rules = []
    for kind, item in parser.statements():
        if kind == "axiom":
            tbox.append(item)
        elif kind == "rbox":
            rbox.append(item)
        else:
            rules.append(item)
    return KnowledgeBase.make(tbox, rbox, rules)


def parse_concept_text(text: str, *, max_count: int = MAX_COUNT) -> Concept:
    """Parse a single concept expression (used by the program header map)."""
    parser = _Parser(_tokenize(text), max_count)
    # generated names are legal here: the text comes from our own renderer
    parser.name = lambda what: parser.take().text  # type: ignore[method-assign]
    concept = parser.concept()
    if not parser.at_end():
        raise parser._fail("trailing input after concept")
    return concept


def parse_ground_atom(text: str):
    """Parse a ground query atom: C(a), r(a, b), or a ~ b."""
    parser = _Parser(_tokenize(text), MAX_COUNT)
    atom = parser.atom()
    if not parser.at_end():
        raise parser._fail("trailing input after atom")
    for term in (atom.term,) if isinstance(atom, ConceptAtom) else (
            (atom.subject, atom.object) if isinstance(atom, RoleAtom)
            else (atom.left, atom.right)):
        if isinstance(term, Var):
            raise ParseError("query atoms must be ground", 1, 1)
    return atom
