"""Command-line interface.

Exit codes: 0 for SAT or an entailed fact, 1 for UNSAT or a fact that is
not entailed, 2 for usage, parse, or validation problems.
"""

from __future__ import annotations

import argparse
import sys

from .compiler import ConceptVar, DominoVar, RoleVar, default_var_order
from .datalog import serialize
from .dominoes import DominoUniverse
from .errors import CapacityError, ReasoningError
from .frontend import Query, compile_pipeline, parse_kb, reason
from .kbtext import ParseError, parse_concept_text, parse_ground_atom
from .normalize import flatten
from .reduction import ReductionTrace, transform_full
from .syntax import (
    AtomicRole,
    ConceptAtom,
    EqualityAtom,
    RoleAtom,
    ValidationError,
    tbox_only,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="typelim",
        description="Knowledge base reasoning by domino type elimination, "
                    "decision diagrams, and disjunctive Datalog.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="knowledge base file")
        p.add_argument("--engine", choices=("obdd", "explicit"), default="obdd")
        p.add_argument("--var-order", default="default",
                       help="'default' or 'file:PATH' with one variable label per line")
        p.add_argument("--dump-dot", metavar="PATH",
                       help="write the final decision diagram in DOT format")
        p.add_argument("--trace", metavar="PATH",
                       help="write the reduction trace (stage TAB action TAB axiom)")

    common(sub.add_parser("sat", help="decide satisfiability"))
    entail = sub.add_parser("entail", help="decide entailment of a ground fact")
    common(entail)
    entail.add_argument("--query", required=True,
                        help="ground atom: Name(ind), role(ind,ind), or ind ~ ind")
    compile_cmd = sub.add_parser("compile", help="write the Datalog translation")
    common(compile_cmd)
    compile_cmd.add_argument("-o", "--output", metavar="PATH", help="defaults to stdout")
    common(sub.add_parser("stats", help="print pipeline statistics"))
    return parser


def _load_var_order(spec: str, kb) -> list[DominoVar] | None:
    if spec == "default":
        return None
    if not spec.startswith("file:"):
        raise ValueError("--var-order must be 'default' or 'file:PATH'")
    path = spec[len("file:"):]
    reduced = transform_full(kb)
    universe = DominoUniverse.for_flat_kb(flatten(tbox_only(reduced)))
    known = {label_text(v): v for v in default_var_order(universe)}
    order: list[DominoVar] = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line not in known:
                raise ValueError(f"unknown variable label {line!r}")
            order.append(known[line])
    return order


def label_text(var: DominoVar) -> str:
    """Stable text labels accepted by --var-order files."""
    if isinstance(var, RoleVar):
        role = var.role
        return f"role inv({role.name})" if role.inverted else f"role {role.name}"
    from .syntax import render_concept

    side = "left" if var.side == 1 else "right"
    return f"{side} {render_concept(var.concept)}"


def _parse_query(text: str) -> Query:
    atom = parse_ground_atom(text)
    if isinstance(atom, ConceptAtom):
        return Query.concept_fact(atom.concept, atom.term.name)
    if isinstance(atom, RoleAtom):
        return Query.role_fact(atom.role, atom.subject.name, atom.object.name)
    if isinstance(atom, EqualityAtom):
        return Query.same_as(atom.left.name, atom.right.name)
    raise ValueError("unsupported query atom")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        with open(args.file, encoding="utf-8") as handle:
            kb = parse_kb(handle.read())
        var_order = _load_var_order(args.var_order, kb)
        trace = ReductionTrace() if args.trace else None

        if args.command == "sat":
            verdict = reason(kb, Query.satisfiability(),
                             engine=args.engine, var_order=var_order, trace=trace)
            _side_outputs(args, kb, var_order, trace)
            print("SAT" if verdict.answer else "UNSAT")
            return 0 if verdict.answer else 1

        if args.command == "entail":
            query = _parse_query(args.query)
            verdict = reason(kb, query,
                             engine=args.engine, var_order=var_order, trace=trace)
            _side_outputs(args, kb, var_order, trace)
            print("ENTAILED" if verdict.answer else "NOT ENTAILED")
            return 0 if verdict.answer else 1

        if args.command == "compile":
            result = compile_pipeline(kb, engine=args.engine, var_order=var_order, trace=trace)
            text = serialize(result.program)
            if args.output:
                with open(args.output, "w", encoding="utf-8") as out:
                    out.write(text)
            else:
                sys.stdout.write(text)
            _side_outputs(args, kb, var_order, trace, compiled=result.compiled)
            return 0

        verdict = reason(kb, Query.satisfiability(),
                         engine=args.engine, var_order=var_order, trace=trace)
        _side_outputs(args, kb, var_order, trace)
        stats = verdict.statistics
        print(f"variables: {stats.variables}")
        print(f"obdd nodes: {stats.obdd_nodes}")
        print(f"iterations: {stats.iterations}")
        print(f"datalog rules: {stats.datalog_rules}")
        print(f"ground atoms: {stats.ground_atoms}")
        print(f"answer: {'SAT' if verdict.answer else 'UNSAT'}")
        return 0
    except (ParseError, ValidationError, ReasoningError, CapacityError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _side_outputs(args, kb, var_order, trace, compiled=None) -> None:
    if args.trace and trace is not None:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write(trace.render())
    if args.dump_dot:
        if compiled is None:
            result = compile_pipeline(kb, engine=args.engine, var_order=var_order)
            compiled = result.compiled
        with open(args.dump_dot, "w", encoding="utf-8") as handle:
            handle.write(compiled.to_dot())


if __name__ == "__main__":
    sys.exit(main())
