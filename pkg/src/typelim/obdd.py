"""Reduced ordered binary decision diagrams.

A manager owns a node store over a variable order that is fixed at
creation.  Nodes are canonical: no node has equal children, no two nodes
share (variable, low, high), and every edge goes from a smaller variable
index to a larger one (terminals sit below everything).  Function handles
are therefore equal exactly when the functions are equal.

A manager is a single-writer structure: mutating operations on one manager
must be externally serialized, while distinct managers are independent.
Evaluation and enumeration of existing handles are read-only.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Mapping

FALSE_ID = 0
TRUE_ID = 1

_BINARY_OPS: dict[str, Callable[[bool, bool], bool]] = {
    "and": lambda a, b: a and b,
    "or": lambda a, b: a or b,
    "implies": lambda a, b: (not a) or b,
    "iff": lambda a, b: a == b,
}


class DiagramManager:
    """Node store, structural-uniqueness table, and operation cache."""

    def __init__(self, num_vars: int):
        if num_vars < 0:
            raise ValueError("number of variables must be nonnegative")
        self.num_vars = num_vars
        # node id -> (var, low, high); terminals use the sentinel var num_vars
        self._var = [num_vars, num_vars]
        self._low = [FALSE_ID, TRUE_ID]
        self._high = [FALSE_ID, TRUE_ID]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple, int] = {}

    # -- construction -------------------------------------------------------

    @property
    def false(self) -> "Func":
        return Func(self, FALSE_ID)

    @property
    def true(self) -> "Func":
        return Func(self, TRUE_ID)

    def constant(self, value: bool) -> "Func":
        return self.true if value else self.false

    def variable(self, var: int) -> "Func":
        if not 0 <= var < self.num_vars:
            raise ValueError(f"unknown variable index {var}")
        return Func(self, self._node(var, FALSE_ID, TRUE_ID))

    def _node(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = node
        return node

    def clear_cache(self) -> None:
        self._cache.clear()

    # -- operations ---------------------------------------------------------

    def _check(self, *funcs: "Func") -> None:
        for f in funcs:
            if f.manager is not self:
                raise ValueError("operands belong to a different manager")

    def apply(self, op: str, f: "Func", g: "Func") -> "Func":
        """Combine two functions with and/or/implies/iff."""
        try:
            table = _BINARY_OPS[op]
        except KeyError:
            raise ValueError(f"unknown operator {op!r}") from None
        self._check(f, g)
        return Func(self, self._apply(op, table, f.node, g.node))

    def _apply(self, op: str, table, f: int, g: int) -> int:
        if f <= TRUE_ID and g <= TRUE_ID:
            return TRUE_ID if table(f == TRUE_ID, g == TRUE_ID) else FALSE_ID
        # short circuits keep the recursion shallow on easy cases
        if op == "and":
            if f == FALSE_ID or g == FALSE_ID:
                return FALSE_ID
            if f == TRUE_ID:
                return g
            if g == TRUE_ID:
                return f
            if f == g:
                return f
        elif op == "or":
            if f == TRUE_ID or g == TRUE_ID:
                return TRUE_ID
            if f == FALSE_ID:
                return g
            if g == FALSE_ID:
                return f
            if f == g:
                return f
        key = (op, f, g)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        var = min(self._var[f], self._var[g])
        f_low, f_high = (self._low[f], self._high[f]) if self._var[f] == var else (f, f)
        g_low, g_high = (self._low[g], self._high[g]) if self._var[g] == var else (g, g)
        result = self._node(var, self._apply(op, table, f_low, g_low),
                            self._apply(op, table, f_high, g_high))
        self._cache[key] = result
        return result

    def negate(self, f: "Func") -> "Func":
        self._check(f)
        return Func(self, self._negate(f.node))

    def _negate(self, f: int) -> int:
        if f == FALSE_ID:
            return TRUE_ID
        if f == TRUE_ID:
            return FALSE_ID
        key = ("not", f)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        result = self._node(self._var[f], self._negate(self._low[f]), self._negate(self._high[f]))
        self._cache[key] = result
        return result

    def quantify(self, mode: str, variables: Iterable[int], f: "Func") -> "Func":
        """Existential or universal projection over a set of variables."""
        if mode not in ("exists", "forall"):
            raise ValueError(f"unknown quantifier mode {mode!r}")
        self._check(f)
        vars_ = frozenset(variables)
        if mode == "forall":
            inner = self._quantify_exists(vars_, self._negate(f.node))
            return Func(self, self._negate(inner))
        return Func(self, self._quantify_exists(vars_, f.node))

    def _quantify_exists(self, vars_: frozenset[int], f: int) -> int:
        if f <= TRUE_ID or not vars_:
            return f
        key = ("exists", vars_, f)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        var = self._var[f]
        low = self._quantify_exists(vars_, self._low[f])
        high = self._quantify_exists(vars_, self._high[f])
        if var in vars_:
            result = self._apply("or", _BINARY_OPS["or"], low, high)
        else:
            result = self._node(var, low, high)
        self._cache[key] = result
        return result

    def rename(self, permutation: Mapping[int, int], f: "Func") -> "Func":
        """Compose a function with an involutive variable permutation.

        The result g satisfies g(V) = f(permutation(V)).  The permutation
        need not respect the variable order, so the diagram is rebuilt
        bottom-up rather than relabeled in place.
        """
        self._check(f)
        perm = dict(permutation)
        for a, b in perm.items():
            if not (0 <= a < self.num_vars and 0 <= b < self.num_vars):
                raise ValueError("permutation mentions unknown variables")
            if perm.get(b, b) != a:
                raise ValueError("permutation must be an involution")
        token = frozenset(perm.items())
        return Func(self, self._rename(token, perm, f.node))

    def _rename(self, token: frozenset, perm: dict[int, int], f: int) -> int:
        if f <= TRUE_ID:
            return f
        key = ("rename", token, f)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        var = perm.get(self._var[f], self._var[f])
        low = self._rename(token, perm, self._low[f])
        high = self._rename(token, perm, self._high[f])
        chi = self._node(var, FALSE_ID, TRUE_ID)
        table_and, table_or = _BINARY_OPS["and"], _BINARY_OPS["or"]
        result = self._apply(
            "or", table_or,
            self._apply("and", table_and, chi, high),
            self._apply("and", table_and, self._negate(chi), low),
        )
        self._cache[key] = result
        return result


class Func:
    """Handle to a Boolean function inside one manager.

    Handle equality is function equality thanks to canonicity.
    """

    __slots__ = ("manager", "node")

    def __init__(self, manager: DiagramManager, node: int):
        self.manager = manager
        self.node = node

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Func) and other.manager is self.manager and other.node == self.node

    def __hash__(self) -> int:
        return hash((id(self.manager), self.node))

    def __repr__(self) -> str:
        return f"Func(node={self.node}, vars={self.manager.num_vars})"

    # operator sugar, all delegating to the manager
    def __and__(self, other: "Func") -> "Func":
        return self.manager.apply("and", self, other)

    def __or__(self, other: "Func") -> "Func":
        return self.manager.apply("or", self, other)

    def __invert__(self) -> "Func":
        return self.manager.negate(self)

    def implies(self, other: "Func") -> "Func":
        return self.manager.apply("implies", self, other)

    def iff(self, other: "Func") -> "Func":
        return self.manager.apply("iff", self, other)

    @property
    def is_false(self) -> bool:
        return self.node == FALSE_ID

    @property
    def is_true(self) -> bool:
        return self.node == TRUE_ID

    def evaluate(self, assignment: Iterable[int]) -> bool:
        """Evaluate on the set of variables assigned true."""
        true_vars = assignment if isinstance(assignment, (set, frozenset)) else frozenset(assignment)
        m = self.manager
        node = self.node
        while node > TRUE_ID:
            node = m._high[node] if m._var[node] in true_vars else m._low[node]
        return node == TRUE_ID

    def satisfying_sets(self) -> Iterator[frozenset[int]]:
        """All satisfying variable sets, streamed in lexicographic order.

        The order treats each set as the bit string v0 v1 ... with false
        before true, and don't-care variables are expanded.
        """
        m = self.manager
        n = m.num_vars

        def rec(var: int, node: int, chosen: tuple[int, ...]) -> Iterator[frozenset[int]]:
            if var == n:
                if node == TRUE_ID:
                    yield frozenset(chosen)
                return
            if node == FALSE_ID:
                return
            if m._var[node] == var:
                yield from rec(var + 1, m._low[node], chosen)
                yield from rec(var + 1, m._high[node], chosen + (var,))
            else:
                yield from rec(var + 1, node, chosen)
                yield from rec(var + 1, node, chosen + (var,))

        return rec(0, self.node, ())

    def count_satisfying(self) -> int:
        """Number of satisfying variable sets over the full variable order."""
        m = self.manager
        cache: dict[int, int] = {FALSE_ID: 0, TRUE_ID: 1}

        def count(node: int) -> int:
            cached = cache.get(node)
            if cached is not None:
                return cached
            var = m._var[node]
            total = 0
            for child in (m._low[node], m._high[node]):
                total += count(child) << (m._var[child] - var - 1)
            cache[node] = total
            return total

        # variables above the root (and above num_vars for terminals) are free
        return count(self.node) << m._var[self.node]

    def node_count(self) -> int:
        """Number of distinct nodes reachable from this handle, terminals included."""
        return len(self._reachable())

    def _reachable(self) -> list[int]:
        m = self.manager
        seen: set[int] = set()
        order: list[int] = []
        stack = [self.node]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            order.append(node)
            if node > TRUE_ID:
                stack.append(m._high[node])
                stack.append(m._low[node])
        return order

    def audit(self) -> None:
        """Verify orderedness and reducedness of the reachable subgraph."""
        m = self.manager
        for node in self._reachable():
            if node <= TRUE_ID:
                continue
            var, low, high = m._var[node], m._low[node], m._high[node]
            if low == high:
                raise AssertionError(f"node {node} is redundant")
            if not (var < m._var[low] and var < m._var[high]):
                raise AssertionError(f"node {node} violates the variable order")

    def to_dot(self, label_of: Callable[[int], str] | None = None) -> str:
        """GraphViz rendering: solid edges to high children, dashed to low."""
        m = self.manager
        label_of = label_of or (lambda v: f"v{v}")
        lines = ["digraph obdd {"]
        reachable = sorted(self._reachable())
        for node in reachable:
            if node == FALSE_ID:
                lines.append('  n0 [shape=box, label="0"];')
            elif node == TRUE_ID:
                lines.append('  n1 [shape=box, label="1"];')
            else:
                lines.append(f'  n{node} [shape=ellipse, label="{label_of(m._var[node])}"];')
        for node in reachable:
            if node > TRUE_ID:
                lines.append(f"  n{node} -> n{m._high[node]} [style=solid];")
                lines.append(f"  n{node} -> n{m._low[node]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def is_equal(f: Func, g: Func) -> bool:
    """Function equality; constant time by canonicity."""
    if f.manager is not g.manager:
        raise ValueError("operands belong to a different manager")
    return f.node == g.node
