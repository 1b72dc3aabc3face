"""CSP data model, the line-oriented instance format, and synthetic generators.

Instance file grammar (one declaration per line, ``#`` starts a comment)::

    name <identifier>                       # optional, first declaration
    var <name> [aux] : v1 v2 ...
    alldiff <name> <name> ...
    diseq <a> <b>
    table allowed|disallowed (<names...>) ; 1,2,3 ; 4,5,6

Declaration order is semantic: variables are searched in the order they are
declared and values in the order they are listed.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class ConstraintKind(str, enum.Enum):
    ALLDIFF = "alldiff"
    DISEQ = "diseq"
    TABLE = "table"


class InstanceError(ValueError):
    """Semantic problem with an instance (bad scope, empty domain, arity)."""

    def __init__(self, message: str, constraint_index: int | None = None):
        self.constraint_index = constraint_index
        if constraint_index is not None:
            message = f"constraint {constraint_index}: {message}"
        super().__init__(message)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[int, ...]
    is_auxiliary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(int(v) for v in self.domain))
        if not self.domain:
            raise InstanceError(f"variable {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise InstanceError(f"variable {self.name!r} has duplicate values")


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    scope: tuple[str, ...]
    tuples: tuple[tuple[int, ...], ...] = ()
    allowed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(
            self, "tuples", tuple(tuple(int(v) for v in t) for t in self.tuples)
        )

    @property
    def arity(self) -> int:
        return len(self.scope)

    def is_satisfied(self, values: Sequence[int]) -> bool:
        """Check a full assignment to the scope, given in scope order."""
        if self.kind is ConstraintKind.ALLDIFF:
            return len(set(values)) == len(values)
        if self.kind is ConstraintKind.DISEQ:
            return values[0] != values[1]
        return (tuple(values) in self.tuple_set) == self.allowed

    @property
    def tuple_set(self) -> frozenset[tuple[int, ...]]:
        # cached lazily; the dataclass is frozen so bypass __setattr__
        try:
            return self.__dict__["_tuple_set"]
        except KeyError:
            ts = frozenset(self.tuples)
            object.__setattr__(self, "_tuple_set", ts)
            return ts


@dataclass(frozen=True)
class CspInstance:
    name: str
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        index: dict[str, int] = {}
        for i, var in enumerate(self.variables):
            if var.name in index:
                raise InstanceError(f"duplicate variable name {var.name!r}")
            index[var.name] = i
        object.__setattr__(self, "_index", index)
        for ci, con in enumerate(self.constraints):
            _check_constraint(con, index, ci)

    def __hash__(self):
        return hash((self.name, self.variables, self.constraints))

    def var_index(self, name: str) -> int:
        return self._index[name]

    def scope_indices(self, constraint: Constraint) -> tuple[int, ...]:
        return tuple(self._index[n] for n in constraint.scope)

    @property
    def n_variables(self) -> int:
        return len(self.variables)


def _check_constraint(con: Constraint, index: dict[str, int], ci: int) -> None:
    for name in con.scope:
        if name not in index:
            raise InstanceError(f"unknown variable {name!r} in scope", ci)
    if len(set(con.scope)) != len(con.scope):
        raise InstanceError("repeated variable in scope", ci)
    if con.kind is ConstraintKind.DISEQ and con.arity != 2:
        raise InstanceError("diseq needs exactly 2 variables", ci)
    if con.kind is ConstraintKind.ALLDIFF and con.arity < 2:
        raise InstanceError("alldiff needs at least 2 variables", ci)
    if con.kind is ConstraintKind.TABLE:
        if con.arity < 1:
            raise InstanceError("table needs a non-empty scope", ci)
        for t in con.tuples:
            if len(t) != con.arity:
                raise InstanceError(
                    f"arity mismatch: tuple {t} has {len(t)} values, "
                    f"scope has {con.arity}",
                    ci,
                )
    elif con.tuples:
        raise InstanceError("only table constraints carry tuples", ci)


# --------------------------------------------------------------------------
# text format

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-\[\]]*\Z")
_TABLE_RE = re.compile(r"table\s+(\S+)\s*\(([^)]*)\)\s*(.*)\Z")


def parse_instance(text: str, name: str | None = None) -> CspInstance:
    """Parse the instance format; ``name`` is used when the file has none."""
    variables: list[Variable] = []
    constraints: list[Constraint] = []
    declared_name = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        col0 = len(line) - len(stripped) + 1
        keyword = stripped.split(None, 1)[0]
        rest = stripped[len(keyword):].strip()
        rest_col = col0 + (len(stripped) - len(stripped[len(keyword):].lstrip()))

        if keyword == "name":
            if declared_name is not None or variables or constraints:
                raise ParseError("'name' must be the first declaration", lineno, col0)
            _check_name(rest, lineno, rest_col)
            declared_name = rest
        elif keyword == "var":
            if ":" not in rest:
                raise ParseError("expected ':' in variable declaration", lineno, rest_col)
            head, values = rest.split(":", 1)
            head_parts = head.split()
            if not head_parts or len(head_parts) > 2:
                raise ParseError("expected 'var <name> [aux] :'", lineno, rest_col)
            if len(head_parts) == 2 and head_parts[1] != "aux":
                raise ParseError(
                    f"unexpected token {head_parts[1]!r}",
                    lineno,
                    line.index(head_parts[1], col0 - 1) + 1,
                )
            _check_name(head_parts[0], lineno, rest_col)
            dom = _parse_ints(values.split(), lineno, line.index(":", col0 - 1) + 2)
            if not dom:
                raise InstanceError(f"variable {head_parts[0]!r} has an empty domain")
            variables.append(Variable(head_parts[0], dom, len(head_parts) == 2))
        elif keyword in ("alldiff", "diseq"):
            names = rest.split()
            for n in names:
                _check_name(n, lineno, line.index(n, col0 - 1) + 1)
            constraints.append(Constraint(ConstraintKind(keyword), tuple(names)))
        elif keyword == "table":
            m = _TABLE_RE.match(stripped)
            if m is None:
                raise ParseError(
                    "expected 'table allowed|disallowed (<names>) ; tuples'",
                    lineno,
                    col0,
                )
            polarity, scope_txt, tail = m.groups()
            if polarity not in ("allowed", "disallowed"):
                raise ParseError(
                    f"unknown table polarity {polarity!r}",
                    lineno,
                    line.index(polarity, col0 - 1) + 1,
                )
            tuples = []
            tail = tail.strip()
            if tail:
                if not tail.startswith(";"):
                    raise ParseError(
                        "expected ';' before tuples", lineno, line.index(tail) + 1
                    )
                for chunk in tail[1:].split(";"):
                    chunk = chunk.strip()
                    if not chunk:
                        continue
                    col = line.index(chunk) + 1
                    tuples.append(tuple(_parse_ints(chunk.split(","), lineno, col)))
            constraints.append(
                Constraint(
                    ConstraintKind.TABLE,
                    tuple(scope_txt.split()),
                    tuple(tuples),
                    polarity == "allowed",
                )
            )
        else:
            raise ParseError(f"unknown declaration {keyword!r}", lineno, col0)

    inst_name = declared_name or name or "instance"
    return CspInstance(inst_name, tuple(variables), tuple(constraints))


def _check_name(token: str, line: int, col: int) -> None:
    if not _NAME_RE.match(token):
        raise ParseError(f"invalid name {token!r}", line, col)


def _parse_ints(tokens: Iterable[str], line: int, col: int) -> list[int]:
    out = []
    for tok in tokens:
        tok = tok.strip()
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"expected integer, got {tok!r}", line, col) from None
    return out


def serialize_instance(instance: CspInstance) -> str:
    lines = [f"name {instance.name}"]
    for var in instance.variables:
        aux = " aux" if var.is_auxiliary else ""
        lines.append(f"var {var.name}{aux} : " + " ".join(map(str, var.domain)))
    for con in instance.constraints:
        if con.kind is ConstraintKind.TABLE:
            polarity = "allowed" if con.allowed else "disallowed"
            body = "".join(" ; " + ",".join(map(str, t)) for t in con.tuples)
            lines.append(f"table {polarity} ({' '.join(con.scope)}){body}")
        else:
            lines.append(f"{con.kind.value} " + " ".join(con.scope))
    return "\n".join(lines) + "\n"


def load_instance(path) -> CspInstance:
    from pathlib import Path

    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=path.stem)


# --------------------------------------------------------------------------
# generators


class Family(str, enum.Enum):
    PIGEON_HOLE = "PigeonHole"
    LATIN_SQUARE = "LatinSquare"
    GRAPH_COLOURING = "GraphColouring"
    RANDOM_BINARY_DISEQ = "RandomBinaryDiseq"
    RANDOM_TABLE = "RandomTable"


#: inclusive size bounds per family
SIZE_BOUNDS = {
    Family.PIGEON_HOLE: (1, 12),
    Family.LATIN_SQUARE: (1, 9),
    Family.GRAPH_COLOURING: (2, 60),
    Family.RANDOM_BINARY_DISEQ: (2, 200),
    Family.RANDOM_TABLE: (2, 60),
}


def generate_instance(family: Family | str, size: int, seed: int) -> CspInstance:
    """Build a synthetic instance, deterministic in ``(family, size, seed)``.

    * ``PigeonHole(n)``: n+1 variables over ``1..n`` under one alldiff.
      Unsatisfiable. The seed only permutes the declared value order.
    * ``LatinSquare(n)``: n*n cells, one alldiff per row and per column.
      The seed relabels symbols.
    * ``GraphColouring(n)``: random graph on n vertices, disequality per edge,
      alldiff over each clique found by greedy clique cover (size >= 3).
    * ``RandomBinaryDiseq(n)``: n variables over loose domains, a sparse set of
      disequalities and a few small alldiff groups.
    * ``RandomTable(n)``: n variables over ``1..3`` with random binary and
      ternary tables; roughly a quarter of the variables are auxiliary.
    """
    family = Family(family)
    lo, hi = SIZE_BOUNDS[family]
    if not lo <= size <= hi:
        raise ValueError(f"{family.value} size must be in [{lo}, {hi}], got {size}")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    name = f"{family.value.lower()}-{size}-{seed}"
    return _GENERATORS[family](size, rng, name)


def _pigeon_hole(n, rng, name):
    values = [int(v) for v in rng.permutation(np.arange(1, n + 1))]
    variables = [Variable(f"p{i}", values) for i in range(n + 1)]
    return CspInstance(
        name,
        variables,
        [Constraint(ConstraintKind.ALLDIFF, tuple(v.name for v in variables))],
    )


def _latin_square(n, rng, name):
    symbols = [int(v) for v in rng.permutation(np.arange(1, n + 1))]
    cell = [[f"c{r}_{c}" for c in range(n)] for r in range(n)]
    variables = [Variable(cell[r][c], symbols) for r in range(n) for c in range(n)]
    constraints = []
    if n >= 2:
        for r in range(n):
            constraints.append(Constraint(ConstraintKind.ALLDIFF, tuple(cell[r])))
        for c in range(n):
            column = tuple(cell[r][c] for r in range(n))
            constraints.append(Constraint(ConstraintKind.ALLDIFF, column))
    return CspInstance(name, variables, constraints)


def _greedy_cliques(n, adj, rng):
    remaining = set(range(n))
    cliques = []
    for v in rng.permutation(n):
        v = int(v)
        if v not in remaining:
            continue
        clique = [v]
        for u in sorted(remaining - {v}):
            if all(u in adj[w] for w in clique):
                clique.append(u)
        remaining -= set(clique)
        cliques.append(sorted(clique))
    return cliques


def _graph_colouring(n, rng, name):
    p = 0.5
    adj = [set() for _ in range(n)]
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            adj[i].add(j)
            adj[j].add(i)
            edges.append((i, j))
    colours = max(2, int(round(n * 0.3)))
    variables = [Variable(f"v{i}", range(1, colours + 1)) for i in range(n)]
    constraints = []
    covered = set()
    for clique in _greedy_cliques(n, adj, rng):
        if len(clique) >= 3:
            constraints.append(
                Constraint(ConstraintKind.ALLDIFF, tuple(f"v{i}" for i in clique))
            )
            covered.update(itertools.combinations(clique, 2))
    for i, j in edges:
        if (i, j) not in covered:
            constraints.append(Constraint(ConstraintKind.DISEQ, (f"v{i}", f"v{j}")))
    return CspInstance(name, variables, constraints)


def _random_binary_diseq(n, rng, name):
    d = n + int(rng.integers(1, n + 2))
    variables = [Variable(f"x{i}", range(1, d + 1)) for i in range(n)]
    constraints = []
    group = min(n, 3)
    if n >= 2:
        for _ in range(max(1, n // 4)):
            members = sorted(int(v) for v in rng.choice(n, size=group, replace=False))
            constraints.append(
                Constraint(ConstraintKind.ALLDIFF, tuple(f"x{i}" for i in members))
            )
    p = min(1.0, 2.0 / n)
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            constraints.append(Constraint(ConstraintKind.DISEQ, (f"x{i}", f"x{j}")))
    return CspInstance(name, variables, constraints)


def _random_table(n, rng, name):
    dom = (1, 2, 3)
    n_aux = n // 4
    aux = set(int(v) for v in rng.choice(n, size=n_aux, replace=False)) if n_aux else set()
    variables = [Variable(f"t{i}", dom, i in aux) for i in range(n)]
    constraints = []
    for _ in range(n):
        arity = 2 if rng.random() < 0.6 or n < 3 else 3
        members = sorted(int(v) for v in rng.choice(n, size=arity, replace=False))
        space = list(itertools.product(dom, repeat=arity))
        keep = rng.random(len(space)) < 0.6
        tuples = tuple(t for t, k in zip(space, keep) if k)
        allowed = bool(rng.random() < 0.5)
        if not allowed:
            tuples = tuple(t for t, k in zip(space, keep) if not k)
        constraints.append(
            Constraint(
                ConstraintKind.TABLE, tuple(f"t{i}" for i in members), tuples, allowed
            )
        )
    return CspInstance(name, variables, constraints)


_GENERATORS = {
    Family.PIGEON_HOLE: _pigeon_hole,
    Family.LATIN_SQUARE: _latin_square,
    Family.GRAPH_COLOURING: _graph_colouring,
    Family.RANDOM_BINARY_DISEQ: _random_binary_diseq,
    Family.RANDOM_TABLE: _random_table,
}
