"""Binary linear programs: container, exact evaluator, LP/MPS text formats.

Coefficients are kept as exact rationals (``int`` or ``Fraction``). Rows are
stored against variable indices; names only matter at the edges
(assignments, exports).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class ModelError(ValueError):
    pass


class IncompleteAssignment(ModelError):
    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        shown = ", ".join(self.missing[:10])
        more = f" (+{len(self.missing) - 10} more)" if len(self.missing) > 10 else ""
        super().__init__(f"assignment is missing {len(self.missing)} variable(s): {shown}{more}")


def _rational(c) -> int | Fraction:
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Rational):
        f = Fraction(c)
        return f.numerator if f.denominator == 1 else f
    if isinstance(c, float):
        if not math.isfinite(c):
            raise ModelError(f"non-finite coefficient {c!r}")
        f = Fraction(c)
        return f.numerator if f.denominator == 1 else f
    raise ModelError(f"unsupported coefficient type {type(c).__name__}")


@dataclass(frozen=True)
class Constraint:
    terms: tuple[tuple[int, int | Fraction], ...]
    sense: str
    rhs: int | Fraction
    name: str = ""

    def activity(self, values: Sequence[int]) -> int | Fraction:
        return sum((c * values[i] for i, c in self.terms), 0)

    def satisfied(self, values: Sequence[int]) -> bool:
        lhs = self.activity(values)
        if self.sense == LE:
            return lhs <= self.rhs
        if self.sense == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class MilpModel:
    """Minimisation over binary variables. Immutable once built."""

    names: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, int | Fraction], ...] = ()
    index: dict[str, int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {n: i for i, n in enumerate(self.names)})

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def var(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def objective_value(self, values: Sequence[int]) -> int | Fraction:
        return sum((c * values[i] for i, c in self.objective), 0)

    def with_constraints(self, extra: Iterable[Constraint]) -> "MilpModel":
        extra = tuple(extra)
        _check_terms(self.n_vars, extra, ())
        return MilpModel(self.names, self.constraints + extra, self.objective, self.index)

    def with_objective(self, terms: Mapping[int, object] | Iterable[tuple[int, object]]) -> "MilpModel":
        obj = _merge_terms(terms.items() if isinstance(terms, Mapping) else terms)
        _check_terms(self.n_vars, (), obj)
        return MilpModel(self.names, self.constraints, obj, self.index)

    def to_values(self, assignment: Mapping[str, int]) -> list[int]:
        missing = [n for n in self.names if n not in assignment]
        if missing:
            raise IncompleteAssignment(missing)
        unknown = [n for n in assignment if n not in self.index]
        if unknown:
            raise ModelError(f"assignment references unknown variable(s): {unknown[:10]}")
        values = []
        for n in self.names:
            v = assignment[n]
            if v not in (0, 1):
                raise ModelError(f"variable {n} has non-binary value {v!r}")
            values.append(int(v))
        return values

    def to_assignment(self, values: Sequence[int]) -> dict[str, int]:
        return {n: int(v) for n, v in zip(self.names, values)}


def _merge_terms(terms: Iterable[tuple[int, object]]) -> tuple[tuple[int, int | Fraction], ...]:
    acc: dict[int, int | Fraction] = {}
    for i, c in terms:
        acc[i] = acc.get(i, 0) + _rational(c)
    return tuple((i, c) for i, c in acc.items() if c != 0)


def _check_terms(n_vars: int, constraints, objective) -> None:
    for con in constraints:
        if con.sense not in SENSES:
            raise ModelError(f"constraint {con.name!r}: bad relation {con.sense!r}")
        for i, _ in con.terms:
            if not 0 <= i < n_vars:
                raise ModelError(f"constraint {con.name!r} references undeclared variable #{i}")
    for i, _ in objective:
        if not 0 <= i < n_vars:
            raise ModelError(f"objective references undeclared variable #{i}")


def make_constraint(terms, sense: str, rhs, name: str = "") -> Constraint:
    """Build a row from ``(var_index, coef)`` pairs; repeated indices are summed."""
    if sense not in SENSES:
        raise ModelError(f"bad relation {sense!r}")
    return Constraint(_merge_terms(terms), sense, _rational(rhs), name)


class ModelBuilder:
    """Incremental construction; ``build()`` freezes into a :class:`MilpModel`."""

    def __init__(self):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        self.constraints: list[Constraint] = []
        self.objective: dict[int, int | Fraction] = {}

    def add_var(self, name: str) -> int:
        if name in self.index:
            raise ModelError(f"duplicate variable name {name!r}")
        if not _NAME_RE.match(name):
            raise ModelError(f"invalid variable name {name!r}")
        self.index[name] = len(self.names)
        self.names.append(name)
        return self.index[name]

    def add_constraint(self, terms, sense: str, rhs, name: str = "") -> Constraint:
        con = make_constraint(terms, sense, rhs, name)
        self.constraints.append(con)
        return con

    def build(self) -> MilpModel:
        obj = _merge_terms(self.objective.items())
        _check_terms(len(self.names), self.constraints, obj)
        return MilpModel(tuple(self.names), tuple(self.constraints), obj, dict(self.index))


def build(variables: Sequence[str], constraints: Iterable[tuple], objective: Mapping[str, object] | None = None) -> MilpModel:
    """Declarative construction by variable name.

    ``constraints`` holds ``(terms, sense, rhs)`` or ``(terms, sense, rhs, name)``
    tuples where ``terms`` maps variable names to coefficients.
    """
    b = ModelBuilder()
    for n in variables:
        b.add_var(n)

    def idx(name):
        if name not in b.index:
            raise ModelError(f"term references undeclared variable {name!r}")
        return b.index[name]

    for k, decl in enumerate(constraints):
        terms, sense, rhs, *rest = decl
        name = rest[0] if rest else f"c{k}"
        items = terms.items() if isinstance(terms, Mapping) else terms
        b.add_constraint([(idx(n), c) for n, c in items], sense, rhs, name)
    for n, c in (objective or {}).items():
        i = idx(n)
        b.objective[i] = b.objective.get(i, 0) + _rational(c)
    return b.build()


# -- evaluation ----------------------------------------------------------------

@dataclass
class Evaluation:
    feasible: bool
    violated: list[str]
    objective: int | Fraction


def evaluate(m: MilpModel, assignment: Mapping[str, int]) -> Evaluation:
    """Check a complete assignment by direct substitution, in exact arithmetic."""
    values = m.to_values(assignment)
    violated = [c.name or f"row{k}" for k, c in enumerate(m.constraints) if not c.satisfied(values)]
    return Evaluation(not violated, violated, m.objective_value(values))


# -- text formats ----------------------------------------------------------------

def _scale(coefs: Iterable) -> int:
    s = 1
    for c in coefs:
        if isinstance(c, Fraction):
            s = math.lcm(s, c.denominator)
    return s


def _fmt(c) -> str:
    return str(int(c))


def scaled_row(con: Constraint) -> tuple[list[tuple[int, int]], int]:
    s = _scale([c for _, c in con.terms] + [con.rhs])
    return [(i, int(c * s)) for i, c in con.terms], int(con.rhs * s)


def objective_scale(m: MilpModel) -> int:
    return _scale(c for _, c in m.objective)


def _lp_expr(names, terms) -> str:
    if not terms:
        return f"0 {names[0]}" if names else "0"
    out = []
    for k, (i, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag} "
        if k == 0:
            out.append(f"{'-' if c < 0 else ''}{coef}{names[i]}")
        else:
            out.append(f"{sign} {coef}{names[i]}")
    return " ".join(out)


def _row_names(m: MilpModel) -> list[str]:
    seen = set()
    out = []
    for k, c in enumerate(m.constraints):
        name = c.name if c.name and _NAME_RE.match(c.name) and c.name not in seen else f"R{k}"
        seen.add(name)
        out.append(name)
    return out


def export_lp(m: MilpModel, title: str = "model") -> str:
    """CPLEX LP text. Rows and objective are scaled to integer coefficients;
    the objective scale is recorded in a comment (divide solver objectives by it)."""
    names = m.names
    s = objective_scale(m)
    lines = [f"\\ {title}", f"\\ objective_scale {s}", "Minimize"]
    obj = [(i, int(c * s)) for i, c in m.objective]
    lines.append(f" obj: {_lp_expr(names, obj)}")
    lines.append("Subject To")
    for rname, con in zip(_row_names(m), m.constraints):
        terms, rhs = scaled_row(con)
        lines.append(f" {rname}: {_lp_expr(names, terms)} {con.sense} {rhs}")
    lines.append("Binary")
    for n in names:
        lines.append(f" {n}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_mps(m: MilpModel, title: str = "MODEL") -> str:
    """MPS text in the fixed column layout with integer markers.

    Names longer than 8 characters overflow the fixed fields, in which case
    readers must use their free-MPS mode (fields are whitespace separated).
    """
    names = m.names
    rnames = _row_names(m)
    s = objective_scale(m)
    kind = {LE: "L", GE: "G", EQ: "E"}
    out = [f"* objective_scale {s}", f"NAME          {title}", "ROWS", " N  OBJ"]
    for rname, con in zip(rnames, m.constraints):
        out.append(f" {kind[con.sense]}  {rname}")
    columns: list[list[tuple[str, int]]] = [[] for _ in names]
    for i, c in m.objective:
        columns[i].append(("OBJ", int(c * s)))
    rhs_entries = []
    for rname, con in zip(rnames, m.constraints):
        terms, rhs = scaled_row(con)
        for i, c in terms:
            columns[i].append((rname, c))
        if rhs != 0:
            rhs_entries.append((rname, rhs))
    out.append("COLUMNS")
    out.append("    MARKER                 'MARKER'                 'INTORG'")
    for n, col in zip(names, columns):
        if not col:
            out.append(f"    {n:<8}  {'OBJ':<8}  {0:>12}")
        for rname, c in col:
            out.append(f"    {n:<8}  {rname:<8}  {c:>12}")
    out.append("    MARKER                 'MARKER'                 'INTEND'")
    out.append("RHS")
    for rname, rhs in rhs_entries:
        out.append(f"    RHS       {rname:<8}  {rhs:>12}")
    out.append("BOUNDS")
    for n in names:
        out.append(f" BV BND       {n}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


_TERM_RE = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?)?\s*([A-Za-z_][A-Za-z0-9_.]*)")


def _parse_expr(text: str) -> list[tuple[str, Fraction]]:
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _TERM_RE.match(text, pos)
        if not mt or mt.end() == pos:
            raise ModelError(f"cannot parse LP expression near {text[pos:pos + 20]!r}")
        sign, coef, name = mt.groups()
        c = Fraction(coef) if coef else Fraction(1)
        terms.append((name, -c if sign == "-" else c))
        pos = mt.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return terms


def parse_lp(text: str) -> MilpModel:
    """Read back the LP dialect written by :func:`export_lp`."""
    section = None
    scale = Fraction(1)
    variables: list[str] = []
    obj_terms: list[tuple[str, Fraction]] = []
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "objective_scale":
                scale = Fraction(parts[1])
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "binary", "bounds", "end"):
            section = low
            continue
        if section == "minimize":
            obj_terms += _parse_expr(line.split(":", 1)[1])
        elif section == "subject to":
            name, body = line.split(":", 1)
            mt = re.match(r"(.*?)(<=|>=|=)\s*(-?\d+)\s*$", body)
            if not mt:
                raise ModelError(f"cannot parse constraint {line!r}")
            rows.append((_parse_expr(mt.group(1)), mt.group(2), Fraction(mt.group(3)), name.strip()))
        elif section == "binary":
            variables.append(line)
        elif section is None:
            raise ModelError(f"content outside a section: {line!r}")
    obj: dict[str, Fraction] = {}
    for n, c in obj_terms:
        obj[n] = obj.get(n, 0) + c / scale
    return build(variables, rows, obj)
