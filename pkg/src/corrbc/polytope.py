"""
Exact linear-inequality systems over named variables: canonical rows,
Fourier-Motzkin elimination, feasibility and redundancy removal.

Rows have the form ``sum_i a_i x_i  REL  b`` with REL one of ``<=``, ``<``,
``=`` and rational a_i, b. ``>=`` / ``>`` inputs are negated on construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .lp import linprog_exact

LE, LT, EQ = "<=", "<", "="
_FLIP = {">=": LE, ">": LT}
_REL_ORDER = {EQ: 0, LE: 1, LT: 2}


class PolytopeError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class LinIneq:
    """
    One canonical row. Use :meth:`make` rather than the constructor.

    Canonical form: integer coefficients and constant with gcd 1, names in
    lexicographic order, no zero coefficients. Inequalities are scaled by a
    positive factor only; equalities have a positive leading coefficient.
    """

    coeffs: tuple[tuple[str, Fraction], ...]
    rel: str
    const: Fraction

    @classmethod
    def make(cls, coeffs: Mapping[str, object], rel: str, const=0) -> "LinIneq":
        c = {k: Fraction(v) for k, v in coeffs.items() if Fraction(v) != 0}
        b = Fraction(const)
        if rel in _FLIP:
            c = {k: -v for k, v in c.items()}
            b = -b
            rel = _FLIP[rel]
        if rel not in _REL_ORDER:
            raise PolytopeError(f"unknown relation {rel!r}")
        vals = list(c.values()) + [b]
        den = 1
        for v in vals:
            den = _lcm(den, v.denominator)
        nums = [int(v * den) for v in vals]
        g = 0
        for v in nums:
            g = math.gcd(g, abs(v))
        if g == 0:
            g = 1
        scale = Fraction(den, g)
        names = sorted(c)
        if rel == EQ and names and c[names[0]] < 0:
            scale = -scale
        if not names:
            # constant rows: keep only the sign information
            b = Fraction((b > 0) - (b < 0))
            scale = Fraction(1)
        return cls(tuple((n, c[n] * scale) for n in names), rel, b * scale)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coeffs)

    def coef(self, name: str) -> Fraction:
        for n, v in self.coeffs:
            if n == name:
                return v
        return Fraction(0)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    @property
    def strict(self) -> bool:
        return self.rel == LT

    def is_trivial(self) -> bool:
        """True for constant rows that always hold."""
        if self.coeffs:
            return False
        if self.rel == EQ:
            return self.const == 0
        if self.rel == LE:
            return self.const >= 0
        return self.const > 0

    def is_contradiction(self) -> bool:
        return not self.coeffs and not self.is_trivial()

    def holds(self, point: Mapping[str, object]) -> bool:
        lhs = sum((v * Fraction(point[n]) for n, v in self.coeffs), Fraction(0))
        if self.rel == EQ:
            return lhs == self.const
        if self.rel == LE:
            return lhs <= self.const
        return lhs < self.const

    def slack(self, point: Mapping[str, float]) -> float:
        """b - a.x evaluated in floating point."""
        return float(self.const) - sum(float(v) * float(point[n]) for n, v in self.coeffs)

    def sort_key(self):
        return (_REL_ORDER[self.rel], self.coeffs, self.const)

    def __str__(self):
        return format_row(self)


def _fmt_num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _fmt_terms(terms: Sequence[tuple[str, Fraction]], const: Fraction = Fraction(0)) -> str:
    parts = []
    for n, v in terms:
        mag = abs(v)
        body = n if mag == 1 else f"{_fmt_num(mag)}*{n}"
        parts.append(("- " if v < 0 else "+ ") + body)
    if const != 0 or not parts:
        parts.append(("- " if const < 0 else "+ ") + _fmt_num(abs(const)))
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def format_row(row: LinIneq, left: Iterable[str] | None = None,
               order: Sequence[str] | None = None) -> str:
    """
    Render a row. Variables in `left` stay on the left-hand side and all
    others move to the right; by default everything stays on the left.
    """
    pos = {n: i for i, n in enumerate(order)} if order else {}
    terms = sorted(row.coeffs, key=lambda t: (pos.get(t[0], len(pos)), t[0]))
    if left is None:
        return f"{_fmt_terms(terms)} {row.rel} {_fmt_num(row.const)}"
    left = set(left)
    lhs = [(n, v) for n, v in terms if n in left]
    rhs = [(n, -v) for n, v in terms if n not in left]
    return f"{_fmt_terms(lhs)} {row.rel} {_fmt_terms(rhs, row.const)}"


@dataclass(frozen=True)
class LinSystem:
    variables: tuple[str, ...]
    rows: tuple[LinIneq, ...]

    @classmethod
    def make(cls, rows: Iterable[LinIneq], variables: Sequence[str] | None = None) -> "LinSystem":
        """Canonical system: trivial rows dropped, duplicates removed, rows sorted."""
        uniq = {r for r in rows if not r.is_trivial()}
        rows = tuple(sorted(uniq, key=LinIneq.sort_key))
        used = set()
        for r in rows:
            used.update(r.variables)
        if variables is None:
            variables = tuple(sorted(used))
        else:
            variables = tuple(variables)
            missing = used - set(variables)
            if missing:
                raise PolytopeError(f"rows use undeclared variables {sorted(missing)}")
        return cls(variables, rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def with_rows(self, rows: Iterable[LinIneq]) -> "LinSystem":
        return LinSystem.make(rows, self.variables)

    def holds(self, point: Mapping[str, object]) -> bool:
        return all(r.holds(point) for r in self.rows)

    def format(self, left: Iterable[str] | None = None) -> str:
        return "\n".join(format_row(r, left, self.variables) for r in self.rows)


# ---------------------------------------------------------------------------
# text format

_NAME = r"[A-Za-z][A-Za-z0-9_]*"
_TERM_RE = re.compile(
    rf"\s*([+-])?\s*(?:(\d+\.\d*|\.\d+|\d+(?:/\d+)?)\s*\*?\s*)?({_NAME})?\s*")
_REL_RE = re.compile(r"(<=|>=|<|>|=)")


def _parse_linear(text: str) -> tuple[dict[str, Fraction], Fraction]:
    text = text.strip()
    if not text:
        raise PolytopeError("empty side in inequality")
    coeffs: dict[str, Fraction] = {}
    const = Fraction(0)
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise PolytopeError(f"cannot parse {text[pos:]!r}")
        sign, num, name = m.groups()
        if sign is None and not first:
            raise PolytopeError(f"missing operator before {text[m.start():]!r}")
        if num is None and name is None:
            raise PolytopeError(f"dangling sign in {text!r}")
        v = Fraction(num) if num else Fraction(1)
        if sign == "-":
            v = -v
        if name:
            coeffs[name] = coeffs.get(name, Fraction(0)) + v
        else:
            const += v
        pos = m.end()
        first = False
    return coeffs, const


def parse_row(line: str) -> LinIneq:
    """Parse ``3*v1 - 2*v2 + r0 <= 5/2``; both sides may carry terms."""
    parts = _REL_RE.split(line)
    if len(parts) != 3:
        raise PolytopeError(f"expected exactly one relation in {line!r}")
    lhs, rel, rhs = parts
    lc, lk = _parse_linear(lhs)
    rc, rk = _parse_linear(rhs)
    for n, v in rc.items():
        lc[n] = lc.get(n, Fraction(0)) - v
    return LinIneq.make(lc, rel, rk - lk)


def parse_system(text: str, variables: Sequence[str] | None = None) -> LinSystem:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(parse_row(line))
    return LinSystem.make(rows, variables)


# ---------------------------------------------------------------------------
# Fourier-Motzkin

def _combine(p: LinIneq, n: LinIneq, var: str) -> LinIneq:
    """Positive combination of an upper bound p and a lower bound n on `var`."""
    a, b = p.coef(var), -n.coef(var)
    d: dict[str, Fraction] = {}
    for name, v in p.coeffs:
        d[name] = d.get(name, Fraction(0)) + b * v
    for name, v in n.coeffs:
        d[name] = d.get(name, Fraction(0)) + a * v
    d.pop(var, None)
    rel = LT if (p.strict or n.strict) else LE
    return LinIneq.make(d, rel, b * p.const + a * n.const)


def _substitute(row: LinIneq, eq: LinIneq, var: str) -> LinIneq:
    a, e = row.coef(var), eq.coef(var)
    d = row.as_dict()
    k = a / e
    for name, v in eq.coeffs:
        d[name] = d.get(name, Fraction(0)) - k * v
    d.pop(var, None)
    return LinIneq.make(d, row.rel, row.const - k * eq.const)


def fm_eliminate(system: LinSystem, var: str) -> LinSystem:
    """Project out `var`; the result describes exactly the projection."""
    if var not in system.variables:
        raise PolytopeError(f"unknown variable {var!r}")
    remaining = tuple(v for v in system.variables if v != var)
    with_var = [r for r in system.rows if r.coef(var) != 0]
    keep = [r for r in system.rows if r.coef(var) == 0]
    eqs = [r for r in with_var if r.rel == EQ]
    if eqs:
        pivot = eqs[0]
        out = keep + [_substitute(r, pivot, var) for r in with_var if r is not pivot]
        return LinSystem.make(out, remaining)
    upper = [r for r in with_var if r.coef(var) > 0]
    lower = [r for r in with_var if r.coef(var) < 0]
    out = keep + [_combine(p, n, var) for p in upper for n in lower]
    return LinSystem.make(out, remaining)


def eliminate_all(system: LinSystem, order: Sequence[str]) -> LinSystem:
    if len(set(order)) != len(order):
        raise PolytopeError("elimination order repeats a variable")
    for v in order:
        if v not in system.variables:
            raise PolytopeError(f"unknown variable {v!r}")
    for v in order:
        system = fm_eliminate(system, v)
    return system


# ---------------------------------------------------------------------------
# feasibility and redundancy

@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: dict[str, Fraction] | None = None
    # row multipliers (aligned with `rows`) proving infeasibility:
    # u >= 0 on inequalities, sum u_i a_i = 0, and either u.b < 0 or
    # u.b = 0 with positive weight on some strict row
    certificate: tuple[Fraction, ...] | None = None
    rows: tuple[LinIneq, ...] = ()

    def __bool__(self):
        return self.feasible


def check_certificate(rows: Sequence[LinIneq], u: Sequence[Fraction]) -> bool:
    if len(rows) != len(u):
        return False
    total: dict[str, Fraction] = {}
    for r, w in zip(rows, u):
        if r.rel != EQ and w < 0:
            return False
        for n, v in r.coeffs:
            total[n] = total.get(n, Fraction(0)) + w * v
    if any(v != 0 for v in total.values()):
        return False
    rhs = sum((w * r.const for r, w in zip(rows, u)), Fraction(0))
    if rhs < 0:
        return True
    return rhs == 0 and any(r.strict and w > 0 for r, w in zip(rows, u))


def _lp_matrices(rows: Sequence[LinIneq], names: Sequence[str], t_rows: Iterable[int] = ()):
    """ub/eq matrices; rows listed in `t_rows` get a +1 coefficient on an extra column."""
    t_rows = set(t_rows)
    col = {n: i for i, n in enumerate(names)}
    width = len(names) + (1 if t_rows else 0)
    A_ub, b_ub, A_eq, b_eq, ub_idx, eq_idx = [], [], [], [], [], []
    for i, r in enumerate(rows):
        a = [Fraction(0)] * width
        for n, v in r.coeffs:
            a[col[n]] = v
        if i in t_rows:
            a[-1] = Fraction(1)
        if r.rel == EQ:
            A_eq.append(a)
            b_eq.append(r.const)
            eq_idx.append(i)
        else:
            A_ub.append(a)
            b_ub.append(r.const)
            ub_idx.append(i)
    return A_ub, b_ub, A_eq, b_eq, ub_idx, eq_idx


def is_feasible(system: LinSystem | Sequence[LinIneq]) -> Feasibility:
    """
    Exact feasibility. The closed relaxation is tested first; if it is
    feasible and strict rows exist, a slack t on the strict rows is
    maximised (capped at 1) and the system is feasible iff t* > 0.
    """
    rows = tuple(system.rows if isinstance(system, LinSystem) else system)
    for i, r in enumerate(rows):
        if r.is_contradiction():
            u = tuple(Fraction(int(j == i)) for j in range(len(rows)))
            return Feasibility(False, certificate=u, rows=rows)
    names = sorted({n for r in rows for n in r.variables})
    A_ub, b_ub, A_eq, b_eq, ub_idx, eq_idx = _lp_matrices(rows, names)
    res = linprog_exact([0] * len(names), A_ub, b_ub, A_eq, b_eq,
                        free=[True] * len(names))
    if res.status == "infeasible":
        u = [Fraction(0)] * len(rows)
        for k, i in enumerate(ub_idx + eq_idx):
            u[i] = res.multipliers[k]
        return Feasibility(False, certificate=tuple(u), rows=rows)
    strict = [i for i, r in enumerate(rows) if r.strict]
    if not strict:
        return Feasibility(True, witness=dict(zip(names, res.x)), rows=rows)
    A_ub, b_ub, A_eq, b_eq, ub_idx, eq_idx = _lp_matrices(rows, names, strict)
    cap = [Fraction(0)] * len(names) + [Fraction(1)]
    A_ub.append(cap)
    b_ub.append(Fraction(1))
    res = linprog_exact([0] * len(names) + [1], A_ub, b_ub, A_eq, b_eq,
                        free=[True] * len(names) + [False], maximize=True)
    if res.objective > 0:
        return Feasibility(True, witness=dict(zip(names, res.x[:-1])), rows=rows)
    # t* = 0 leaves the cap slack, so its dual is zero and is skipped here
    mult = res.multipliers[:len(ub_idx)] + res.multipliers[len(ub_idx) + 1:]
    u = [Fraction(0)] * len(rows)
    for k, i in enumerate(ub_idx + eq_idx):
        u[i] = mult[k]
    return Feasibility(False, certificate=tuple(u), rows=rows)


def _negation(row: LinIneq) -> list[LinIneq]:
    """Rows whose disjunction is the complement of `row`."""
    d = row.as_dict()
    if row.rel == LE:
        return [LinIneq.make(d, ">", row.const)]
    if row.rel == LT:
        return [LinIneq.make(d, ">=", row.const)]
    return [LinIneq.make(d, "<", row.const), LinIneq.make(d, ">", row.const)]


def implies(rows: Sequence[LinIneq], row: LinIneq) -> bool:
    """True iff every point satisfying `rows` satisfies `row` (exact, strictness aware)."""
    return all(not is_feasible(list(rows) + [neg]).feasible for neg in _negation(row))


def remove_redundant(system: LinSystem, context: Sequence[LinIneq] = ()) -> LinSystem:
    """
    Drop rows implied by the remaining rows (plus `context`, which is assumed
    but never returned). Rows are visited in canonical order, so the result
    is deterministic and minimal.
    """
    kept = list(system.rows)
    i = 0
    while i < len(kept):
        others = kept[:i] + kept[i + 1:] + list(context)
        if implies(others, kept[i]):
            del kept[i]
        else:
            i += 1
    return system.with_rows(kept)


def equivalent(a: Sequence[LinIneq], b: Sequence[LinIneq], context: Sequence[LinIneq] = ()) -> bool:
    """Whether two row sets cut out the same set, given the `context` rows."""
    ca, cb = list(a) + list(context), list(b) + list(context)
    return all(implies(ca, r) for r in b) and all(implies(cb, r) for r in a)
