"""
Shannon-type inequality prover.

An expression ``f(h) >= 0`` over a ground set of N variables is *Shannon
provable* when ``f`` is a nonnegative combination of elemental inequalities
plus any combination of the declared equality constraints. Entropy vectors
live in R^(2^N - 1), one coordinate per nonempty subset; subsets are encoded
as bitmasks over the ground-set order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .lp import linprog_exact
from .measures import H, I, InfoExpression

MAX_GROUND = 10

V_GROUND = ("U0", "U1", "U2", "S1", "S2", "Y1", "Y2")


class ITPError(ValueError):
    pass


@dataclass(frozen=True)
class GroundSet:
    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ITPError("ground set names must be distinct")
        if not 1 <= len(names) <= MAX_GROUND:
            raise ITPError(f"ground set size must be in 1..{MAX_GROUND}, got {len(names)}")
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def dim(self) -> int:
        return (1 << self.n) - 1

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        index = {v: i for i, v in enumerate(self.names)}
        for v in subset:
            if v not in index:
                raise ITPError(f"{v!r} is not in the ground set {self.names}")
            m |= 1 << index[v]
        return m

    def subset(self, mask: int) -> frozenset:
        return frozenset(v for i, v in enumerate(self.names) if mask >> i & 1)

    def vector(self, expr: InfoExpression) -> dict[int, Fraction]:
        """Sparse coordinates of `expr`; key ``mask - 1`` indexes the subset."""
        out: dict[int, Fraction] = {}
        for c, s in expr.terms:
            k = self.mask(s) - 1
            out[k] = out.get(k, Fraction(0)) + c
        return {k: v for k, v in out.items() if v}

    def expression(self, vec: Mapping[int, Fraction]) -> InfoExpression:
        return InfoExpression.from_mapping({self.subset(k + 1): v for k, v in vec.items()})


def elemental_inequalities(ground: GroundSet) -> list[InfoExpression]:
    """
    H(X_i | rest) >= 0 for each i, then I(X_i; X_j | K) >= 0 for i < j and
    every K among the other variables.
    """
    names = ground.names
    out = [H([v], [w for w in names if w != v]) for v in names]
    for i, j in combinations(range(len(names)), 2):
        others = [v for k, v in enumerate(names) if k not in (i, j)]
        for r in range(len(others) + 1):
            for cond in combinations(others, r):
                out.append(I([names[i]], [names[j]], cond))
    return out


@dataclass(frozen=True)
class ProofConstraint:
    """``expr = 0`` over the ground set."""

    kind: str
    expr: InfoExpression
    label: str = ""


def functional_dependency(a, b) -> ProofConstraint:
    """H(a | b) = 0."""
    return ProofConstraint("functional", H(a, b), f"H({_join(a)}|{_join(b)}) = 0")


def independence(a, b, given=()) -> ProofConstraint:
    """I(a; b | given) = 0."""
    g = f"|{_join(given)}" if given else ""
    return ProofConstraint("independence", I(a, b, given), f"I({_join(a)};{_join(b)}{g}) = 0")


def linear_equality(expr: InfoExpression) -> ProofConstraint:
    return ProofConstraint("linear", expr, f"{expr} = 0")


def _join(a) -> str:
    return a if isinstance(a, str) else ",".join(a)


@dataclass(frozen=True)
class ProofResult:
    proven: bool
    target: InfoExpression
    ground: GroundSet
    # Proven: elemental index -> lambda >= 0 and constraint index -> mu
    elemental_weights: dict[int, Fraction] = field(default_factory=dict)
    constraint_weights: dict[int, Fraction] = field(default_factory=dict)
    # NotProvable: a point of the (constrained) Shannon cone with target < 0
    counterexample: dict[frozenset, Fraction] | None = None
    constraints: tuple[ProofConstraint, ...] = ()

    @property
    def verdict(self) -> str:
        return "Proven" if self.proven else "NotProvable"

    def verify(self) -> bool:
        """Re-check the certificate in exact arithmetic."""
        if self.proven:
            if any(w < 0 for w in self.elemental_weights.values()):
                return False
            elems = elemental_inequalities(self.ground)
            total = InfoExpression()
            for i, w in self.elemental_weights.items():
                total = total + elems[i] * w
            for j, w in self.constraint_weights.items():
                total = total + self.constraints[j].expr * w
            return (total - self.target).is_zero()
        h = self.counterexample
        if h is None:
            return False

        def ev(e: InfoExpression) -> Fraction:
            return sum((c * h.get(s, Fraction(0)) for c, s in e.terms), Fraction(0))

        return (ev(self.target) < 0
                and all(ev(e) >= 0 for e in elemental_inequalities(self.ground))
                and all(ev(c.expr) == 0 for c in self.constraints))


def _elemental_keys(ground: GroundSet) -> dict:
    """Index of each elemental, keyed as produced by :func:`elemental_inequalities`."""
    names = ground.names
    keys = {("H", v): i for i, v in enumerate(names)}
    k = len(names)
    for i, j in combinations(range(len(names)), 2):
        others = [v for t, v in enumerate(names) if t not in (i, j)]
        for r in range(len(others) + 1):
            for cond in combinations(others, r):
                keys[("I", frozenset((names[i], names[j])), frozenset(cond))] = k
                k += 1
    return keys


def _lift_weights(sub: GroundSet, ground: GroundSet, lam: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """
    Rewrite a combination of `sub` elementals as one of `ground` elementals.
    Conditional mutual informations are elementals in both sets; for the
    entropy terms, H(X | R) = H(X | everything else) + sum_k I(X; Z_k | R, Z_<k)
    with Z the variables outside `sub`.
    """
    keys = _elemental_keys(ground)
    extra = [v for v in ground.names if v not in sub.names]
    out: dict[int, Fraction] = {}

    def add(key, w):
        idx = keys[key]
        out[idx] = out.get(idx, Fraction(0)) + w

    sub_keys = {v: k for k, v in _elemental_keys(sub).items()}
    for i, w in lam.items():
        key = sub_keys[i]
        if key[0] == "I":
            add(key, w)
            continue
        x = key[1]
        cond = frozenset(v for v in sub.names if v != x)
        add(("H", x), w)
        for z in extra:
            add(("I", frozenset((x, z)), cond), w)
            cond = cond | {z}
    return {k: v for k, v in out.items() if v}


def _exact_lp(A_eq, b_eq, free, cols_idx):
    """Exact feasibility of sum_j x_j A[:, j] = b over the listed columns."""
    rows = [k for k in range(len(A_eq)) if b_eq[k] or any(A_eq[k][j] for j in cols_idx)]
    A = [[A_eq[k][j] for j in cols_idx] for k in rows]
    b = [b_eq[k] for k in rows]
    res = linprog_exact([0] * len(cols_idx), A_eq=A, b_eq=b, free=[free[j] for j in cols_idx])
    return res, rows


def _float_support(A_eq, b_eq, n_elem: int, n_cons: int):
    """
    HiGHS pass. Returns ("proven", support columns) or ("refuted", float h)
    or None when the solver gives no usable answer.
    """
    import numpy as np
    from scipy.optimize import linprog

    A = np.array([[float(v) for v in row] for row in A_eq])
    b = np.array([float(v) for v in b_eq])
    bounds = [(0, None)] * n_elem + [(None, None)] * n_cons
    res = linprog(np.ones(len(bounds)) * np.r_[np.ones(n_elem), np.zeros(n_cons)],
                  A_eq=A, b_eq=b, bounds=bounds, method="highs")
    if res.status == 0:
        x = res.x
        return "proven", [j for j in range(len(x)) if abs(x[j]) > 1e-9]
    if res.status != 2:
        return None
    # min t.h over the cone (elementals >= 0, constraints = 0), h(all) <= 1
    dim = A.shape[0]
    E = A[:, :n_elem].T
    C = A[:, n_elem:].T
    top = np.zeros((1, dim))
    top[0, dim - 1] = 1.0
    res = linprog(b, A_ub=np.vstack([-E, top]), b_ub=np.r_[np.zeros(n_elem), 1.0],
                  A_eq=C if n_cons else None, b_eq=np.zeros(n_cons) if n_cons else None,
                  bounds=[(None, None)] * dim, method="highs")
    if res.status == 0 and res.fun < -1e-9:
        return "refuted", res.x
    return None


def _solve(target: InfoExpression, constraints: tuple[ProofConstraint, ...], ground: GroundSet,
           method: str = "auto"):
    elems = elemental_inequalities(ground)
    cols = [ground.vector(e) for e in elems] + [ground.vector(c.expr) for c in constraints]
    t = ground.vector(target)
    dim = ground.dim
    A_eq = [[Fraction(0)] * len(cols) for _ in range(dim)]
    for j, col in enumerate(cols):
        for k, v in col.items():
            A_eq[k][j] = v
    b_eq = [t.get(k, Fraction(0)) for k in range(dim)]
    free = [False] * len(elems) + [True] * len(constraints)

    def split(x, idx):
        full = dict(zip(idx, x))
        lam = {i: full[i] for i in range(len(elems)) if full.get(i)}
        mu = {j: full[len(elems) + j] for j in range(len(constraints)) if full.get(len(elems) + j)}
        return True, lam, mu

    if method == "auto":
        hint = _float_support(A_eq, b_eq, len(elems), len(constraints))
        if hint and hint[0] == "proven":
            res, _ = _exact_lp(A_eq, b_eq, free, hint[1])
            if res.status == "optimal":
                return split(res.x, hint[1])
        elif hint:
            h = {ground.subset(k + 1): Fraction(float(v)).limit_denominator(10**6)
                 for k, v in enumerate(hint[1])}
            h = {s: v for s, v in h.items() if v}
            cand = ProofResult(False, target, ground, counterexample=h, constraints=constraints)
            if cand.verify():
                return False, h, {}
    elif method != "exact":
        raise ITPError(f"unknown method {method!r}")

    idx = list(range(len(cols)))
    res, rows = _exact_lp(A_eq, b_eq, free, idx)
    if res.status == "infeasible":
        u = dict(zip(rows, res.multipliers))
        # u.col >= 0 for elementals, = 0 for constraints, u.t < 0
        return False, {ground.subset(k + 1): u[k] for k in rows if u[k]}, {}
    return split(res.x, idx)


def prove(target: InfoExpression, constraints: Sequence[ProofConstraint] = (),
          ground: GroundSet | Sequence[str] | None = None, method: str = "auto") -> ProofResult:
    """
    Decide Shannon provability of ``target >= 0`` under the equality constraints.

    The LP is solved over the variables that actually occur; the answer is
    the same over any larger ground set (pad a polymatroid with constant
    variables), and the certificate is lifted back to `ground` before the
    final exact check.

    ``method="auto"`` lets a floating-point LP suggest the support of a
    certificate (or a violating point) and confirms it exactly, falling back
    to the exact simplex when the suggestion does not check out;
    ``method="exact"`` always runs the exact simplex.
    """
    constraints = tuple(constraints)
    used = set(target.variables)
    for c in constraints:
        used |= c.expr.variables
    if ground is None:
        ground = GroundSet(sorted(used) or ["X1"])
    elif not isinstance(ground, GroundSet):
        ground = GroundSet(ground)
    outside = used - set(ground.names)
    if outside:
        raise ITPError(f"names outside the ground set: {sorted(outside)}")
    sub = GroundSet([v for v in ground.names if v in used] or ground.names[:1])
    proven, a, mu = _solve(target, constraints, sub, method)
    if proven:
        lam = a if sub == ground else _lift_weights(sub, ground, a)
        out = ProofResult(True, target, ground, lam, mu, constraints=constraints)
    else:
        h = {}
        for mask in range(1, 1 << ground.n):
            s = ground.subset(mask)
            v = a.get(s & frozenset(sub.names), Fraction(0))
            if v:
                h[s] = v
        out = ProofResult(False, target, ground, counterexample=h, constraints=constraints)
    if not out.verify():
        raise ITPError("internal error: certificate failed exact verification")
    return out


# ---------------------------------------------------------------------------
# the v-quantities of the rate system

def expand_v_definitions(ground: GroundSet | Sequence[str] = V_GROUND) -> dict[str, InfoExpression]:
    names = ground.names if isinstance(ground, GroundSet) else tuple(ground)
    missing = [v for v in V_GROUND if v not in names]
    if missing:
        raise ITPError(f"ground set lacks {missing}")
    v1 = I("U0", ["S1", "S2"])
    return {
        "v1": v1,
        "v2": I("U1", "S2", "S1"),
        "v3": I("U2", "S1", "S2"),
        "v4": v1 + I("U1", ["U0", "S2"], "S1"),
        "v5": v1 + I("U2", ["U0", "S1"], "S2"),
        "v6": I(["U1", "S1"], ["U2", "S2"]) - I("S1", "S2"),
        "v7": v1 + I("U1", "U2", ["U0", "S1", "S2"]) + I("U1", ["U0", "S2"], "S1")
        + I("U2", ["U0", "S1"], "S2"),
        "v8": I(["U1", "S1"], ["U0", "Y1"]),
        "v9": I(["U0", "U1", "S1"], "Y1") + I("U0", ["U1", "S1"]),
        "v10": I(["U2", "S2"], ["U0", "Y2"]),
        "v11": I(["U0", "U2", "S2"], "Y2") + I("U0", ["U2", "S2"]),
    }


# ---------------------------------------------------------------------------
# text grammar

_TOKEN = re.compile(r"\s*(?:(?P<num>\d*\.\d+|\d+(?:/\d+)?)|(?P<fn>[HI])\s*\(|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
                    r"|(?P<op>>=|<=|=|[+\-*])|(?P<bad>\S))")


def _parse_args(text: str, pos: int, fn: str):
    close = text.find(")", pos)
    if close < 0:
        raise ITPError(f"unclosed {fn}( in {text!r}")
    body = text[pos:close]
    given = ()
    if "|" in body:
        body, g = body.split("|", 1)
        given = _name_list(g)
    if fn == "H":
        if ";" in body:
            raise ITPError(f"H() takes no ';' in {text!r}")
        return H(_name_list(body), given), close + 1
    parts = body.split(";")
    if len(parts) != 2:
        raise ITPError(f"I() needs exactly one ';' in {text!r}")
    return I(_name_list(parts[0]), _name_list(parts[1]), given), close + 1


def _name_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",")]
    for n in names:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", n):
            raise ITPError(f"bad variable name {n!r}")
    return names


def _parse_side(text: str, macros: Mapping[str, InfoExpression]) -> InfoExpression:
    text = text.strip()
    if not text:
        raise ITPError("empty side in expression")
    if re.fullmatch(r"0+(?:\.0*)?", text):
        return InfoExpression()
    expr = InfoExpression()
    sign = Fraction(1)
    coef: Fraction | None = None
    expect_term = True
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        if m.group("bad"):
            raise ITPError(f"unexpected {m.group('bad')!r} in {text!r}")
        if m.group("num"):
            if not expect_term or coef is not None:
                raise ITPError(f"misplaced number in {text!r}")
            coef = Fraction(m.group("num"))
            continue
        op = m.group("op")
        if op == "*":
            if coef is None:
                raise ITPError(f"'*' without coefficient in {text!r}")
            continue
        if op in ("+", "-"):
            if coef is not None:
                raise ITPError(f"constant terms are not allowed in {text!r}")
            if expect_term:
                if op == "-":
                    sign = -sign
            else:
                sign = Fraction(1 if op == "+" else -1)
                expect_term = True
            continue
        if not expect_term:
            raise ITPError(f"missing operator in {text!r}")
        if m.group("fn"):
            term, pos = _parse_args(text, pos, m.group("fn"))
        else:
            name = m.group("name")
            if name not in macros:
                raise ITPError(f"unknown name {name!r}")
            term = macros[name]
        expr = expr + term * (sign * (coef if coef is not None else 1))
        sign, coef, expect_term = Fraction(1), None, False
    if expect_term or coef is not None:
        raise ITPError(f"incomplete expression {text!r}")
    return expr


def parse_expression(text: str, macros: Mapping[str, InfoExpression] | None = None):
    """
    Parse ``I(U1;U0,S2|S1) - 2*H(A|B) + v4 >= 0``.

    Returns ``(expr, rel)`` with the relation moved to ``expr rel 0``; a bare
    expression means ``>= 0``. ``<=`` is normalised by negation, so `rel` is
    ``">="`` or ``"="``. Bare names are looked up in `macros`.
    """
    macros = dict(macros or {})
    parts = re.split(r"(>=|<=|=)", text)
    if len(parts) == 1:
        return _parse_side(parts[0], macros), ">="
    if len(parts) != 3:
        raise ITPError(f"expected at most one relation in {text!r}")
    lhs, rel, rhs = _parse_side(parts[0], macros), parts[1], _parse_side(parts[2], macros)
    if rel == "<=":
        return rhs - lhs, ">="
    return lhs - rhs, rel


def v_relations() -> list[tuple[str, InfoExpression]]:
    """The eleven v-relations, each as an expression required to be >= 0."""
    from .systems import V_RELATIONS_TEXT

    v = expand_v_definitions()
    out = []
    for line in V_RELATIONS_TEXT.splitlines():
        if line.strip():
            expr, rel = parse_expression(line, v)
            out.append((line.strip(), expr))
    return out
