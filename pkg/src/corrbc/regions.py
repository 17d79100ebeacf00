"""
Numeric evaluation of the achievability conditions for sending correlated
sources over a two-receiver broadcast channel, plus the specializations that
recover Marton, Gray-Wyner and degraded-message-set regions.

All quantities are in bits. Evaluators build the eight-variable pmf over
(S1, S2, U0, U1, U2, X, Y1, Y2) and read every bound off it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .itp import expand_v_definitions
from .measures import (
    H,
    I,
    InfoExpression,
    JointPmf,
    MeasureError,
    common_part,
    compose_scenario,
    derive_variable,
    entropy,
    eval_expression,
    mutual_information,
)
from .polytope import LinIneq, is_feasible
from .systems import VARIABLES, rate_system, source_conditions

STRICT_TOL = 1e-9


class RegionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# inputs

@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A source pmf over (S1, S2) and a broadcast channel p(y1, y2 | x)."""

    source: JointPmf
    channel: np.ndarray              # shape (X, Y1, Y2)

    def __post_init__(self):
        if self.source.names != ("S1", "S2"):
            raise RegionError(f"source must be over ('S1', 'S2'), got {self.source.names}")
        ch = np.asarray(self.channel, dtype=float)
        if ch.ndim != 3:
            raise RegionError("channel must have shape (X, Y1, Y2)")
        if np.any(ch < 0):
            raise RegionError("channel has negative entries")
        sums = ch.reshape(ch.shape[0], -1).sum(axis=1)
        if np.any(np.abs(sums - 1) > 1e-12):
            raise RegionError(f"channel slice x={int(np.argmax(np.abs(sums - 1)))} is not normalized")
        ch = ch.copy()
        ch.setflags(write=False)
        object.__setattr__(self, "channel", ch)

    @classmethod
    def from_arrays(cls, source, channel) -> "ScenarioSpec":
        return cls(JointPmf.from_array(("S1", "S2"), source), np.asarray(channel, dtype=float))

    @property
    def sizes(self) -> dict[str, int]:
        n1, n2 = self.source.shape
        nx, ny1, ny2 = self.channel.shape
        return {"S1": n1, "S2": n2, "X": nx, "Y1": ny1, "Y2": ny2}


@dataclass(frozen=True, eq=False)
class AuxiliarySpec:
    """p(u0, u1, u2 | s1, s2) and a deterministic encoder map x(s1, s2, u0, u1, u2)."""

    aux: np.ndarray                  # shape (S1, S2, U0, U1, U2)
    x_map: np.ndarray                # same shape, integer

    def __post_init__(self):
        aux = np.array(self.aux, dtype=float)
        xm = np.asarray(self.x_map)
        if aux.ndim != 5:
            raise RegionError("aux must have shape (S1, S2, U0, U1, U2)")
        if not np.issubdtype(xm.dtype, np.integer):
            if np.all(np.mod(xm, 1) == 0):
                xm = xm.astype(int)
            else:
                raise RegionError(
                    "x_map must be a deterministic integer map; put any encoder "
                    "randomness into an auxiliary variable instead")
        if xm.shape != aux.shape:
            raise RegionError(f"x_map shape {xm.shape} differs from aux shape {aux.shape}")
        xm = np.array(xm, dtype=int)
        aux.setflags(write=False)
        xm.setflags(write=False)
        object.__setattr__(self, "aux", aux)
        object.__setattr__(self, "x_map", xm)

    @property
    def cardinalities(self) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.aux.shape[2:])


@dataclass(frozen=True)
class RateTriple:
    r0: float
    r1: float
    r2: float

    def __post_init__(self):
        for name in ("r0", "r1", "r2"):
            if getattr(self, name) < 0:
                raise RegionError(f"{name} must be nonnegative")

    def as_dict(self) -> dict[str, float]:
        return {"R0": self.r0, "R1": self.r1, "R2": self.r2}

    def combo(self, names: Sequence[str]) -> float:
        d = self.as_dict()
        return float(sum(d[n] for n in names))


@dataclass(frozen=True)
class RegionRow:
    name: str
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.margin > STRICT_TOL


@dataclass(frozen=True)
class RegionReport:
    family: str
    rows: tuple[RegionRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def row(self, name: str) -> RegionRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rows)

    @property
    def margins(self) -> tuple[float, ...]:
        return tuple(r.margin for r in self.rows)

    @property
    def min_margin(self) -> float:
        return min(self.margins)

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.rows)

    def as_records(self) -> list[dict]:
        return [{"family": self.family, "row": r.name, "lhs": r.lhs, "rhs": r.rhs,
                 "margin": r.margin, "satisfied": r.satisfied} for r in self.rows]


def compose(scenario: ScenarioSpec, aux: AuxiliarySpec) -> JointPmf:
    try:
        return compose_scenario(scenario.source, aux.aux, aux.x_map, scenario.channel)
    except MeasureError as exc:
        raise RegionError(f"cannot compose scenario: {exc}") from exc


def _report(family: str, pmf: JointPmf, rows) -> RegionReport:
    return RegionReport(family, tuple(
        RegionRow(name, eval_expression(lhs, pmf), eval_expression(rhs, pmf))
        for name, lhs, rhs in rows))


# ---------------------------------------------------------------------------
# the two theorems

S1, S2, U0, U1, U2, Y1, Y2 = "S1", "S2", "U0", "U1", "U2", "Y1", "Y2"
THEOREM2_ROWS = ("S1", "S2", "KM1", "KM2", "KM3")
HC_ROWS = ("S1", "S2", "HC1", "HC2", "HC3")


def theorem2_rows() -> list[tuple[str, InfoExpression, InfoExpression]]:
    """(name, lhs, rhs) with the condition lhs < rhs."""
    mix = I([U1, S1], [U2, S2], U0)
    return [
        ("S1", H(S1), I([U0, U1, S1], Y1) - I([U0, U1], S2, S1)),
        ("S2", H(S2), I([U0, U2, S2], Y2) - I([U0, U2], S1, S2)),
        ("KM1", H([S1, S2]), I([U0, U1, S1], Y1) + I([U2, S2], Y2, U0) - mix),
        ("KM2", H([S1, S2]), I([U1, S1], Y1, U0) + I([U0, U2, S2], Y2) - mix),
        ("KM3", H([S1, S2]), I([U0, U1, S1], Y1) + I([U0, U2, S2], Y2) - mix - I([S1, S2], U0)),
    ]


def hc_rows() -> list[tuple[str, InfoExpression, InfoExpression]]:
    """Rows with the common part K of the sources made explicit."""
    mix = I([U1, S1], [U2, S2], ["K", U0])
    return [
        ("S1", H(S1), I([U0, U1, S1], Y1) - I([U0, U1], S2, S1)),
        ("S2", H(S2), I([U0, U2, S2], Y2) - I([U0, U2], S1, S2)),
        ("HC1", H([S1, S2]), I(["K", U0, U1, S1], Y1) + I([U2, S2], Y2, ["K", U0]) - mix),
        ("HC2", H([S1, S2]), I([U1, S1], Y1, ["K", U0]) + I(["K", U0, U2, S2], Y2) - mix),
        ("HC3", H([S1, S2]), I([U0, U1, S1], Y1) + I([U0, U2, S2], Y2) - mix
         - I([S1, S2], ["K", U0])),
    ]


def eval_theorem2(scenario: ScenarioSpec, aux: AuxiliarySpec) -> RegionReport:
    return _report("theorem2", compose(scenario, aux), theorem2_rows())


def with_common_part(pmf: JointPmf) -> JointPmf:
    """Append K = f(S1) (= g(S2) almost surely) to a composed pmf."""
    cp = common_part(JointPmf.from_array(("S1", "S2"), pmf.mass.sum(axis=tuple(range(2, len(pmf.names))))))
    return derive_variable(pmf, "K", ["S1"], cp.f, cp.size)


def eval_theorem1_hc(scenario: ScenarioSpec, aux: AuxiliarySpec) -> RegionReport:
    return _report("theorem1_hc", with_common_part(compose(scenario, aux)), hc_rows())


@dataclass(frozen=True)
class DominanceRow:
    name: str
    thm2_rhs: float
    hc_rhs: float

    @property
    def dominated(self) -> bool:
        """True when the HC bound is at least the Theorem-2 bound."""
        return self.hc_rhs >= self.thm2_rhs - 1e-10


def compare_thm2_hc(scenario: ScenarioSpec, aux: AuxiliarySpec) -> list[DominanceRow]:
    pmf = with_common_part(compose(scenario, aux))
    t2 = _report("theorem2", pmf, theorem2_rows())
    hc = _report("theorem1_hc", pmf, hc_rows())
    return [DominanceRow(f"{a.name}/{b.name}" if a.name != b.name else a.name, a.rhs, b.rhs)
            for a, b in zip(t2.rows, hc.rows)]


def augment_common(aux: AuxiliarySpec, source: JointPmf) -> AuxiliarySpec:
    """U0 -> (U0, K) with K the common part of the source (K is the fast index)."""
    cp = common_part(source)
    f = np.maximum(np.array(cp.f), 0)
    n1, n2, a0, a1, a2 = aux.aux.shape
    k = cp.size
    new = np.zeros((n1, n2, a0 * k, a1, a2))
    xm = np.zeros((n1, n2, a0 * k, a1, a2), dtype=int)
    for s1 in range(n1):
        for u0 in range(a0):
            for kk in range(k):
                xm[s1, :, u0 * k + kk] = aux.x_map[s1, :, u0]
            new[s1, :, u0 * k + f[s1]] = aux.aux[s1, :, u0]
    return AuxiliarySpec(new, xm)


# ---------------------------------------------------------------------------
# covering and decoding bounds of the separate scheme

COVERING_NAMES = ("R0", "R1", "R2", "R0+R1", "R0+R2", "R1+R2", "R0+R1+R2")
DECODING_NAMES = ("dec1", "dec2", "dec3", "dec4")
DECODING_LHS = {"dec1": ("H1", "R1"), "dec2": ("H1", "R0", "R1"),
                "dec3": ("H2", "R2"), "dec4": ("H2", "R0", "R2")}


@dataclass(frozen=True)
class Bound:
    name: str
    terms: tuple[str, ...]           # what the bound applies to, e.g. ("R0", "R1")
    expr: InfoExpression
    value: float
    kind: str                        # "lower" (sum > value) or "upper" (sum < value)


def covering_expressions() -> list[tuple[str, InfoExpression]]:
    v = expand_v_definitions()
    return [(name, v[f"v{i + 1}"]) for i, name in enumerate(COVERING_NAMES)]


def decoding_expressions() -> list[tuple[str, InfoExpression]]:
    v = expand_v_definitions()
    return [(name, v[f"v{i + 8}"]) for i, name in enumerate(DECODING_NAMES)]


def eval_covering_rates(scenario: ScenarioSpec, aux: AuxiliarySpec) -> list[Bound]:
    pmf = compose(scenario, aux)
    return [Bound(name, tuple(name.split("+")), e, eval_expression(e, pmf), "lower")
            for name, e in covering_expressions()]


def eval_decoding_rates(scenario: ScenarioSpec, aux: AuxiliarySpec) -> list[Bound]:
    pmf = compose(scenario, aux)
    return [Bound(name, DECODING_LHS[name], e, eval_expression(e, pmf), "upper")
            for name, e in decoding_expressions()]


def superposition_expressions():
    v1 = I(U0, [S1, S2])
    cov = [
        ("R0", v1),
        ("R0+R1", v1 + I(S2, U1, [S1, U0])),
        ("R0+R2", v1 + I(S1, U2, [S2, U0])),
        ("R0+R1+R2", v1 + I(S2, U1, [S1, U0]) + I([S1, U1], U2, [S2, U0])),
    ]
    dec = [
        ("dec1b", ("H1", "R1"), I([U1, S1], Y1, U0) + I(S1, U0)),
        ("dec2b", ("H1", "R0", "R1"), I([U0, U1, S1], Y1) + I(U0, S1)),
        ("dec3b.1", ("H2", "R2"), I([U2, S2], Y2, U0) + I(S2, U0)),
        ("dec3b.2", ("H2", "R0", "R2"), I([U0, U2, S2], Y2) + I(U0, S2)),
    ]
    return cov, dec


def eval_superposition_rates(scenario: ScenarioSpec, aux: AuxiliarySpec) -> tuple[list[Bound], list[Bound]]:
    pmf = compose(scenario, aux)
    cov, dec = superposition_expressions()
    return ([Bound(n, tuple(n.split("+")), e, eval_expression(e, pmf), "lower") for n, e in cov],
            [Bound(n, t, e, eval_expression(e, pmf), "upper") for n, t, e in dec])


def v_values(pmf: JointPmf) -> dict[str, float]:
    return {name: eval_expression(e, pmf) for name, e in expand_v_definitions().items()}


def check_rates(bounds: Sequence[Bound], rates: RateTriple, h1: float = 0.0, h2: float = 0.0,
                family: str = "rates") -> RegionReport:
    """Report lower bounds as ``value < sum`` and upper bounds as ``sum < value``."""
    vals = dict(rates.as_dict(), H1=h1, H2=h2)
    rows = []
    for b in bounds:
        total = float(sum(vals[t] for t in b.terms))
        if b.kind == "lower":
            rows.append(RegionRow(b.name, b.value, total))
        else:
            rows.append(RegionRow(b.name, total, b.value))
    return RegionReport(family, tuple(rows))


# ---------------------------------------------------------------------------
# feasibility of the rate system

@dataclass(frozen=True)
class Feasible:
    feasible: bool
    rates: RateTriple | None
    exact_rates: tuple[Fraction, Fraction, Fraction] | None = None

    def __bool__(self):
        return self.feasible


def _exact(x: float) -> Fraction:
    if not math.isfinite(x):
        raise RegionError(f"bound {x} is not finite")
    return Fraction(x)


def rate_region_feasible(covering: Sequence[float], decoding: Sequence[float],
                         h1: float, h2: float) -> Feasible:
    """
    Does some (R0, R1, R2) satisfy every covering and decoding condition?

    Each float is converted to the rational it represents exactly, so the
    verdict agrees with the eliminated conditions evaluated in exact
    arithmetic on the same numbers.
    """
    covering = [b.value if isinstance(b, Bound) else b for b in covering]
    decoding = [b.value if isinstance(b, Bound) else b for b in decoding]
    if len(covering) != 7 or len(decoding) != 4:
        raise RegionError("expected 7 covering and 4 decoding bounds")
    point = {f"v{i + 1}": _exact(x) for i, x in enumerate(list(covering) + list(decoding))}
    point["H1"], point["H2"] = _exact(h1), _exact(h2)
    rows = []
    for r in rate_system().rows:
        d = {}
        const = r.const
        for n, c in r.coeffs:
            if n in point:
                const -= c * point[n]
            else:
                d[n] = c
        rows.append(LinIneq.make(d, r.rel, const))
    res = is_feasible(rows)
    if not res.feasible:
        return Feasible(False, None)
    w = res.witness
    exact = tuple(w.get(n, Fraction(0)) for n in ("R0", "R1", "R2"))
    return Feasible(True, RateTriple(*(max(float(v), 0.0) for v in exact)), exact)


def source_conditions_exact(covering: Sequence[float], decoding: Sequence[float],
                            h1: float, h2: float) -> list[tuple[str, bool]]:
    """The eliminated conditions on (H1, H2, v1..v11), evaluated exactly."""
    point = {f"v{i + 1}": _exact(x) for i, x in enumerate(list(covering) + list(decoding))}
    point["H1"], point["H2"] = _exact(h1), _exact(h2)
    return [(str(r), r.holds(point)) for r in source_conditions().rows]


def fm_report(scenario: ScenarioSpec, aux: AuxiliarySpec) -> RegionReport:
    """The eight eliminated conditions as lhs/rhs rows (lhs = H terms)."""
    pmf = compose(scenario, aux)
    point = v_values(pmf)
    point["H1"] = entropy(pmf, "S1")
    point["H2"] = entropy(pmf, "S2")
    rows = []
    for r in source_conditions().rows:
        lhs = sum(float(c) * point[n] for n, c in r.coeffs if n in ("H1", "H2"))
        rhs = float(r.const) - sum(float(c) * point[n] for n, c in r.coeffs if n not in ("H1", "H2"))
        left = " + ".join(n for n, _ in r.coeffs if n in ("H1", "H2"))
        rows.append(RegionRow(f"{left} < {_rhs_text(r)}", lhs, rhs))
    return RegionReport("fm", tuple(rows))


def _rhs_text(r: LinIneq) -> str:
    parts = []
    for n, c in sorted(((n, -c) for n, c in r.coeffs if n not in ("H1", "H2")),
                       key=lambda t: (t[1] < 0, int(t[0][1:]))):
        parts.append(("+ " if c > 0 else "- ") + n)
    text = " ".join(parts)
    return text[2:] if text.startswith("+") else "-" + text[1:]


# ---------------------------------------------------------------------------
# auxiliary W: U_i -> (U_i, W) for an independent uniform W

DISCARDED_ROWS = ("H1 < v8 - v2", "H2 < v10 - v3", "H1 + H2 < v8 + v10 - v6")


def augment_with_w(aux: AuxiliarySpec, m: int) -> AuxiliarySpec:
    """Each U_i becomes (U_i, W) with W uniform on m symbols (W is the fast index)."""
    if m < 1:
        raise RegionError("m must be >= 1")
    n1, n2, a0, a1, a2 = aux.aux.shape
    new = np.zeros((n1, n2, a0, m, a1, m, a2, m))
    for w in range(m):
        new[:, :, :, w, :, w, :, w] = aux.aux / m
    xm = np.broadcast_to(aux.x_map[:, :, :, None, :, None, :, None], new.shape)
    return AuxiliarySpec(new.reshape(n1, n2, a0 * m, a1 * m, a2 * m),
                         np.array(xm).reshape(n1, n2, a0 * m, a1 * m, a2 * m))


def discarded_bounds(scenario: ScenarioSpec, aux: AuxiliarySpec) -> dict[str, float]:
    """rhs - lhs of the three rows the W argument removes (v8-v2-H1, ...)."""
    rep = fm_report(scenario, aux)
    out = {}
    for r in rep.rows:
        for name in DISCARDED_ROWS:
            if _same_row(r.name, name):
                out[name] = r.margin
    return out


def _same_row(a: str, b: str) -> bool:
    from .polytope import parse_row
    return parse_row(a) == parse_row(b)


def bridging_m(scenario: ScenarioSpec, aux: AuxiliarySpec) -> int:
    """Alphabet size of W that lifts the discarded rows above zero margin."""
    deficit = max(0.0, max(-v for v in discarded_bounds(scenario, aux).values()))
    return max(2, math.ceil(2 ** (deficit + 1)))


# ---------------------------------------------------------------------------
# specializations

MARTON_ROWS = ("R0+R1", "R0+R2", "R0+R1+R2 (a)", "R0+R1+R2 (b)", "2R0+R1+R2")


def marton_pmf(channel, aux_u, x_map_u) -> JointPmf:
    """Joint pmf over (U0, U1, U2, X, Y1, Y2) for source-free auxiliaries."""
    aux_u = np.asarray(aux_u, dtype=float)
    xm = np.asarray(x_map_u, dtype=int)
    one = JointPmf.from_array(("S1", "S2"), np.ones((1, 1)))
    pmf = compose_scenario(one, aux_u[None, None], xm[None, None], channel)
    return pmf


def specialize_marton(channel, aux_u, x_map_u, rates: RateTriple | None = None) -> RegionReport:
    """Marton's rows; lhs uses `rates` (zero when omitted)."""
    pmf = marton_pmf(channel, aux_u, x_map_u)
    r = rates or RateTriple(0, 0, 0)
    mix = mutual_information(pmf, U1, U2, U0)
    a = mutual_information(pmf, [U0, U1], Y1)
    b = mutual_information(pmf, [U0, U2], Y2)
    rhs = [a, b,
           a + mutual_information(pmf, U2, Y2, U0) - mix,
           mutual_information(pmf, U1, Y1, U0) + b - mix,
           a + b - mix]
    lhs = [r.r0 + r.r1, r.r0 + r.r2, r.r0 + r.r1 + r.r2, r.r0 + r.r1 + r.r2, 2 * r.r0 + r.r1 + r.r2]
    return RegionReport("marton", tuple(RegionRow(n, l, h) for n, l, h in zip(MARTON_ROWS, lhs, rhs)))


def marton_construction(channel, aux_u, x_map_u, w_sizes=(2, 2, 2), with_common: bool = True):
    """
    Independent messages as sources: S1 = (W0, W1), S2 = (W0, W2) with uniform
    W's, auxiliaries independent of the messages. With `with_common`, U0
    also carries W0, i.e. U0 -> (U0, W0), which is what makes the source
    conditions coincide with Marton's rows one by one.
    Returns (scenario, aux, rates) with rates = (log|W0|, log|W1|, log|W2|).
    """
    m0, m1, m2 = w_sizes
    aux_u = np.asarray(aux_u, dtype=float)
    xm_u = np.asarray(x_map_u, dtype=int)
    # S1 index = w0*m1 + w1, S2 index = w0*m2 + w2
    src = np.zeros((m0 * m1, m0 * m2))
    for w0 in range(m0):
        for w1 in range(m1):
            for w2 in range(m2):
                src[w0 * m1 + w1, w0 * m2 + w2] = 1.0 / (m0 * m1 * m2)
    scen = ScenarioSpec.from_arrays(src, channel)
    a0, a1, a2 = aux_u.shape
    aux = np.broadcast_to(aux_u, (m0 * m1, m0 * m2) + aux_u.shape).copy()
    xm = np.broadcast_to(xm_u, aux.shape).copy()
    spec = AuxiliarySpec(aux, xm)
    if with_common:
        spec = augment_common(spec, scen.source)
    rates = RateTriple(math.log2(m0), math.log2(m1), math.log2(m2))
    return scen, spec, rates


GW_ROWS = ("R0+R1", "R0+R2", "R0+R1+R2", "2R0+R1+R2")
GW_CANONICAL_ROWS = ("R0", "R1", "R2")


def specialize_gray_wyner(source: JointPmf, v_cond, link_rates: RateTriple) -> tuple[RegionReport, RegionReport]:
    """
    Rows ``rate combination > bound`` for description V ~ p(v | s1, s2),
    reported as lhs = bound, rhs = rate combination.
    """
    v_cond = np.asarray(v_cond, dtype=float)
    pmf = JointPmf.from_array(("S1", "S2", "V"), source.mass[:, :, None] * v_cond)
    i_v = mutual_information(pmf, ["S1", "S2"], "V")
    h1v = entropy(pmf, "S1", "V")
    h2v = entropy(pmf, "S2", "V")
    r = link_rates
    four = RegionReport("gray_wyner", (
        RegionRow("R0+R1", i_v + h1v, r.r0 + r.r1),
        RegionRow("R0+R2", i_v + h2v, r.r0 + r.r2),
        RegionRow("R0+R1+R2", i_v + h1v + h2v, r.r0 + r.r1 + r.r2),
        RegionRow("2R0+R1+R2", 2 * i_v + h1v + h2v, 2 * r.r0 + r.r1 + r.r2),
    ))
    three = RegionReport("gray_wyner_canonical", (
        RegionRow("R0", i_v, r.r0), RegionRow("R1", h1v, r.r1), RegionRow("R2", h2v, r.r2)))
    return four, three


def gray_wyner_instance(source: JointPmf, v_cond, link_sizes=(2, 2, 2)):
    """
    The noiseless Gray-Wyner network as a broadcast channel: X = (X0, X1, X2)
    with uniform independent components, Y1 = (X0, X1), Y2 = (X0, X2);
    U0 = (X0, V), U1 = X1, U2 = X2. Returns (scenario, aux, link rates).
    """
    m0, m1, m2 = link_sizes
    v_cond = np.asarray(v_cond, dtype=float)
    n1, n2, nv = v_cond.shape
    nx = m0 * m1 * m2
    channel = np.zeros((nx, m0 * m1, m0 * m2))
    for x0 in range(m0):
        for x1 in range(m1):
            for x2 in range(m2):
                channel[(x0 * m1 + x1) * m2 + x2, x0 * m1 + x1, x0 * m2 + x2] = 1.0
    aux = np.zeros((n1, n2, m0 * nv, m1, m2))
    xm = np.zeros(aux.shape, dtype=int)
    for x0 in range(m0):
        for v in range(nv):
            for x1 in range(m1):
                for x2 in range(m2):
                    aux[:, :, x0 * nv + v, x1, x2] = v_cond[:, :, v] / (m0 * m1 * m2)
                    xm[:, :, x0 * nv + v, x1, x2] = (x0 * m1 + x1) * m2 + x2
    scen = ScenarioSpec(source, channel)
    rates = RateTriple(math.log2(m0), math.log2(m1), math.log2(m2))
    return scen, AuxiliarySpec(aux, xm), rates


K1_ROWS = ("k1.1", "k1.2", "k1.3")


def specialize_degraded(source: JointPmf, channel, ux) -> RegionReport:
    """
    Receiver 1 wants both sources: rows H(S2) < I(U;Y2),
    H(S1,S2) < I(U;Y2) + I(X;Y1|U), H(S1,S2) < I(X;Y1) for p(u, x).
    """
    ux = np.asarray(ux, dtype=float)
    channel = np.asarray(channel, dtype=float)
    mass = ux[:, :, None, None] * channel[None]
    pmf = JointPmf.from_array(("U", "X", "Y1", "Y2"), mass)
    h2 = entropy(source, "S2")
    h12 = entropy(source, ["S1", "S2"])
    iu2 = mutual_information(pmf, "U", "Y2")
    return RegionReport("degraded", (
        RegionRow("k1.1", h2, iu2),
        RegionRow("k1.2", h12, iu2 + mutual_information(pmf, "X", "Y1", "U")),
        RegionRow("k1.3", h12, mutual_information(pmf, "X", "Y1")),
    ))


def degraded_instance(source: JointPmf, channel, ux):
    """
    The substitution S1' = (S1, S2), S2' = S2, U0 = (U, S2), U1 = X, U2 constant,
    with (U, X) independent of the sources. Returns (scenario, aux).
    """
    ux = np.asarray(ux, dtype=float)
    nu, nx = ux.shape
    n1, n2 = source.shape
    src = np.zeros((n1 * n2, n2))
    for s1 in range(n1):
        for s2 in range(n2):
            src[s1 * n2 + s2, s2] = source.mass[s1, s2]
    aux = np.zeros((n1 * n2, n2, nu * n2, nx, 1))
    xm = np.zeros(aux.shape, dtype=int)
    for s1 in range(n1):
        for s2 in range(n2):
            for u in range(nu):
                aux[s1 * n2 + s2, :, u * n2 + s2, :, 0] = ux[u, :]
            xm[s1 * n2 + s2, :, :, :, 0] = np.arange(nx)[None, None, :]
    # slices with s2' != s2 carry no mass but must still be distributions
    for s in range(n1 * n2):
        for t in range(n2):
            if aux[s, t].sum() == 0:
                aux[s, t, 0, 0, 0] = 1.0
    return ScenarioSpec.from_arrays(src, channel), AuxiliarySpec(aux, xm)


@dataclass(frozen=True)
class MoreCapable:
    more_capable: bool
    gap: float                       # min over inputs of I(X;Y1) - I(X;Y2)
    witness: np.ndarray              # input pmf attaining the gap
    resolution: int

    def __str__(self):
        tag = "numerically more capable" if self.more_capable else "not more capable"
        return f"{tag} at resolution {self.resolution} (min gap {self.gap:.6g})"


def _simplex_grid(k: int, r: int):
    if k == 1:
        yield (r,)
        return
    for i in range(r + 1):
        for rest in _simplex_grid(k - 1, r - i):
            yield (i,) + rest


def _mi_from_channel(px: np.ndarray, w: np.ndarray) -> float:
    joint = px[:, None] * w
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = (w / np.where(py > 0, py, 1.0)[None, :])[mask]
    return float(np.sum(joint[mask] * np.log2(ratio)))


def check_more_capable(channel, resolution: int = 20, tol: float = 1e-9) -> MoreCapable:
    """
    Scan a regular grid on the input simplex, then polish the worst grid
    point with a local search. Verdict is graded at the given resolution.
    """
    from scipy.optimize import minimize

    ch = np.asarray(channel, dtype=float)
    w1 = ch.sum(axis=2)
    w2 = ch.sum(axis=1)
    nx = ch.shape[0]

    def gap(px):
        return _mi_from_channel(px, w1) - _mi_from_channel(px, w2)

    best, best_p = math.inf, None
    for pt in _simplex_grid(nx, resolution):
        px = np.array(pt, dtype=float) / resolution
        g = gap(px)
        if g < best:
            best, best_p = g, px
    if nx > 1:
        def f(z):
            e = np.exp(z - z.max())
            return gap(e / e.sum())

        z0 = np.log(np.clip(best_p, 1e-12, None))
        res = minimize(f, z0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
        if res.fun < best:
            e = np.exp(res.x - res.x.max())
            best, best_p = float(res.fun), e / e.sum()
    return MoreCapable(best >= -tol, float(best), best_p, resolution)


# ---------------------------------------------------------------------------
# auxiliary search

@dataclass(frozen=True)
class SearchResult:
    aux: AuxiliarySpec
    report: RegionReport
    evaluations: int

    @property
    def min_margin(self) -> float:
        return self.report.min_margin


def u0_cardinality_bound(scenario: ScenarioSpec) -> int:
    s = scenario.sizes
    return min(s["X"] * s["S1"] * s["S2"] + 4, s["Y1"] * s["Y2"] * s["S1"] * s["S2"] + 4)


def _softmax_aux(logits: np.ndarray, n1: int, n2: int, cards) -> np.ndarray:
    z = logits.reshape(n1, n2, -1)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return (e / e.sum(axis=-1, keepdims=True)).reshape((n1, n2) + tuple(cards))


def search_feasible_aux(scenario: ScenarioSpec, cardinalities=(2, 2, 2), budget: int = 2000,
                        seed: int = 0, restarts: int = 4,
                        objective: Callable[[RegionReport], float] | None = None) -> SearchResult:
    """
    Random-restart local search maximising the smallest Theorem-2 margin.

    Each restart runs a (1+1) evolution strategy on the logits of
    p(u0,u1,u2|s1,s2), with occasional single-entry changes of the encoder
    map. Deterministic given `seed`.
    """
    if min(cardinalities) < 1 or budget < 1:
        raise RegionError("cardinalities and budget must be >= 1")
    objective = objective or (lambda rep: rep.min_margin)
    n1, n2 = scenario.source.shape
    nx = scenario.channel.shape[0]
    cards = tuple(int(c) for c in cardinalities)
    shape = (n1, n2) + cards
    dim = int(np.prod(shape))
    per = max(1, budget // restarts)
    children = np.random.SeedSequence(seed).spawn(restarts)
    evals = 0
    best = None

    def score(logits, xm):
        nonlocal evals
        evals += 1
        aux = AuxiliarySpec(_softmax_aux(logits, n1, n2, cards), xm)
        rep = eval_theorem2(scenario, aux)
        return objective(rep), aux, rep

    for child in children:
        rng = np.random.default_rng(child)
        logits = rng.normal(0, 1, dim)
        xm = rng.integers(0, nx, size=shape)
        cur = score(logits, xm)
        step = 1.0
        for _ in range(per - 1):
            if nx > 1 and rng.random() < 0.2:
                cand_x = xm.copy()
                idx = tuple(rng.integers(0, s) for s in shape)
                cand_x[idx] = rng.integers(0, nx)
                cand_l = logits
            else:
                cand_x = xm
                cand_l = logits + rng.normal(0, step, dim)
            cand = score(cand_l, cand_x)
            if cand[0] >= cur[0]:
                cur, logits, xm = cand, cand_l, cand_x
                step = min(step * 1.5, 8.0)
            else:
                step = max(step * 0.9, 1e-3)
        if best is None or cur[0] > best[0]:
            best = cur
    return SearchResult(best[1], best[2], evals)
