"""
Entropies, mutual informations and linear information expressions on dense
joint pmfs over named finite variables.

All logarithms are base 2, so every quantity is in bits. The conventions
0 log 0 = 0 and "conditioning on a zero-probability event contributes no
mass" are applied throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

NORMALIZATION_TOL = 1e-12
MAX_VARIABLES = 12
MAX_CELLS = 2**24


class MeasureError(ValueError):
    """Raised for malformed pmfs or references to unknown variables."""


@dataclass(frozen=True)
class FiniteVariable:
    name: str
    alphabet_size: int

    def __post_init__(self):
        if not self.name:
            raise MeasureError("variable name must be non-empty")
        if int(self.alphabet_size) < 1:
            raise MeasureError(f"alphabet of {self.name} must be non-empty")


def _as_names(a) -> tuple[str, ...]:
    if a is None:
        return ()
    if isinstance(a, str):
        return (a,)
    return tuple(a)


class JointPmf:
    """
    Dense probability tensor with one named axis per variable.

    Instances are treated as immutable; entropies of variable subsets are
    memoised on the instance.
    """

    __slots__ = ("variables", "mass", "_axis", "_hcache")

    def __init__(self, variables: Sequence[FiniteVariable], mass, *, check: bool = True):
        variables = tuple(variables)
        mass = np.asarray(mass, dtype=float)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise MeasureError(f"duplicate variable names in {names}")
        if len(variables) > MAX_VARIABLES:
            raise MeasureError(
                f"{len(variables)} variables exceeds the cap of {MAX_VARIABLES}")
        shape = tuple(v.alphabet_size for v in variables)
        if math.prod(shape) > MAX_CELLS:
            raise MeasureError(
                f"joint alphabet of {math.prod(shape)} cells exceeds the cap of {MAX_CELLS}")
        if mass.shape != shape:
            raise MeasureError(f"mass has shape {mass.shape}, expected {shape}")
        if check:
            if np.any(mass < 0):
                raise MeasureError("negative probability mass")
            total = mass.sum()
            if abs(total - 1.0) > NORMALIZATION_TOL * max(1, mass.size) ** 0.5 + NORMALIZATION_TOL:
                raise MeasureError(f"mass sums to {total!r}, not 1")
        mass.setflags(write=False)
        self.variables = variables
        self.mass = mass
        self._axis = {n: i for i, n in enumerate(names)}
        self._hcache: dict[frozenset, float] = {}

    @classmethod
    def from_array(cls, names: Sequence[str], mass) -> "JointPmf":
        mass = np.asarray(mass, dtype=float)
        if mass.ndim != len(names):
            raise MeasureError(f"{len(names)} names for a {mass.ndim}-d array")
        return cls([FiniteVariable(n, s) for n, s in zip(names, mass.shape)], mass)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def size_of(self, name: str) -> int:
        return self.mass.shape[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._axis[name]
        except KeyError:
            raise MeasureError(f"unknown variable {name!r}; have {self.names}") from None

    def check_names(self, names: Iterable[str]) -> None:
        for n in names:
            self.axis(n)

    def subset_entropy(self, names) -> float:
        """Joint entropy H(names) in bits; the empty set has entropy 0."""
        key = frozenset(names)
        if not key:
            return 0.0
        h = self._hcache.get(key)
        if h is None:
            self.check_names(key)
            drop = tuple(i for n, i in self._axis.items() if n not in key)
            p = self.mass.sum(axis=drop) if drop else self.mass
            p = p[p > 0]
            h = float(-(p * np.log2(p)).sum())
            h = max(h, 0.0)
            self._hcache[key] = h
        return h

    def __repr__(self):
        dims = ", ".join(f"{v.name}:{v.alphabet_size}" for v in self.variables)
        return f"JointPmf({dims})"


def marginalize(pmf: JointPmf, keep) -> JointPmf:
    """Sum out every variable not in `keep`; variable order is preserved."""
    keep = set(_as_names(keep))
    pmf.check_names(keep)
    drop = tuple(i for i, n in enumerate(pmf.names) if n not in keep)
    mass = pmf.mass.sum(axis=drop) if drop else pmf.mass.copy()
    variables = [v for v in pmf.variables if v.name in keep]
    return JointPmf(variables, mass, check=False)


def entropy(pmf: JointPmf, a, given=()) -> float:
    """H(A | Given) in bits."""
    a, given = _as_names(a), _as_names(given)
    if not a:
        raise MeasureError("entropy needs at least one variable")
    pmf.check_names(a + given)
    h = pmf.subset_entropy(set(a) | set(given)) - pmf.subset_entropy(given)
    return max(h, 0.0)


def mutual_information(pmf: JointPmf, a, b, given=()) -> float:
    """I(A; B | Given) in bits, computed as H(A|C) - H(A|B,C)."""
    a, b, given = _as_names(a), _as_names(b), _as_names(given)
    if not a or not b:
        raise MeasureError("mutual information needs non-empty arguments")
    pmf.check_names(a + b + given)
    h = pmf.subset_entropy
    c = set(given)
    return (h(set(a) | c) - h(c)) - (h(set(a) | set(b) | c) - h(set(b) | c))


# ---------------------------------------------------------------------------
# linear information expressions

def _subset_key(s: frozenset) -> tuple:
    return tuple(sorted(s))


@dataclass(frozen=True)
class InfoExpression:
    """
    Linear combination sum_k c_k H(subset_k) with exact rational coefficients.

    The term tuple is kept canonical: subsets sorted, no repeats, no zero
    coefficients, no empty subsets.
    """

    terms: tuple[tuple[Fraction, frozenset], ...] = ()

    @classmethod
    def from_mapping(cls, m: Mapping[frozenset, Fraction]) -> "InfoExpression":
        items = [(Fraction(c), frozenset(s)) for s, c in m.items() if c != 0 and len(s) > 0]
        items.sort(key=lambda t: _subset_key(t[1]))
        return cls(tuple(items))

    def as_dict(self) -> dict[frozenset, Fraction]:
        return {s: c for c, s in self.terms}

    @property
    def variables(self) -> frozenset:
        out = set()
        for _, s in self.terms:
            out |= s
        return frozenset(out)

    def __add__(self, other: "InfoExpression") -> "InfoExpression":
        d = self.as_dict()
        for c, s in other.terms:
            d[s] = d.get(s, Fraction(0)) + c
        return InfoExpression.from_mapping(d)

    def __neg__(self) -> "InfoExpression":
        return InfoExpression(tuple((-c, s) for c, s in self.terms))

    def __sub__(self, other: "InfoExpression") -> "InfoExpression":
        return self + (-other)

    def __mul__(self, k) -> "InfoExpression":
        k = Fraction(k)
        return InfoExpression.from_mapping({s: k * c for c, s in self.terms})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def substitute(self, roles: Mapping[str, Iterable[str]]) -> "InfoExpression":
        """Replace each variable by a set of variables (names absent from `roles` stay)."""
        roles = {k: frozenset(_as_names(v)) for k, v in roles.items()}
        d: dict[frozenset, Fraction] = {}
        for c, s in self.terms:
            new = frozenset().union(*(roles.get(n, frozenset([n])) for n in s))
            d[new] = d.get(new, Fraction(0)) + c
        return InfoExpression.from_mapping(d)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, s in self.terms:
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coef}H({','.join(_subset_key(s))})")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[1:]


def H(a, given=()) -> InfoExpression:
    """Expression for H(A | Given)."""
    a, given = frozenset(_as_names(a)), frozenset(_as_names(given))
    return InfoExpression.from_mapping({a | given: Fraction(1)}) - \
        InfoExpression.from_mapping({given: Fraction(1)})


def I(a, b, given=()) -> InfoExpression:
    """Expression for I(A; B | Given) = H(A,C) + H(B,C) - H(A,B,C) - H(C)."""
    a, b, c = (frozenset(_as_names(x)) for x in (a, b, given))
    d: dict[frozenset, Fraction] = {}
    for s, k in ((a | c, 1), (b | c, 1), (a | b | c, -1), (c, -1)):
        d[s] = d.get(s, Fraction(0)) + k
    return InfoExpression.from_mapping(d)


def eval_expression(expr: InfoExpression, pmf: JointPmf) -> float:
    """Evaluate sum_k c_k H(subset_k) on `pmf`."""
    pmf.check_names(expr.variables)
    return float(sum(float(c) * pmf.subset_entropy(s) for c, s in expr.terms))


# ---------------------------------------------------------------------------
# Gacs-Korner common part

@dataclass(frozen=True)
class CommonPart:
    """
    Maximal common function K = f(S1) = g(S2).

    `f[s1]` / `g[s2]` give the component index, or -1 for symbols of zero
    marginal probability (left undefined).
    """

    f: tuple[int, ...]
    g: tuple[int, ...]
    size: int

    @property
    def classes(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.f, self.g


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def common_part(source: JointPmf) -> CommonPart:
    """Connected components of the bipartite support graph of p(s1, s2)."""
    if len(source.variables) != 2:
        raise MeasureError("common part needs a pmf over exactly two variables")
    p = source.mass
    if not np.any(p > 0):
        raise MeasureError("source has zero mass")
    n1, n2 = p.shape
    uf = _UnionFind(n1 + n2)
    for s1, s2 in zip(*np.nonzero(p > 0)):
        uf.union(int(s1), n1 + int(s2))
    row_alive = p.sum(axis=1) > 0
    col_alive = p.sum(axis=0) > 0
    labels: dict[int, int] = {}
    f = []
    for s1 in range(n1):
        if not row_alive[s1]:
            f.append(-1)
            continue
        f.append(labels.setdefault(uf.find(s1), len(labels)))
    g = []
    for s2 in range(n2):
        if not col_alive[s2]:
            g.append(-1)
            continue
        g.append(labels[uf.find(n1 + s2)])
    return CommonPart(tuple(f), tuple(g), len(labels))


# ---------------------------------------------------------------------------
# pmf constructions

def adjoin_independent(pmf: JointPmf, w: FiniteVariable, w_dist) -> JointPmf:
    """Product extension p(...) * p(w), with W appended as the last axis."""
    if w.name in pmf.names:
        raise MeasureError(f"variable {w.name!r} already present")
    w_dist = np.asarray(w_dist, dtype=float)
    if w_dist.shape != (w.alphabet_size,):
        raise MeasureError("w_dist length does not match the alphabet of W")
    if np.any(w_dist < 0) or abs(w_dist.sum() - 1) > NORMALIZATION_TOL:
        raise MeasureError("w_dist is not a probability vector")
    mass = np.multiply.outer(pmf.mass, w_dist)
    return JointPmf(pmf.variables + (w,), mass)


def merge_variables(pmf: JointPmf, names: Sequence[str], new_name: str) -> JointPmf:
    """
    Replace `names` by one variable over their product alphabet (row-major in
    the given order). The merged axis takes the position of the first name.
    """
    names = list(names)
    pmf.check_names(names)
    if new_name in pmf.names and new_name not in names:
        raise MeasureError(f"variable {new_name!r} already present")
    rest = [n for n in pmf.names if n not in names]
    first = min(pmf.axis(n) for n in names)
    order_rest_before = [n for n in rest if pmf.axis(n) < first]
    order_rest_after = [n for n in rest if pmf.axis(n) > first]
    perm = [pmf.axis(n) for n in order_rest_before + names + order_rest_after]
    mass = np.transpose(pmf.mass, perm)
    merged = math.prod(pmf.size_of(n) for n in names)
    nb = len(order_rest_before)
    shape = mass.shape[:nb] + (merged,) + mass.shape[nb + len(names):]
    mass = mass.reshape(shape)
    by_name = {v.name: v for v in pmf.variables}
    variables = ([by_name[n] for n in order_rest_before] + [FiniteVariable(new_name, merged)]
                 + [by_name[n] for n in order_rest_after])
    return JointPmf(variables, mass, check=False)


def derive_variable(pmf: JointPmf, name: str, inputs: Sequence[str], table, size: int | None = None) -> JointPmf:
    """
    Append a deterministic function `name = table[inputs...]` as a new axis.

    Cells of `table` equal to -1 are allowed only where the inputs carry zero
    mass; they are mapped to symbol 0.
    """
    inputs = list(inputs)
    pmf.check_names(inputs)
    if name in pmf.names:
        raise MeasureError(f"variable {name!r} already present")
    table = np.asarray(table, dtype=int)
    in_shape = tuple(pmf.size_of(n) for n in inputs)
    if table.shape != in_shape:
        raise MeasureError(f"function table has shape {table.shape}, expected {in_shape}")
    marg = marginalize(pmf, inputs)
    order = [marg.axis(n) for n in inputs]
    pin = np.transpose(marg.mass, order)
    if np.any((table < 0) & (pin > 0)):
        raise MeasureError("function undefined on a symbol of positive probability")
    table = np.where(table < 0, 0, table)
    size = int(size if size is not None else table.max() + 1)
    onehot = np.zeros(in_shape + (size,))
    np.put_along_axis(onehot, table[..., None], 1.0, axis=-1)
    # broadcast the indicator over the axes of pmf
    idx = [pmf.axis(n) for n in inputs]
    perm_back = np.argsort(idx)
    onehot = np.transpose(onehot, list(perm_back) + [len(inputs)])
    shape = [1] * len(pmf.names) + [size]
    for n in inputs:
        shape[pmf.axis(n)] = pmf.size_of(n)
    onehot = onehot.reshape(shape)
    mass = pmf.mass[..., None] * onehot
    return JointPmf(pmf.variables + (FiniteVariable(name, size),), mass)


SCENARIO_NAMES = ("S1", "S2", "U0", "U1", "U2", "X", "Y1", "Y2")


def _check_conditional(arr: np.ndarray, n_cond: int, what: str) -> None:
    if np.any(arr < 0):
        raise MeasureError(f"{what} has negative entries")
    sums = arr.reshape(arr.shape[:n_cond] + (-1,)).sum(axis=-1)
    if np.any(np.abs(sums - 1) > 1e-9):
        bad = np.argwhere(np.abs(sums - 1) > 1e-9)[0]
        raise MeasureError(f"{what} slice {tuple(int(i) for i in bad)} is not normalized")


def compose_scenario(source: JointPmf, aux, x_map, channel) -> JointPmf:
    """
    Joint pmf over (S1, S2, U0, U1, U2, X, Y1, Y2):

        p(s1,s2) p(u0,u1,u2|s1,s2) 1{x = x_map(s1,s2,u0,u1,u2)} p(y1,y2|x)

    `aux` has shape (S1,S2,U0,U1,U2), `x_map` integer shape (S1,S2,U0,U1,U2),
    `channel` shape (X,Y1,Y2).
    """
    if len(source.variables) != 2:
        raise MeasureError("source must be a pmf over (S1, S2)")
    aux = np.asarray(aux, dtype=float)
    channel = np.asarray(channel, dtype=float)
    x_map = np.asarray(x_map)
    if not np.issubdtype(x_map.dtype, np.integer):
        if np.all(np.mod(x_map, 1) == 0):
            x_map = x_map.astype(int)
        else:
            raise MeasureError(
                "x_map must be a deterministic integer map (s1,s2,u0,u1,u2) -> x; "
                "fold any randomness of p(x|...) into an auxiliary variable")
    n1, n2 = source.shape
    if aux.ndim != 5 or aux.shape[:2] != (n1, n2):
        raise MeasureError(f"aux shape {aux.shape} does not match source {(n1, n2)}")
    if x_map.shape != aux.shape:
        raise MeasureError(f"x_map shape {x_map.shape} differs from aux shape {aux.shape}")
    if channel.ndim != 3:
        raise MeasureError("channel must have shape (X, Y1, Y2)")
    nx = channel.shape[0]
    if x_map.min() < 0 or x_map.max() >= nx:
        raise MeasureError(f"x_map values must lie in [0, {nx})")
    _check_conditional(aux, 2, "aux")
    _check_conditional(channel, 1, "channel")
    joint5 = source.mass[:, :, None, None, None] * aux
    onehot = np.zeros(aux.shape + (nx,))
    np.put_along_axis(onehot, x_map[..., None], 1.0, axis=-1)
    joint6 = joint5[..., None] * onehot
    mass = joint6[..., None, None] * channel.reshape((1,) * 5 + channel.shape)
    return JointPmf.from_array(SCENARIO_NAMES, mass)
