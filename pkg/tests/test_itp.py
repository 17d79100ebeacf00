from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrbc.itp import (
    ITPError,
    GroundSet,
    V_GROUND,
    elemental_inequalities,
    expand_v_definitions,
    functional_dependency,
    independence,
    parse_expression,
    prove,
    v_relations,
)
from corrbc.measures import H, I, eval_expression

from helpers import random_pmf, seeds
import oracles


@pytest.mark.parametrize("n", range(1, 7))
def test_elemental_count(n):
    g = GroundSet([f"X{i}" for i in range(n)])
    assert len(elemental_inequalities(g)) == oracles.elemental_count(n)


def test_elemental_small_cases():
    assert oracles.elemental_count(2) == 3 and oracles.elemental_count(3) == 9
    (only,) = elemental_inequalities(GroundSet(["X1"]))
    assert only == H("X1")


def test_ground_set_validation():
    with pytest.raises(ITPError):
        GroundSet([f"X{i}" for i in range(11)])
    with pytest.raises(ITPError):
        GroundSet(["A", "A"])
    with pytest.raises(ITPError):
        prove(I("A", "B"), ground=["A"])


def test_prove_basic():
    res = prove(I("A", "B"))
    assert res.proven and res.verdict == "Proven" and res.verify()


@pytest.mark.parametrize("sign", [1, -1])
def test_interaction_information_not_provable(sign):
    target = (I("A", "B") - I("A", "B", "C")) * sign
    res = prove(target)
    assert not res.proven and res.verdict == "NotProvable"
    assert res.verify()
    assert sum(c * res.counterexample.get(s, 0) for c, s in target.terms) < 0


def test_constraints():
    target = H("Y") - H("X")
    assert not prove(target).proven
    assert prove(target, [functional_dependency("X", "Y")]).proven
    split = H("A") + H("B") - H(["A", "B"])
    ind = independence("A", "B")
    assert prove(-split, [ind]).proven and prove(split, [ind]).proven
    assert not prove(-split).proven


def test_v_definitions_examples():
    v = expand_v_definitions()
    assert v["v1"] == I("U0", ["S1", "S2"])
    assert v["v7"] == (I("U0", ["S1", "S2"]) + I("U1", "U2", ["U0", "S1", "S2"])
                       + I("U1", ["U0", "S2"], "S1") + I("U2", ["U0", "S1"], "S2"))
    assert v["v10"] == I(["U2", "S2"], ["U0", "Y2"])
    with pytest.raises(ITPError):
        expand_v_definitions(["U0", "U1"])


def test_v_relations_all_proven():
    ground = GroundSet(V_GROUND)
    rels = v_relations()
    assert len(rels) == 11
    for line, expr in rels:
        res = prove(expr, ground=ground)
        assert res.proven and res.verify(), line


def test_first_relation_matches_chain_rule_form():
    (line, expr), *_ = [r for r in v_relations() if r[0].startswith("v1 + v2")]
    assert expr == I("U1", ["U0", "S2"], "S1") - I("U1", "S2", "S1")


def test_parse_expression():
    e, rel = parse_expression("I(U1;U0,S2|S1) - I(U1;S2|S1)")
    assert rel == ">=" and e == I("U1", ["U0", "S2"], "S1") - I("U1", "S2", "S1")
    e, rel = parse_expression("H(A) <= H(A,B)")
    assert rel == ">=" and e == H(["A", "B"]) - H("A")
    e, rel = parse_expression("I(A;B) = 0")
    assert rel == "=" and e == I("A", "B")
    e, _ = parse_expression("1/2*H(A) + 0.5 H(A)")
    assert e == H("A")
    e, _ = parse_expression("v8 <= v9", expand_v_definitions())
    v = expand_v_definitions()
    assert e == v["v9"] - v["v8"]
    for bad in ("I(A;B", "H(A) >= H(B) >= 0", "I(A)", "foo", "H(A) + ?"):
        with pytest.raises(ITPError):
            parse_expression(bad)


@st.composite
def cone_members(draw, names=("A", "B", "C", "D")):
    """Nonnegative integer combinations of elementals, plus some rewriting noise."""
    elems = elemental_inequalities(GroundSet(names))
    idx = draw(st.lists(st.integers(0, len(elems) - 1), min_size=1, max_size=5))
    out = H("A") * 0
    for i in idx:
        out = out + elems[i] * draw(st.integers(1, 3))
    return out


@given(cone_members())
def test_soundness_on_cone_members(target):
    res = prove(target, ground=["A", "B", "C", "D"])
    assert res.proven and res.verify()


@given(seeds)
def test_consistency_with_measures(seed):
    rng = np.random.default_rng(seed)
    names = ["A", "B", "C"]
    subsets = [frozenset(s) for s in ("A", "B", "C", "AB", "AC", "BC", "ABC")]
    coef = rng.integers(-2, 3, size=len(subsets))
    target = H("A") * 0
    for c, s in zip(coef, subsets):
        target = target + H(sorted(s)) * int(c)
    res = prove(target, ground=names)
    pmfs = [random_pmf(rng, names, 2, sparsity=0.3) for _ in range(200)]
    vals = [eval_expression(target, p) for p in pmfs]
    if res.proven:
        assert min(vals) >= -1e-10
    if min(vals) < -1e-6:
        assert not res.proven


def test_exact_and_auto_agree():
    targets = [I("A", "B") - I("A", "B", "C"), I("A", ["B", "C"]) - I("A", "B"),
               H(["A", "B"]) - H("A") - H("B")]
    for t in targets:
        a = prove(t, method="auto")
        b = prove(t, method="exact")
        assert a.proven == b.proven and a.verify() and b.verify()


def test_determinism():
    t = v_relations()[6][1]
    a = prove(t, ground=V_GROUND)
    b = prove(t, ground=V_GROUND)
    assert a.elemental_weights == b.elemental_weights
    assert all(isinstance(w, Fraction) for w in a.elemental_weights.values())


def test_certificate_recombines_exactly():
    res = prove(I("A", ["B", "C"]) - I("A", "C"), ground=["A", "B", "C", "D"])
    elems = elemental_inequalities(res.ground)
    total = H("A") * 0
    for i, w in res.elemental_weights.items():
        assert w >= 0
        total = total + elems[i] * w
    assert (total - res.target).is_zero()
