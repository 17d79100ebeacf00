import math

import numpy as np
import pytest
from hypothesis import given, settings

from corrbc.measures import JointPmf, common_part, mutual_information
from corrbc.regions import (
    AuxiliarySpec,
    RateTriple,
    RegionError,
    ScenarioSpec,
    augment_common,
    augment_with_w,
    bridging_m,
    check_more_capable,
    check_rates,
    compare_thm2_hc,
    compose,
    degraded_instance,
    discarded_bounds,
    eval_covering_rates,
    eval_decoding_rates,
    eval_superposition_rates,
    eval_theorem1_hc,
    eval_theorem2,
    fm_report,
    gray_wyner_instance,
    marton_construction,
    rate_region_feasible,
    search_feasible_aux,
    source_conditions_exact,
    specialize_degraded,
    specialize_gray_wyner,
    specialize_marton,
    u0_cardinality_bound,
)

from helpers import (
    ber02_scenario,
    block_scenario,
    constant_aux,
    dirichlet,
    identity_scenario,
    noiseless,
    random_scenario,
    seeds,
)
import oracles

H02 = float(oracles.binary_entropy_decimal("0.2"))


def bsc(p):
    return np.array([[1 - p, p], [p, 1 - p]])


def bec(e):
    return np.array([[1 - e, e, 0], [0, e, 1 - e]])


def pair(w1, w2):
    return w1[:, :, None] * w2[:, None, :]


# -- input validation ---------------------------------------------------------

def test_scenario_validation():
    with pytest.raises((RegionError, ValueError)):
        ScenarioSpec.from_arrays([[0.5, 0.6]], noiseless(2))
    with pytest.raises((RegionError, ValueError)):
        ScenarioSpec.from_arrays([[1.0]], np.full((2, 2, 2), 0.3))
    scen, aux = identity_scenario(2)
    bad = aux.x_map.copy()
    bad[0, 0, 0, 0, 0] = 5
    with pytest.raises((RegionError, ValueError)):
        compose(scen, AuxiliarySpec(aux.aux, bad))
    with pytest.raises((RegionError, ValueError)):
        RateTriple(-1, 0, 0)


# -- Theorem 2 evaluation ------------------------------------------------------

def test_ber02_margins():
    rep = eval_theorem2(*ber02_scenario())
    assert rep.names == ("S1", "S2", "KM1", "KM2", "KM3")
    expect = [1 - H02, 1.0, 1 - H02, 1 - H02, 1 - H02]
    assert rep.margins == pytest.approx(expect, abs=1e-9)
    assert rep.satisfied
    assert rep.row("S1").lhs == pytest.approx(H02, abs=1e-12)


def test_singleton_scenario_fails_strictly():
    scen = ScenarioSpec.from_arrays([[1.0]], noiseless(2))
    rep = eval_theorem2(scen, constant_aux(1, 1))
    assert all(r.lhs == 0 and abs(r.rhs) < 1e-12 for r in rep)
    assert not rep.satisfied            # 0 < 0 is false


@given(seeds)
def test_theorem2_against_independent_formula(seed):
    rng = np.random.default_rng(seed)
    scen, aux = random_scenario(rng)
    pmf = compose(scen, aux)
    rep = eval_theorem2(scen, aux)
    m = pmf.mass
    idx = dict(zip(pmf.names, range(8)))
    def mi(a, b, c=()):
        return oracles.cond_mi_bits(m, [idx[x] for x in a], [idx[x] for x in b], [idx[x] for x in c])
    s1 = mi(["U0", "U1", "S1"], ["Y1"]) - mi(["U0", "U1"], ["S2"], ["S1"])
    assert rep.row("S1").rhs == pytest.approx(s1, abs=1e-9)
    mix = mi(["U1", "S1"], ["U2", "S2"], ["U0"])
    km3 = (mi(["U0", "U1", "S1"], ["Y1"]) + mi(["U0", "U2", "S2"], ["Y2"]) - mix
           - mi(["S1", "S2"], ["U0"]))
    assert rep.row("KM3").rhs == pytest.approx(km3, abs=1e-9)


@given(seeds)
def test_joint_rows_equal_fm_rows_shifted_by_source_dependence(seed):
    # KMj in joint-entropy form equals the matching eliminated row minus I(S1;S2)
    rng = np.random.default_rng(seed)
    scen, aux = random_scenario(rng, sizes=(2, 3))
    t2, fm = eval_theorem2(scen, aux), fm_report(scen, aux)
    iss = mutual_information(scen.source, "S1", "S2")
    pairs = {"S1": "H1 < v9 - v4", "S2": "H2 < v11 - v5", "KM1": "H1 + H2 < v9 + v10 - v7",
             "KM2": "H1 + H2 < v8 + v11 - v7", "KM3": "H1 + H2 < v9 + v11 - v7 - v1"}
    from corrbc.polytope import parse_row
    by_row = {parse_row(r.name): r for r in fm.rows}
    for name, text in pairs.items():
        r = by_row[parse_row(text)]
        assert r.margin == pytest.approx(t2.row(name).margin, abs=1e-9)
        shift = 0.0 if name in ("S1", "S2") else iss
        assert r.rhs - t2.row(name).rhs == pytest.approx(shift, abs=1e-9)


# -- common part -----------------------------------------------------------------

def test_hc_equals_theorem2_without_common_part():
    rng = np.random.default_rng(3)
    for _ in range(5):
        scen, aux = random_scenario(rng, sizes=(3, 3))
        assert common_part(scen.source).size == 1
        assert eval_theorem1_hc(scen, aux).margins == pytest.approx(eval_theorem2(scen, aux).margins, abs=1e-10)


@given(seeds)
@settings(max_examples=15)
def test_hc_is_theorem2_with_common_part_in_u0(seed):
    scen, aux = block_scenario(np.random.default_rng(seed))
    assert common_part(scen.source).size == 2
    hc = eval_theorem1_hc(scen, aux)
    t2 = eval_theorem2(scen, augment_common(aux, scen.source))
    assert hc.margins == pytest.approx(t2.margins, abs=1e-10)


@given(seeds)
@settings(max_examples=15)
def test_hc_dominates(seed):
    scen, aux = block_scenario(np.random.default_rng(seed))
    assert all(d.dominated for d in compare_thm2_hc(scen, aux))


# -- separate-scheme bounds --------------------------------------------------------

def test_covering_bounds_examples():
    scen, aux = identity_scenario(2)
    cov = {b.name: b.value for b in eval_covering_rates(scen, aux)}
    assert cov["R0"] == pytest.approx(1.0, abs=1e-12)
    assert cov["R1"] == pytest.approx(0.0, abs=1e-12) and cov["R2"] == pytest.approx(0.0, abs=1e-12)
    assert cov["R0+R1+R2"] == pytest.approx(1.0, abs=1e-12)
    scen = ScenarioSpec.from_arrays(np.full((2, 2), 0.25), noiseless(2))
    assert all(abs(b.value) < 1e-12 for b in eval_covering_rates(scen, constant_aux(2, 2)))


def test_decoding_bounds_examples():
    scen, aux = identity_scenario(2)
    dec = {b.name: b.value for b in eval_decoding_rates(scen, aux)}
    assert dec["dec1"] == pytest.approx(1.0, abs=1e-12)
    assert dec["dec2"] == pytest.approx(2.0, abs=1e-12)
    assert dec["dec3"] == pytest.approx(1.0, abs=1e-12)
    assert dec["dec4"] == pytest.approx(2.0, abs=1e-12)


def test_check_rates_reports_zero_bounds_as_unsatisfied():
    scen, aux = identity_scenario(2)
    cov = eval_covering_rates(scen, aux)
    rep = check_rates(cov, RateTriple(1.2, 0, 0))
    assert rep.row("R0").satisfied and rep.row("R0+R1").satisfied
    assert not rep.row("R1").satisfied        # 0 < 0
    assert check_rates(cov, RateTriple(1.2, 0.1, 0.1)).satisfied


def test_superposition_bounds():
    scen, aux = identity_scenario(2)
    cov, dec = eval_superposition_rates(scen, aux)
    cov = {b.name: b.value for b in cov}
    assert cov["R0"] == pytest.approx(1.0) and cov["R0+R1+R2"] == pytest.approx(1.0)
    assert {b.name for b in dec} == {"dec1b", "dec2b", "dec3b.1", "dec3b.2"}
    scen = ScenarioSpec.from_arrays(np.full((2, 2), 0.25), noiseless(2))
    cov, _ = eval_superposition_rates(scen, constant_aux(2, 2))
    assert all(abs(b.value) < 1e-12 for b in cov)


# -- feasibility of the rate system -----------------------------------------------

def test_rate_region_feasible_examples():
    assert not rate_region_feasible([0] * 7, [0] * 4, 0, 0)
    scen, aux = ber02_scenario()
    cov, dec = eval_covering_rates(scen, aux), eval_decoding_rates(scen, aux)
    res = rate_region_feasible(cov, dec, H02, 0.0)
    assert res and len(res.exact_rates) == 3
    with pytest.raises(RegionError):
        rate_region_feasible([0] * 6, [0] * 4, 0, 0)
    with pytest.raises(RegionError):
        rate_region_feasible([math.inf] + [0] * 6, [0] * 4, 0, 0)


@given(seeds)
def test_feasible_points_satisfy_eliminated_rows(seed):
    # arbitrary bound values need not obey the v-relations, so only one direction holds
    rng = np.random.default_rng(seed)
    cov = rng.uniform(0, 2, 7).tolist()
    dec = rng.uniform(0, 3, 4).tolist()
    h1, h2 = rng.uniform(0, 2, 2).tolist()
    if rate_region_feasible(cov, dec, h1, h2):
        assert all(ok for _, ok in source_conditions_exact(cov, dec, h1, h2))


@given(seeds)
@settings(max_examples=25)
def test_feasibility_matches_eliminated_rows_on_scenarios(seed):
    from corrbc.measures import entropy
    rng = np.random.default_rng(seed)
    scen, aux = random_scenario(rng, ny=(3, 3), cards=(2, 3, 2))
    pmf = compose(scen, aux)
    cov = [b.value for b in eval_covering_rates(scen, aux)]
    dec = [b.value for b in eval_decoding_rates(scen, aux)]
    h1, h2 = entropy(pmf, "S1"), entropy(pmf, "S2")
    rows = source_conditions_exact(cov, dec, h1, h2)
    assert bool(rate_region_feasible(cov, dec, h1, h2)) == all(ok for _, ok in rows)
    rep = fm_report(scen, aux)
    if min(abs(m) for m in rep.margins) > 1e-9:
        assert rep.satisfied == all(ok for _, ok in rows)


# -- W augmentation ------------------------------------------------------------------

@given(seeds)
@settings(max_examples=15)
def test_w_augmentation_invariants(seed):
    rng = np.random.default_rng(seed)
    scen, aux = random_scenario(rng)
    m = 3
    big = augment_with_w(aux, m)
    assert big.cardinalities == tuple(m * c for c in aux.cardinalities)
    # every remaining Theorem-2 row is unchanged
    assert eval_theorem2(scen, big).margins == pytest.approx(eval_theorem2(scen, aux).margins, abs=1e-9)
    # the discarded rows gain exactly log2 m
    before, after = discarded_bounds(scen, aux), discarded_bounds(scen, big)
    for k in before:
        assert after[k] - before[k] == pytest.approx(math.log2(m), abs=1e-9)


def test_bridging_lifts_discarded_rows():
    rng = np.random.default_rng(11)
    for _ in range(5):
        scen, aux = random_scenario(rng)
        m = bridging_m(scen, aux)
        assert m >= 2
        assert all(v > 0 for v in discarded_bounds(scen, augment_with_w(aux, m)).values())
    with pytest.raises(RegionError):
        augment_with_w(aux, 0)


# -- specializations ---------------------------------------------------------------

def _marton_inputs(rng):
    ch = dirichlet(rng, (2, 2, 2), 1)
    au = dirichlet(rng, (2, 2, 2), 0)
    xu = rng.integers(0, 2, size=(2, 2, 2))
    return ch, au, xu


def test_marton_deterministic_channel():
    ch = noiseless(2)
    au = np.zeros((2, 1, 1))
    au[:, 0, 0] = 0.5
    xu = np.zeros((2, 1, 1), dtype=int)
    xu[1] = 1
    rep = specialize_marton(ch, au, xu)
    assert rep.row("R0+R1").rhs == pytest.approx(1.0)
    assert rep.row("R0+R2").rhs == pytest.approx(1.0)
    assert rep.row("2R0+R1+R2").rhs == pytest.approx(2.0)


@given(seeds)
@settings(max_examples=10)
def test_marton_recovered_with_common_message_in_u0(seed):
    ch, au, xu = _marton_inputs(np.random.default_rng(seed))
    scen, aux, rates = marton_construction(ch, au, xu, with_common=True)
    assert eval_theorem2(scen, aux).margins == pytest.approx(
        specialize_marton(ch, au, xu, rates).margins, abs=1e-9)


def test_marton_literal_substitution_differs_by_common_rate():
    ch, au, xu = _marton_inputs(np.random.default_rng(5))
    scen, aux, rates = marton_construction(ch, au, xu, with_common=False)
    diff = np.array(eval_theorem2(scen, aux).margins) - specialize_marton(ch, au, xu, rates).margins
    assert diff == pytest.approx([0, 0, -rates.r0, -rates.r0, 0], abs=1e-9)


@given(seeds)
@settings(max_examples=10)
def test_gray_wyner_rows(seed):
    rng = np.random.default_rng(seed)
    src = JointPmf.from_array(("S1", "S2"), dirichlet(rng, (2, 2), 0))
    vc = dirichlet(rng, (2, 2, 3), 2)
    scen, aux, rates = gray_wyner_instance(src, vc, (2, 2, 4))
    four, three = specialize_gray_wyner(src, vc, rates)
    t2 = np.array(eval_theorem2(scen, aux).margins)
    g = np.array(four.margins)
    # S1 -> R0+R1, S2 -> R0+R2, KM1 and KM2 -> R0+R1+R2, KM3 -> 2R0+R1+R2
    assert t2 == pytest.approx(g[[0, 1, 2, 2, 3]], abs=1e-9)
    # the three canonical rows imply the four
    if three.satisfied:
        assert four.satisfied


def test_gray_wyner_extreme_descriptions():
    src = JointPmf.from_array(("S1", "S2"), np.array([[0.4, 0.1], [0.1, 0.4]]))
    full = np.zeros((2, 2, 4))
    for a in range(2):
        for b in range(2):
            full[a, b, 2 * a + b] = 1.0
    _, three = specialize_gray_wyner(src, full, RateTriple(2, 0, 0))
    assert three.row("R1").lhs == pytest.approx(0.0, abs=1e-12)
    assert three.row("R0").lhs == pytest.approx(1 + float(oracles.binary_entropy_decimal("0.2")), abs=1e-9)
    _, three = specialize_gray_wyner(src, np.ones((2, 2, 1)), RateTriple(0, 1, 1))
    assert three.row("R0").lhs == pytest.approx(0.0, abs=1e-12)
    assert three.row("R1").lhs == pytest.approx(1.0)


@given(seeds)
@settings(max_examples=10)
def test_degraded_rows(seed):
    rng = np.random.default_rng(seed)
    src = JointPmf.from_array(("S1", "S2"), dirichlet(rng, (2, 3), 0))
    ch = dirichlet(rng, (3, 2, 3), 1)
    ux = dirichlet(rng, (2, 3), 0)
    scen, aux = degraded_instance(src, ch, ux)
    t2 = np.array(eval_theorem2(scen, aux).margins)
    k = np.array(specialize_degraded(src, ch, ux).margins)
    # S1 -> k1.3, S2 -> k1.1, KM1 -> k1.3, KM2 -> k1.2, KM3 -> k1.1 + k1.3 (margins)
    assert t2[[0, 1, 2, 3]] == pytest.approx(k[[2, 0, 2, 1]], abs=1e-9)
    assert t2[4] == pytest.approx(k[0] + k[2], abs=1e-9)


def test_degraded_noiseless_example():
    src = JointPmf.from_array(("S1", "S2"), np.full((2, 2), 0.25))
    ux = np.array([[0.5, 0.5]])
    rep = specialize_degraded(src, noiseless(2), ux)
    assert [r.rhs for r in rep] == pytest.approx([0.0, 1.0, 1.0], abs=1e-12)


# -- more capable -------------------------------------------------------------------

def test_more_capable_examples():
    yes = check_more_capable(pair(np.eye(2), bec(0.5)))
    assert yes.more_capable and yes.gap >= -1e-9
    same = check_more_capable(pair(bsc(0.1), bsc(0.1)))
    assert same.more_capable and same.gap == pytest.approx(0.0, abs=1e-9)
    no = check_more_capable(pair(bsc(0.11), bec(0.6)))
    assert not no.more_capable and no.gap < -0.005
    assert no.witness.sum() == pytest.approx(1.0)
    assert "not more capable" in str(no)


def test_more_capable_gap_matches_grid_oracle():
    ch = pair(bsc(0.11), bec(0.6))
    w1, w2 = ch.sum(axis=2), ch.sum(axis=1)
    def _mi(j):
        px, py = j.sum(1), j.sum(0)
        nz = j > 0
        return float((j[nz] * np.log2(j[nz] / np.outer(px, py)[nz])).sum())
    grid = min(_mi(np.array([p, 1 - p])[:, None] * w1) - _mi(np.array([p, 1 - p])[:, None] * w2)
               for p in np.linspace(1e-6, 1 - 1e-6, 4001))
    assert check_more_capable(ch).gap == pytest.approx(grid, abs=1e-6)


# -- search ----------------------------------------------------------------------------

def test_search_finds_ber02_aux_and_is_reproducible():
    scen, _ = ber02_scenario()
    a = search_feasible_aux(scen, (2, 2, 1), budget=1200, seed=0)
    b = search_feasible_aux(scen, (2, 2, 1), budget=1200, seed=0)
    assert a.min_margin >= 0.27
    assert a.report.margins == b.report.margins
    assert np.array_equal(a.aux.aux, b.aux.aux)
    assert a.evaluations <= 1200


def test_search_validation_and_cardinality_bound():
    scen, _ = ber02_scenario()
    with pytest.raises(RegionError):
        search_feasible_aux(scen, (0, 1, 1))
    assert u0_cardinality_bound(scen) == min(2 * 2 * 1 + 4, 2 * 2 * 2 * 1 + 4)
