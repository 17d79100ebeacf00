import itertools

import pytest

from corrbc.polytope import eliminate_all, equivalent, parse_row
from corrbc.systems import (
    RATES,
    discarded_conditions,
    rate_system,
    run_pipeline,
    source_conditions,
    v_relations,
)


def test_fixture_shapes():
    assert len(rate_system()) == 11
    assert len(v_relations()) == 11
    assert len(source_conditions()) == 8
    assert parse_row("H1 < v9 - v4") in source_conditions().rows
    assert set(discarded_conditions().rows) <= set(source_conditions().rows)


def test_pipeline_reproduces_the_eight_rows():
    res = run_pipeline()
    assert res.matches, (res.missing(), res.extra())
    assert res.seconds < 5


@pytest.mark.parametrize("order", list(itertools.permutations(RATES)))
def test_every_order_gives_the_same_rows(order):
    assert set(run_pipeline(order).reduced.rows) == set(source_conditions().rows)


def test_without_relations_the_reduction_still_matches():
    assert run_pipeline(with_relations=False).matches


def test_raw_elimination_is_equivalent_given_relations():
    raw = eliminate_all(rate_system(), RATES)
    assert equivalent(raw.rows, source_conditions().rows, v_relations().rows)
    # without the relations the raw projection is strictly smaller
    assert not equivalent(raw.rows, source_conditions().rows)
