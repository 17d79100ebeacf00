"""
The rate systems of the separate source-channel scheme in v-variable form,
and the elimination workflow that turns them into conditions on H1, H2.

Variable names: ``H1 = H(S1)``, ``H2 = H(S2)``, ``R0, R1, R2`` for the
codebook rates and ``v1..v11`` for the information quantities defined in
:data:`corrbc.itp.V_DEFINITIONS`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .polytope import LinSystem, eliminate_all, parse_system, remove_redundant

RATES = ("R0", "R1", "R2")
V_NAMES = tuple(f"v{i}" for i in range(1, 12))
VARIABLES = ("H1", "H2") + RATES + V_NAMES

RATE_SYSTEM_TEXT = """\
R0 > v1
R1 > v2
R2 > v3
R0 + R1 > v4
R0 + R2 > v5
R1 + R2 > v6
R0 + R1 + R2 > v7
H1 + R1 < v8
H1 + R0 + R1 < v9
H2 + R2 < v10
H2 + R0 + R2 < v11
"""

V_RELATIONS_TEXT = """\
v1 >= 0
v2 >= 0
v3 >= 0
v1 + v2 <= v4
v1 + v3 <= v5
v2 + v3 <= v6
v4 + v6 <= v2 + v7
v4 + v5 <= v1 + v7
v5 + v6 <= v3 + v7
v8 <= v9
v10 <= v11
"""

# expected outcome of the elimination; kept verbatim as a golden fixture
SOURCE_CONDITIONS_TEXT = """\
H1 < v9 - v4
H1 < v8 - v2
H2 < v11 - v5
H2 < v10 - v3
H1 + H2 < v9 + v10 - v7
H1 + H2 < v8 + v11 - v7
H1 + H2 < v8 + v10 - v6
H1 + H2 < v9 + v11 - v7 - v1
"""

# the three rows that the W-augmentation argument shows to be inactive
DISCARDED_TEXT = """\
H1 < v8 - v2
H2 < v10 - v3
H1 + H2 < v8 + v10 - v6
"""


def rate_system() -> LinSystem:
    return parse_system(RATE_SYSTEM_TEXT, VARIABLES)


def v_relations() -> LinSystem:
    return parse_system(V_RELATIONS_TEXT, VARIABLES)


def source_conditions() -> LinSystem:
    return parse_system(SOURCE_CONDITIONS_TEXT, ("H1", "H2") + V_NAMES)


def discarded_conditions() -> LinSystem:
    return parse_system(DISCARDED_TEXT, ("H1", "H2") + V_NAMES)


@dataclass(frozen=True)
class PipelineResult:
    raw: LinSystem               # right after elimination, duplicates removed
    reduced: LinSystem           # rows involving H1 or H2 after redundancy removal
    expected: LinSystem
    seconds: float

    @property
    def matches(self) -> bool:
        return set(self.reduced.rows) == set(self.expected.rows)

    def missing(self):
        return sorted(set(self.expected.rows) - set(self.reduced.rows), key=lambda r: r.sort_key())

    def extra(self):
        return sorted(set(self.reduced.rows) - set(self.expected.rows), key=lambda r: r.sort_key())


def run_pipeline(order=RATES, with_relations: bool = True) -> PipelineResult:
    """
    Eliminate the rates from the rate system (optionally joined with the
    v-relations) and reduce. Redundancy is judged with the v-relations as
    background knowledge; rows free of H1 and H2 are then dropped, since
    they only restate facts about the v's.
    """
    t0 = time.perf_counter()
    base = rate_system()
    rel = v_relations()
    if with_relations:
        base = base.with_rows(base.rows + rel.rows)
    raw = eliminate_all(base, order)
    h_rows = [r for r in raw.rows if "H1" in r.variables or "H2" in r.variables]
    reduced = remove_redundant(raw.with_rows(h_rows), context=rel.rows)
    return PipelineResult(raw, reduced, source_conditions(), time.perf_counter() - t0)
