import json
from fractions import Fraction

import pytest

from conftest import automaton, tess
from tessfault.analysis import make_flow, verify_flows
from tessfault.errors import BalanceViolated, OutsidePositiveRegion
from tessfault.tessellation import INF

# (family, r, s, M, {class: (worst in-flow, worst out-flow)}) from the published arithmetic
PUBLISHED = {
    (INF, 5): ("tree", 1, 1, 2, {"one-parent": (1, 2)}),
    (4, 7): ("square", 2, 6, 4, {"one-parent": (3, 5), "two-parent": (4, 6)}),
    (4, 8): ("square", 2, 6, 4, {"one-parent": (3, 5), "two-parent": (4, 6)}),
    (3, 9): ("triangle", 1, 6, 7, {"one-parent": (5, 6), "two-parent": (6, 7)}),
    (6, 5): ("even", 1, 3, 4, {"one-parent": (3, 4), "two-parent": (2, 3)}),
    (5, 5): (
        "odd",
        1,
        9,
        10,
        {
            "one-parent": (9, 10),
            "two-parent": (8, 9),
            "strong-cousin": (9, 10),
            "weak-cousin/strong-cousin": (8, 9),
            "weak-cousin/weak-cousin": (8, 9),
        },
    ),
}
PUBLISHED[(7, 5)] = PUBLISHED[(5, 5)]


@pytest.mark.parametrize("pq", list(PUBLISHED))
def test_analytic_rows(pq):
    fam, r, s, M, rows = PUBLISHED[pq]
    f = make_flow(*pq)
    assert f.family == fam and (f.r, f.s, f.M) == (r, s, Fraction(M))
    for cls, (i, o) in rows.items():
        b = f.classes[cls]
        assert (b.in_max, b.out_min, b.net) == (i, o, o - i)


@pytest.mark.parametrize("pq", list(PUBLISHED))
def test_instance(pq):
    G = 7 if pq[0] in (5, 7) else 5
    t = tess(*pq, G)
    rep = verify_flows(t, automaton(*pq, G, "auto"), make_flow(*pq))
    assert rep.passed, rep.violations[:3]
    rep.raise_if_failed()
    assert set(rep.observed) <= set(rep.flow.classes)
    assert json.loads(rep.to_json())["passed"]


def test_large_odd_faces_have_only_weak_cousins():
    # with p = 7 every cousin hangs off a strong one-parent vertex
    rep = verify_flows(tess(7, 5, 7), automaton(7, 5, 7, "auto"), make_flow(7, 5))
    assert set(rep.observed) == {"origin", "one-parent", "weak-cousin/weak-cousin"}


def test_odd_classes_all_observed():
    rep = verify_flows(tess(5, 5, 7), automaton(5, 5, 7, "auto"), make_flow(5, 5))
    assert set(rep.observed) == set(rep.flow.classes)


def test_flow_requires_weakening():
    with pytest.raises(ValueError):
        verify_flows(tess(4, 7, 4), automaton(4, 7, 4), make_flow(4, 7))


def test_outside_region():
    for p, q in [(4, 6), (3, 8), (INF, 4)]:
        with pytest.raises(OutsidePositiveRegion):
            make_flow(p, q)


def test_broken_values_are_reported():
    f = make_flow(4, 7)
    f.values["special"] = 3  # flattening the special edges starves two-parent vertices
    rep = verify_flows(tess(4, 7, 5), automaton(4, 7, 5, "auto"), f)
    assert not rep.passed
    with pytest.raises(BalanceViolated):
        rep.raise_if_failed()
