import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tess
from tessfault.addressing import (
    AddressingScheme,
    build_scheme,
    color_square,
    color_tree,
    color_triangle,
    compute_norms,
    mutate,
    sector_of_edges,
    verify_local,
    verify_spi,
)
from tessfault.addressing import _spoke_trace
from tessfault.errors import NotInvariant, WrongFamily
from tessfault.tessellation import INF, EdgeKind, strip_sibling_edges


def _incident_distinct(t, scheme):
    for v in range(t.num_vertices):
        cs = [scheme.colors[e] for e in t.incident_edges[v] if scheme.colors[e] >= 0]
        assert len(cs) == len(set(cs))


# --------------------------------------------------------------------------
# trees


def test_tree_origin_colors():
    t = tess(INF, 3, 3)
    s = color_tree(t)
    assert sorted(s.colors[t.edge_between(0, c)] for c in t.children[0]) == [0, 1, 2]


def test_tree_parent_color_absent_from_children():
    t = tess(INF, 4, 4)
    s = color_tree(t)
    for v in range(1, t.num_vertices):
        up = s.colors[t.edge_between(v, t.parents[v][0])]
        assert all(s.colors[t.edge_between(v, c)] != up for c in t.children[v])


@pytest.mark.parametrize("q", [3, 4, 5, 6])
def test_tree_spi(q):
    t = tess(INF, q, 6)
    assert verify_spi(t, color_tree(t)).passed


def test_wrong_family():
    with pytest.raises(WrongFamily):
        color_tree(tess(4, 5, 2))
    with pytest.raises(WrongFamily):
        color_square(tess(INF, 3, 2))
    with pytest.raises(WrongFamily):
        color_triangle(tess(4, 5, 2))
    with pytest.raises(WrongFamily):
        build_scheme(tess(5, 5, 2))


# --------------------------------------------------------------------------
# squares


@pytest.mark.parametrize("q", [5, 6, 7])
def test_square_local_conditions(q):
    t = tess(4, q, 5)
    s = color_square(t)
    _incident_distinct(t, s)
    for f in t.faces:
        es = [s.colors[t.edge_between(f[i], f[(i + 1) % 4])] for i in range(4)]
        assert es[0] == es[2] and es[1] == es[3]
    assert verify_local(t, s).passed


def test_square_origin_counterclockwise():
    # children are listed clockwise, so counterclockwise 0, 1, ..., q-1 reads 0, q-1, ..., 1
    t = tess(4, 5, 2)
    s = color_square(t)
    got = [int(s.colors[t.edge_between(0, c)]) for c in t.children[0]]
    assert got == [0, 4, 3, 2, 1]


def test_swapped_colors_break_distinctness():
    t = tess(4, 6, 4)
    s = color_square(t)
    v = t.children[0][0]
    e1 = t.edge_between(v, t.children[v][0])
    colors = s.colors.copy()
    colors[e1] = colors[t.edge_between(0, v)]
    res = verify_local(t, AddressingScheme(s.l, colors))
    assert any(x.rule == "distinct" for x in res.violations)


@pytest.mark.parametrize("q", [5, 6, 7])
def test_square_spi(q):
    t = tess(4, q, 6)
    assert verify_spi(t, color_square(t)).passed


# --------------------------------------------------------------------------
# triangles


@pytest.mark.parametrize("q", [7, 8, 9])
def test_triangle_partial_and_local(q):
    t = tess(3, q, 5)
    s = color_triangle(t)
    pc = t.edge_kind == EdgeKind.PARENT_CHILD
    assert (s.colors[pc] >= 0).all() and (s.colors[~pc] < 0).all()
    _incident_distinct(t, s)
    assert verify_local(t, s).passed


@pytest.mark.parametrize("q", [7, 8, 9])
def test_triangle_spi(q):
    t = tess(3, q, 6 if q < 9 else 5)
    assert verify_spi(t, color_triangle(t)).passed


@pytest.mark.parametrize("q", [7, 8, 9, 10])
def test_triangle_sectors_are_shifted_copies(q):
    # rotating by one sector maps the coloring to itself shifted by one color
    t = tess(3, q, 5)
    s = color_triangle(t)
    sizes = t.generation_sizes()
    w = [0] + [n // q for n in sizes[1:]]

    def rot(v):
        if v == 0:
            return 0
        g = int(t.generation[v])
        return int(t.generations[g][(int(t.position[v]) - w[g]) % sizes[g]])

    sec = sector_of_edges(t)
    for e, (a, b) in enumerate(t.edges.tolist()):
        if t.edge_kind[e] != EdgeKind.PARENT_CHILD:
            continue
        e2 = t.edge_between(rot(a), rot(b))
        assert s.colors[e2] == (s.colors[e] + 1) % q
        assert sec[e2] == (sec[e] + 1) % q


@pytest.mark.parametrize("q,r", [(8, 4), (10, 5)])
def test_triangle_even_spoke_alternates(q, r):
    t = tess(3, q, 6)
    s = color_triangle(t)
    _, on = _spoke_trace(strip_sibling_edges(t), q - 2)
    path = [v for v in on if v >= 0]
    cols = [int(s.colors[t.edge_between(a, b)]) for a, b in zip(path, path[1:])]
    assert cols == [0 if i % 2 == 0 else r - 1 for i in range(len(cols))]


# --------------------------------------------------------------------------
# norms and the oracle


def test_norms_origin_and_first_edge():
    t = tess(4, 5, 3)
    s = color_square(t)
    n = compute_norms(t, s)
    assert (n[0] == 0).all()
    c = t.children[0][0]
    k = int(s.colors[t.edge_between(0, c)])
    expect = np.zeros(s.l + 1, dtype=int)
    expect[0] = 1
    expect[k + 1] = 1
    assert np.array_equal(n[c], expect)


@pytest.mark.parametrize("pq", [(INF, 4), (4, 5), (3, 7)])
def test_norm_identity(pq):
    t = tess(*pq, 5)
    n = compute_norms(t, build_scheme(t))
    assert np.array_equal(n[:, 0], n[:, 1:].sum(axis=1))
    assert np.array_equal(n[:, 0], t.generation)


def test_mutations_detected_with_witnesses():
    t = tess(4, 5, 6)
    s = color_square(t)
    rng = np.random.default_rng(7)
    mutant, picks = mutate(s, rng, count=5)
    res = verify_spi(t, mutant)
    assert not res.passed
    v = res.violations[0]
    assert len(v.path_a) == len(v.path_b) == t.generation[v.vertex]
    with pytest.raises(NotInvariant):
        compute_norms(t, mutant)


def test_scheme_json_round_trip():
    t = tess(4, 5, 3)
    s = color_square(t)
    d = s.to_dict(t)
    back = AddressingScheme.from_dict(d, t.num_edges)
    assert np.array_equal(back.colors, s.colors)
    assert d["norms"][0] == [0] * (s.l + 1)


@given(st.sampled_from([(INF, 3), (INF, 5), (4, 5), (4, 6), (3, 7), (3, 8)]), st.integers(1, 4))
def test_property_spi_implies_norms(pq, G):
    t = tess(*pq, G)
    s = build_scheme(t)
    assert verify_spi(t, s).passed
    n = compute_norms(t, s)
    assert np.array_equal(n[:, 0], n[:, 1:].sum(axis=1))


@given(st.integers(0, 2**32 - 1))
def test_property_single_recolor_of_interior_edge_detected(seed):
    # a recolored edge between two interior vertices breaks invariance somewhere
    t = tess(4, 5, 5)
    s = color_square(t)
    eligible = [e for e, (a, b) in enumerate(t.edges.tolist()) if t.interior[a] and t.interior[b]]
    mutant, _ = mutate(s, np.random.default_rng(seed), 1, eligible)
    assert not (verify_spi(t, mutant).passed and verify_local(t, mutant).passed)
