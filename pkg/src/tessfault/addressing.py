"""Edge colorings whose color counts along shortest paths depend only on the endpoint.

Three constructions are provided: trees ({∞,q}), square tessellations ({4,q})
and triangle tessellations ({3,q}, colored on parent-child edges only).  Two
independent checkers accompany them: ``verify_local`` tests the face/vertex
conditions that imply invariance, and ``verify_spi`` enumerates the color
distributions of shortest paths directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotInvariant, WrongFamily
from .tessellation import (
    INF,
    EdgeKind,
    Tessellation,
    TessellationSpec,
    build_tessellation,
    strip_sibling_edges,
)

MAX_REPORTED = 16
UNCOLORED = -1


@dataclass
class AddressingScheme:
    """Edge coloring with ``l`` colors; ``colors[e] == -1`` marks edges outside E'."""

    l: int
    colors: np.ndarray
    family: str = ""
    notes: list = field(default_factory=list)

    def color(self, eid):
        return int(self.colors[eid])

    @property
    def colored(self):
        return self.colors >= 0

    def to_dict(self, t: Tessellation | None = None):
        d = {
            "schema_version": 1,
            "type": "addressing",
            "family": self.family,
            "l": self.l,
            "colors": {str(i): int(c) for i, c in enumerate(self.colors) if c >= 0},
            "notes": list(self.notes),
        }
        if t is not None:
            norms = compute_norms(t, self)
            d["norms"] = norms.tolist()
        return d

    def to_json(self, t=None, **kw):
        return json.dumps(self.to_dict(t), **kw)

    @classmethod
    def from_dict(cls, d, num_edges):
        colors = np.full(num_edges, UNCOLORED, dtype=np.int64)
        for k, v in d["colors"].items():
            colors[int(k)] = v
        return cls(d["l"], colors, d.get("family", ""), list(d.get("notes", [])))


@dataclass
class SpiViolation:
    vertex: int
    path_a: list
    path_b: list

    def as_dict(self):
        return {"vertex": self.vertex, "path_a": self.path_a, "path_b": self.path_b}


@dataclass
class LocalViolation:
    rule: str  # "distinct" | "opposite" | "uncolored"
    ids: tuple
    message: str


@dataclass
class CheckResult:
    violations: list

    @property
    def passed(self):
        return not self.violations

    def __bool__(self):
        return self.passed


# --------------------------------------------------------------------------
# constructions


def color_tree(t: Tessellation) -> AddressingScheme:
    if t.p != INF or t.q < 3:
        raise WrongFamily("color_tree needs {inf,q} with q >= 3")
    q = t.q
    colors = np.full(t.num_edges, UNCOLORED, dtype=np.int64)
    up = np.full(t.num_vertices, -1, dtype=np.int64)  # color of the parent edge
    for i, c in enumerate(t.children[0]):
        e = t.edge_between(0, c)
        colors[e] = i
        up[c] = i
    for gen in t.generations[1:]:
        for v in gen.tolist():
            for i, c in enumerate(t.children[v]):
                col = (up[v] + 1 + i) % q
                colors[t.edge_between(v, c)] = col
                up[c] = col
    return AddressingScheme(q, colors, "tree")


def color_square(t: Tessellation) -> AddressingScheme:
    """Successive coloring, alternating rotational direction by generation parity."""
    if t.p != 4 or t.q < 5:
        raise WrongFamily("color_square needs {4,q} with q >= 5")
    return _successive_coloring(t, t.q)


def _successive_coloring(t, l):
    colors = np.full(t.num_edges, UNCOLORED, dtype=np.int64)
    # origin: colors 0, 1, ..., l-1 counterclockwise, i.e. child i gets -i
    for i, c in enumerate(t.children[0]):
        colors[t.edge_between(0, c)] = (-i) % l
    for g, gen in enumerate(t.generations):
        if g == 0:
            continue
        clockwise = g % 2 == 1
        for v in gen.tolist():
            ps = t.parents[v]
            kids = list(t.children[v])
            # rotation around v read in the working direction: parents first
            if clockwise:
                seq_p, seq_c = list(reversed(ps)), kids
            else:
                seq_p, seq_c = list(ps), list(reversed(kids))
            pc = [colors[t.edge_between(v, x)] for x in seq_p]
            if len(pc) == 2 and (pc[0] + 1) % l != pc[1]:
                raise NotInvariant(
                    f"parent edges of vertex {v} carry non-successive colors {pc}"
                )
            last = pc[-1]
            for i, c in enumerate(seq_c):
                colors[t.edge_between(v, c)] = (last + 1 + i) % l
    return AddressingScheme(l, colors, "square")


def _spoke_trace(t: Tessellation, Q: int):
    """Follow spoke 0 outward; return per-generation (anchor position, on-spoke vertex or -1).

    Spoke 0 leaves the origin through child 0.  When Q is even it runs
    through the middle child of each spoke vertex.  When Q is odd it crosses
    the face between the two middle children of a one-parent spoke vertex,
    reaches their merged child, and continues through that vertex's middle
    child; generations it crosses without a vertex anchor at the left vertex
    of the straddled pair.
    """
    G = t.max_generation
    anchor = [0] * (G + 1)
    onspoke = [-1] * (G + 1)
    onspoke[0] = 0
    v = t.children[0][0]
    g = 1
    while g <= G:
        anchor[g] = int(t.position[v])
        onspoke[g] = v
        kids = t.children[v]
        if g == G:
            break
        if Q % 2 == 0:
            v = kids[(Q - 2) // 2]
            g += 1
            continue
        if len(t.parents[v]) == 2:
            v = kids[(Q - 3) // 2]
            g += 1
            continue
        a, b = kids[(Q - 1) // 2 - 1], kids[(Q - 1) // 2]
        anchor[g + 1] = int(t.position[a])
        if g + 1 == G:
            break
        w = t.children[a][-1]
        if w != t.children[b][0]:
            raise NotInvariant("middle children of a spoke vertex do not share a child")
        v = w
        g += 2
    return anchor, onspoke


def _sector_maps(t, Q, sectors):
    anchor, onspoke = _spoke_trace(t, Q)
    sizes = t.generation_sizes()
    width = [0] + [n // sectors for n in sizes[1:]]
    for g in range(1, len(sizes)):
        if sizes[g] % sectors:
            raise NotInvariant(f"generation {g} does not split into {sectors} sectors")
    sector = np.full(t.num_vertices, -1, dtype=np.int64)
    offset = np.zeros(t.num_vertices, dtype=np.int64)
    on = np.zeros(t.num_vertices, dtype=bool)
    for g in range(1, len(sizes)):
        n, w = sizes[g], width[g]
        for v in t.generations[g].tolist():
            d = (anchor[g] - int(t.position[v])) % n
            sector[v] = d // w
            offset[v] = d % w
    # by rotational symmetry every spoke meets a generation at the same offset
    for g in range(1, len(sizes)):
        if onspoke[g] >= 0:
            gen = t.generations[g]
            on[gen[offset[gen] == 0]] = True
    return anchor, width, sector, offset, on


def color_triangle(t: Tessellation) -> AddressingScheme:
    """Partial scheme on parent-child edges of {3,q}, assembled from q shifted sectors of {4,q-2}."""
    if t.p != 3 or t.q < 7:
        raise WrongFamily("color_triangle needs {3,q} with q >= 7")
    q = t.q
    Q = q - 2
    base = t if t.stripped else strip_sibling_edges(t)
    sq = build_tessellation(TessellationSpec(4, Q, t.max_generation))
    if sq.max_generation != t.max_generation:
        raise NotInvariant("reference square tessellation is shallower than the input")
    sq_colors = color_square(sq).colors
    anchor4, width4, _, _, _ = _sector_maps(sq, Q, Q)
    _, width3, sector, offset, on = _sector_maps(base, Q, q)
    if width3 != width4:
        raise NotInvariant("sector widths of {3,q}' and {4,q-2} differ")
    sizes4 = sq.generation_sizes()

    def image(v, rel):
        # vertex of {4,Q} occupying the same place relative to sector ``rel``
        if v == 0:
            return 0
        g = int(base.generation[v])
        pos = (anchor4[g] - rel * width4[g] - int(offset[v])) % sizes4[g]
        return int(sq.generations[g][pos])

    colors = np.full(t.num_edges, UNCOLORED, dtype=np.int64)
    for eid, (a, b) in enumerate(t.edges.tolist()):
        if t.edge_kind[eid] != EdgeKind.PARENT_CHILD:
            continue
        ends = [x for x in (a, b) if x != 0]
        off = [x for x in ends if not on[x]]
        s = int(sector[off[0]] if off else sector[ends[0]])

        def rel(x):
            r = (int(sector[x]) - s) % q
            return r - q if r > q // 2 else r

        ia = image(a, rel(a) if a else 0)
        ib = image(b, rel(b) if b else 0)
        e4 = sq.edge_between(ia, ib)
        if e4 is None:
            raise NotInvariant(f"edge {eid} has no counterpart in the square tessellation")
        colors[eid] = (int(sq_colors[e4]) + s) % q
    return AddressingScheme(q, colors, "triangle")


def sector_of_edges(t: Tessellation):
    """Sector index of every parent-child edge of a {3,q} truncation (-1 elsewhere)."""
    base = t if t.stripped else strip_sibling_edges(t)
    _, _, sector, _, on = _sector_maps(base, t.q - 2, t.q)
    out = np.full(t.num_edges, -1, dtype=np.int64)
    for eid, (a, b) in enumerate(t.edges.tolist()):
        if t.edge_kind[eid] != EdgeKind.PARENT_CHILD:
            continue
        ends = [x for x in (a, b) if x != 0]
        off = [x for x in ends if not on[x]]
        out[eid] = sector[off[0]] if off else sector[ends[0]]
    return out


def build_scheme(t: Tessellation) -> AddressingScheme:
    """Dispatch to the construction matching the tessellation family."""
    if t.p == INF:
        return color_tree(t)
    if t.p == 4:
        return color_square(t)
    if t.p == 3:
        return color_triangle(t)
    raise WrongFamily(f"no addressing scheme for p={t.p}")


# --------------------------------------------------------------------------
# checkers


def verify_local(t: Tessellation, scheme: AddressingScheme) -> CheckResult:
    """Distinct colors around each vertex and equal colors on opposite edges of each 4-face.

    Sibling edges of a {3,q} truncation are ignored, so its faces are those of
    the stripped tessellation.
    """
    base = strip_sibling_edges(t) if (t.p == 3 and not t.stripped) else t
    col = scheme.colors
    if base is not t:
        # map stripped edge ids back to the original numbering
        col = np.array([col[t.edge_between(a, b)] for a, b in base.edges.tolist()])
    out = []
    for v in range(base.num_vertices):
        cs = [int(col[e]) for e in base.incident_edges[v] if col[e] >= 0]
        if len(cs) != len(set(cs)):
            out.append(LocalViolation("distinct", (v,), f"repeated color at vertex {v}: {sorted(cs)}"))
    for f in base.faces:
        if len(f) != 4:
            continue
        es = [base.edge_between(f[i], f[(i + 1) % 4]) for i in range(4)]
        cs = [int(col[e]) for e in es]
        if min(cs) < 0:
            out.append(LocalViolation("uncolored", f, "face has an uncolored edge"))
        elif cs[0] != cs[2] or cs[1] != cs[3]:
            out.append(LocalViolation("opposite", f, f"opposite edges differ: {cs}"))
    return CheckResult(out)


def _distributions(t: Tessellation, scheme: AddressingScheme, cap=4):
    """Per vertex: dict distribution-vector -> witness path (edge ids), at most ``cap`` entries."""
    l = scheme.l
    dists = [None] * t.num_vertices
    dists[0] = {(0,) * l: ()}
    uncolored = []
    for gen in t.generations[1:]:
        for v in gen.tolist():
            here = {}
            for par in t.parents[v]:
                e = t.edge_between(par, v)
                c = int(scheme.colors[e])
                if c < 0:
                    uncolored.append((v, e))
                    continue
                for vec, path in dists[par].items():
                    nv = list(vec)
                    nv[c] += 1
                    nv = tuple(nv)
                    if nv not in here and len(here) < cap:
                        here[nv] = path + (e,)
            dists[v] = here
    return dists, uncolored


def verify_spi(t: Tessellation, scheme: AddressingScheme) -> CheckResult:
    """Enumerate shortest-path color distributions generation by generation.

    Passes iff every vertex admits exactly one distribution.  Reports at most
    16 violations, each with two witness paths.
    """
    dists, uncolored = _distributions(t, scheme)
    out = []
    for v, e in uncolored[:MAX_REPORTED]:
        out.append(SpiViolation(v, [e], []))
    for v in range(t.num_vertices):
        if len(out) >= MAX_REPORTED:
            break
        d = dists[v]
        if d is not None and len(d) > 1:
            (pa, pb) = list(d.values())[:2]
            out.append(SpiViolation(v, list(pa), list(pb)))
    return CheckResult(out)


def compute_norms(t: Tessellation, scheme: AddressingScheme) -> np.ndarray:
    """Array of shape (V, l+1): column 0 is ‖a‖, column k+1 is ‖a‖ₖ."""
    dists, uncolored = _distributions(t, scheme, cap=2)
    if uncolored:
        v, e = uncolored[0]
        raise NotInvariant(f"shortest path to {v} uses uncolored edge {e}")
    out = np.zeros((t.num_vertices, scheme.l + 1), dtype=np.int64)
    for v, d in enumerate(dists):
        if len(d) != 1:
            raise NotInvariant(f"vertex {v} has {len(d)} shortest-path color distributions")
        vec = next(iter(d))
        out[v, 0] = t.generation[v]
        out[v, 1:] = vec
    return out


def mutate(scheme: AddressingScheme, rng, count=1, eligible=None):
    """Copy of ``scheme`` with ``count`` colored edges recolored to a different color."""
    colors = scheme.colors.copy()
    pool = np.nonzero(colors >= 0)[0] if eligible is None else np.asarray(eligible)
    picks = rng.choice(pool, size=count, replace=False)
    for e in picks:
        shift = int(rng.integers(1, scheme.l))
        colors[e] = (colors[e] + shift) % scheme.l
    return AddressingScheme(scheme.l, colors, scheme.family, ["mutated"]), picks
