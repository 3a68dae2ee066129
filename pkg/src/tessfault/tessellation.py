"""Layered construction of finite truncations of the regular tessellation {p,q}.

Vertices are grouped into generations by graph distance from a chosen origin.
Each generation is kept as a cyclic sequence ordered left to right; between
every pair of cyclically consecutive vertices we track the *gap*, the number
of edges still needed to close the face that straddles the pair on the outer
side. The gap arithmetic decides where same-generation edges appear and which
children are shared between neighbours.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    BudgetExceeded,
    CollapseError,
    NotApplicable,
    SphericalUnsupported,
    UnknownVertex,
)

INF = math.inf
SCHEMA_VERSION = 1
_MISSING = -1  # rotation placeholder for children beyond the truncation


class EdgeKind(enum.IntEnum):
    PARENT_CHILD = 0
    SIBLING = 1
    COUSIN = 2


class Strength(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    NOT_APPLICABLE = "n/a"


def parse_p(value) -> float:
    """Accept ``inf``/``∞`` or an integer ≥ 3 for the face degree."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinity", "∞", "oo"):
            return INF
        value = int(v)
    if value == INF:
        return INF
    if int(value) != value:
        raise ValueError(f"p must be an integer or inf, got {value!r}")
    return int(value)


def format_p(p) -> str:
    return "inf" if p == INF else str(int(p))


def geometry(p, q) -> str:
    """'spherical', 'euclidean' or 'hyperbolic' according to 1/p + 1/q vs 1/2."""
    inv_p = Fraction(0) if p == INF else Fraction(1, int(p))
    s = inv_p + Fraction(1, q)
    if s > Fraction(1, 2):
        return "spherical"
    if s == Fraction(1, 2):
        return "euclidean"
    return "hyperbolic"


@dataclass(frozen=True)
class TessellationSpec:
    p: float
    q: int
    max_generation: int
    vertex_budget: int | None = None
    # spherical truncations are built only on explicit request and only up to
    # the generation before the surface closes up
    allow_spherical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p", parse_p(self.p))
        if self.p != INF and self.p < 3:
            raise ValueError("p must be >= 3 or inf")
        if int(self.q) != self.q or self.q < 2:
            raise ValueError("q must be an integer >= 2")
        if self.max_generation < 0:
            raise ValueError("max_generation must be >= 0")
        if self.vertex_budget is not None and self.vertex_budget < 1:
            raise ValueError("vertex_budget must be >= 1")
        if (
            self.q != 2
            and geometry(self.p, self.q) == "spherical"
            and not self.allow_spherical
        ):
            raise SphericalUnsupported(
                f"{{{format_p(self.p)},{self.q}}} is spherical (1/p + 1/q > 1/2)"
            )

    @property
    def is_tree(self) -> bool:
        return self.p == INF

    @property
    def label(self) -> str:
        return f"{{{format_p(self.p)},{self.q}}}"


@dataclass(frozen=True)
class VertexClass:
    kind: str  # "origin" | "one-parent" | "two-parent"
    has_cousin: bool = False
    strength: Strength = Strength.NOT_APPLICABLE

    @property
    def is_cousin(self) -> bool:
        return self.kind == "one-parent" and self.has_cousin


@dataclass
class Violation:
    rule: str
    ids: tuple
    message: str

    def as_dict(self):
        return {"rule": self.rule, "ids": list(self.ids), "message": self.message}


@dataclass
class AuditReport:
    violations: list = field(default_factory=list)
    generation_sizes: list = field(default_factory=list)
    class_counts: dict = field(default_factory=dict)
    rules_checked: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def by_rule(self, rule):
        return [v for v in self.violations if v.rule == rule]

    def as_dict(self):
        return {
            "pass": self.passed,
            "violations": [v.as_dict() for v in self.violations],
            "generation_sizes": self.generation_sizes,
            "class_counts": self.class_counts,
            "rules_checked": self.rules_checked,
        }


def _frozen(a, dtype=np.int64):
    a = np.asarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class Tessellation:
    """Immutable layered truncation of {p,q}.

    Vertex ids are dense integers in (generation, cyclic position) order.
    ``parents[v]`` is ordered (left, right); ``children[v]`` left to right.
    """

    def __init__(
        self,
        spec: TessellationSpec,
        max_generation: int,
        generation,
        parents,
        children,
        left_same,
        right_same,
        edges,
        edge_kind,
        interior,
        stripped: bool = False,
    ):
        self.spec = spec
        self.max_generation = int(max_generation)
        self.generation = _frozen(generation)
        self.parents = tuple(tuple(int(x) for x in ps) for ps in parents)
        self.children = tuple(tuple(int(x) for x in cs) for cs in children)
        self.left_same = _frozen(left_same)
        self.right_same = _frozen(right_same)
        self.edges = _frozen(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
        self.edge_kind = _frozen(edge_kind, np.int8)
        self.interior = _frozen(interior, bool)
        self.stripped = stripped
        gens = [[] for _ in range(self.max_generation + 1)]
        for v, g in enumerate(self.generation):
            gens[g].append(v)
        self.generations = tuple(_frozen(g) for g in gens)
        pos = np.empty(len(self.generation), dtype=np.int64)
        for g in self.generations:
            pos[g] = np.arange(len(g))
        self.position = _frozen(pos)

    # basic shape -----------------------------------------------------------
    @property
    def p(self):
        return self.spec.p

    @property
    def q(self):
        return self.spec.q

    @property
    def origin(self) -> int:
        return 0

    @property
    def num_vertices(self) -> int:
        return len(self.generation)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def generation_sizes(self):
        return [len(g) for g in self.generations]

    def check_vertex(self, v):
        if not (0 <= int(v) < self.num_vertices):
            raise UnknownVertex(v)
        return int(v)

    # adjacency -------------------------------------------------------------
    @cached_property
    def incident_edges(self):
        inc = [[] for _ in range(self.num_vertices)]
        for eid, (a, b) in enumerate(self.edges):
            inc[a].append(eid)
            inc[b].append(eid)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def neighbors(self):
        out = []
        for v, eids in enumerate(self.incident_edges):
            out.append(tuple(int(self.other_end(e, v)) for e in eids))
        return tuple(out)

    @cached_property
    def edge_index(self) -> dict:
        return {
            (min(a, b), max(a, b)): eid for eid, (a, b) in enumerate(self.edges.tolist())
        }

    def edge_between(self, a, b):
        return self.edge_index.get((min(a, b), max(a, b)))

    def other_end(self, eid, v):
        a, b = self.edges[eid]
        return b if a == v else a

    def degree(self, v) -> int:
        return len(self.incident_edges[v])

    def same_generation_neighbors(self, v):
        return tuple(int(x) for x in (self.left_same[v], self.right_same[v]) if x >= 0)

    def cousins(self, v):
        if self.p == INF or self.p == 3 or self.p % 2 == 0:
            return ()
        return self.same_generation_neighbors(v)

    def siblings(self, v):
        if self.p != 3:
            return ()
        return self.same_generation_neighbors(v)

    @cached_property
    def rotation(self):
        """Clockwise neighbour order around every vertex.

        Order: left same-generation neighbour, children left to right, right
        same-generation neighbour, right parent, left parent.  Vertices on the
        outermost generation carry a placeholder where their children belong.
        """
        rot = []
        for v in range(self.num_vertices):
            r = []
            if self.left_same[v] >= 0:
                r.append(int(self.left_same[v]))
            if self.children[v]:
                r.extend(self.children[v])
            elif not self.interior[v]:
                r.append(_MISSING)
            if self.right_same[v] >= 0:
                r.append(int(self.right_same[v]))
            r.extend(reversed(self.parents[v]))
            rot.append(tuple(r))
        return tuple(rot)

    @cached_property
    def faces(self):
        """Closed faces as vertex cycles, traced from the rotation system.

        A face that runs into the truncation boundary is omitted.
        """
        rot = self.rotation
        where = [{u: i for i, u in enumerate(r) if u != _MISSING} for r in rot]
        seen = set()
        faces = []
        for a, b in self.edges.tolist():
            for start in ((a, b), (b, a)):
                if start in seen:
                    continue
                cycle = []
                dart = start
                closed = False
                while True:
                    if dart in seen:
                        closed = dart == start and bool(cycle)
                        break
                    seen.add(dart)
                    u, v = dart
                    cycle.append(u)
                    r = rot[v]
                    w = r[(where[v][u] + 1) % len(r)]
                    if w == _MISSING:
                        break
                    dart = (v, w)
                if closed:
                    faces.append(tuple(cycle))
        return tuple(faces)

    @cached_property
    def edge_faces(self):
        """Map edge id -> list of closed faces (as indices into ``faces``) bounded by it."""
        out = [[] for _ in range(self.num_edges)]
        for fi, f in enumerate(self.faces):
            for i in range(len(f)):
                out[self.edge_between(f[i], f[(i + 1) % len(f)])].append(fi)
        return tuple(tuple(x) for x in out)

    # taxonomy --------------------------------------------------------------
    def classify_vertex(self, v, strength=None) -> VertexClass:
        v = self.check_vertex(v)
        return _classify(self, v, strength)

    @cached_property
    def two_parent(self):
        return _frozen([len(ps) == 2 for ps in self.parents], bool)

    @cached_property
    def is_cousin_vertex(self):
        return _frozen([len(self.cousins(v)) == 1 for v in range(self.num_vertices)], bool)

    # editing helpers -------------------------------------------------------
    def without_edge(self, eid) -> "Tessellation":
        """Copy with one edge removed (for constructing audit failures)."""
        a, b = (int(x) for x in self.edges[eid])
        keep = np.ones(self.num_edges, dtype=bool)
        keep[eid] = False
        parents = [list(p) for p in self.parents]
        children = [list(c) for c in self.children]
        left = self.left_same.copy()
        right = self.right_same.copy()
        if self.edge_kind[eid] == EdgeKind.PARENT_CHILD:
            par, ch = (a, b) if self.generation[a] < self.generation[b] else (b, a)
            parents[ch].remove(par)
            children[par].remove(ch)
        else:
            for x, y in ((a, b), (b, a)):
                if right[x] == y:
                    right[x] = -1
                if left[x] == y:
                    left[x] = -1
        return Tessellation(
            self.spec,
            self.max_generation,
            self.generation,
            parents,
            children,
            left,
            right,
            self.edges[keep],
            self.edge_kind[keep],
            self.interior,
            self.stripped,
        )

    # serialization ---------------------------------------------------------
    def to_dict(self):
        strength = None
        if _strength_applies(self):
            strength = [s.value for s in assign_strength(self)]
        taxonomy = []
        for v in range(self.num_vertices):
            c = _classify(self, v, None)
            taxonomy.append(
                {"kind": c.kind, "has_cousin": c.has_cousin}
                | ({"strength": strength[v]} if strength else {})
            )
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "tessellation",
            "p": format_p(self.p),
            "q": self.q,
            "max_generation": self.max_generation,
            "stripped": self.stripped,
            "origin": self.origin,
            "generations": [g.tolist() for g in self.generations],
            "vertices": [
                {
                    "id": v,
                    "generation": int(self.generation[v]),
                    "position": int(self.position[v]),
                    "parents": list(self.parents[v]),
                    "children": list(self.children[v]),
                    "same_generation": list(self.same_generation_neighbors(v)),
                    "interior": bool(self.interior[v]),
                }
                for v in range(self.num_vertices)
            ],
            "edges": [
                {"id": i, "ends": [int(a), int(b)], "kind": EdgeKind(k).name}
                for i, ((a, b), k) in enumerate(zip(self.edges.tolist(), self.edge_kind))
            ],
            "taxonomy": taxonomy,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def content_hash(self) -> str:
        """Git-style blob hash of the canonical JSON encoding."""
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    @classmethod
    def from_dict(cls, d) -> "Tessellation":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        p = parse_p(d["p"])
        spec = TessellationSpec(p, d["q"], d["max_generation"], allow_spherical=True)
        verts = d["vertices"]
        n = len(verts)
        left = np.full(n, -1)
        right = np.full(n, -1)
        for e in d["edges"]:
            if e["kind"] != "PARENT_CHILD":
                a, b = e["ends"]
                if verts[a]["position"] > verts[b]["position"] and not (
                    verts[b]["position"] == 0
                    and verts[a]["position"] == len(d["generations"][verts[a]["generation"]]) - 1
                ):
                    a, b = b, a
                if verts[a]["position"] == 0 and verts[b]["position"] == len(
                    d["generations"][verts[b]["generation"]]
                ) - 1 and len(d["generations"][verts[b]["generation"]]) > 2:
                    a, b = b, a
                right[a] = b
                left[b] = a
        return cls(
            spec,
            d["max_generation"],
            [v["generation"] for v in verts],
            [v["parents"] for v in verts],
            [v["children"] for v in verts],
            left,
            right,
            [e["ends"] for e in d["edges"]],
            [EdgeKind[e["kind"]] for e in d["edges"]],
            [v["interior"] for v in verts],
            d.get("stripped", False),
        )

    @classmethod
    def from_json(cls, text) -> "Tessellation":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        tag = "'" if self.stripped else ""
        return (
            f"<Tessellation {self.spec.label}{tag} G={self.max_generation} "
            f"V={self.num_vertices} E={self.num_edges}>"
        )


# --------------------------------------------------------------------------
# construction


def build_tessellation(spec: TessellationSpec) -> Tessellation:
    """Build the truncation of ``spec`` through ``max_generation`` generations.

    When ``vertex_budget`` binds first the result stops at the last generation
    that fits, so every generation present is complete.
    """
    if spec.q == 2 and spec.p != INF:
        return _build_cycle(spec)
    return _LayeredBuilder(spec).run()


class _LayeredBuilder:
    def __init__(self, spec):
        self.spec = spec
        self.p = spec.p
        self.q = spec.q
        self.generation = [0]
        self.parents = [[]]
        self.children = [[]]
        self.left = [-1]
        self.right = [-1]
        self.edges = []
        self.kinds = []

    def _new_vertex(self, g, parent):
        v = len(self.generation)
        self.generation.append(g)
        self.parents.append([parent])
        self.children.append([])
        self.left.append(-1)
        self.right.append(-1)
        self.children[parent].append(v)
        self.edges.append((parent, v))
        self.kinds.append(EdgeKind.PARENT_CHILD)
        return v

    def _add_parent(self, child, parent, on_left):
        if on_left:
            self.parents[child].insert(0, parent)
        else:
            self.parents[child].append(parent)
        self.children[parent].append(child)
        self.edges.append((parent, child))
        self.kinds.append(EdgeKind.PARENT_CHILD)

    def run(self) -> Tessellation:
        spec, p, q = self.spec, self.p, self.q
        G = spec.max_generation
        budget = spec.vertex_budget
        if budget is not None and budget < 1 + q and G >= 1:
            raise BudgetExceeded(f"generation 1 needs {1 + q} vertices, budget {budget}")
        if G == 0:
            return self._finish(0)
        current = [self._new_vertex(1, 0) for _ in range(q)]
        gaps = [p - 2] * q
        built = 1
        while True:
            g = built
            self._same_generation_edges(current, gaps)
            if g == G:
                break
            counts = [
                q - len(self.parents[v]) - (self.left[v] >= 0) - (self.right[v] >= 0)
                for v in current
            ]
            n = len(current)
            merge = [gaps[i] == 2 for i in range(n)]
            for i, v in enumerate(current):
                if counts[i] < 1:
                    raise CollapseError(f"vertex {v} has no room for children")
                if counts[i] == 1 and merge[i - 1] and merge[i]:
                    raise CollapseError(f"surface closes above generation {g}")
            size = sum(counts) - sum(merge)
            if budget is not None and len(self.generation) + size > budget:
                break
            current, gaps = self._next_generation(g, current, gaps, counts, merge)
            built += 1
        return self._finish(built)

    def _same_generation_edges(self, current, gaps):
        p = self.p
        n = len(current)
        if n < 2:
            return
        kind = EdgeKind.SIBLING if p == 3 else EdgeKind.COUSIN
        for i in range(n):
            gap = gaps[i]
            if gap < 1:
                raise CollapseError(f"negative face gap at generation {self.generation[current[i]]}")
            if gap == 1:
                a, b = current[i], current[(i + 1) % n]
                if self.right[a] >= 0 or self.left[b] >= 0:
                    raise CollapseError("double same-generation edge")
                self.right[a] = b
                self.left[b] = a
                self.edges.append((a, b))
                self.kinds.append(kind)
                # face on the far side of the new edge has one edge so far
                gaps[i] = p - 1

    def _next_generation(self, g, current, gaps, counts, merge):
        p = self.p
        n = len(current)
        new = []
        first_child = None
        for i, v in enumerate(current):
            c = counts[i]
            for slot in range(c):
                if slot == 0 and merge[i - 1] and i > 0:
                    self._add_parent(new[-1], v, on_left=False)
                elif slot == c - 1 and merge[i] and i == n - 1:
                    self._add_parent(first_child, v, on_left=True)
                else:
                    child = self._new_vertex(g + 1, v)
                    new.append(child)
                    if first_child is None:
                        first_child = child
        pos_in_current = {v: i for i, v in enumerate(current)}
        new_gaps = []
        m = len(new)
        for j in range(m):
            u, w = new[j], new[(j + 1) % m]
            if set(self.parents[u]) & set(self.parents[w]):
                new_gaps.append(p - 2)
            else:
                i = pos_in_current[self.parents[u][-1]]
                if self.parents[w][0] != current[(i + 1) % n]:
                    raise CollapseError("children are not cyclically ordered")
                new_gaps.append(gaps[i] - 2)
        return new, new_gaps

    def _finish(self, built):
        gen = np.asarray(self.generation)
        return Tessellation(
            self.spec,
            built,
            gen,
            self.parents,
            self.children,
            self.left,
            self.right,
            self.edges,
            self.kinds,
            gen < built,
        )


def _build_cycle(spec):
    """{p,2}: a single p-cycle layered from one of its vertices."""
    p = int(spec.p)
    G = min(spec.max_generation, p // 2)
    if spec.vertex_budget is not None and G >= 1 and spec.vertex_budget < 3:
        raise BudgetExceeded("generation 1 needs 3 vertices")
    generation = [0]
    parents = [[]]
    children = [[]]
    edges = []
    kinds = []
    left, right = [-1], [-1]
    # walk the two arcs of the cycle in lockstep
    arms = [0, 0]
    closed = G == p // 2
    for g in range(1, G + 1):
        if p % 2 == 0 and g == p // 2:
            v = len(generation)
            generation.append(g)
            parents.append([arms[0], arms[1]])
            children.append([])
            left.append(-1)
            right.append(-1)
            for a in arms:
                children[a].append(v)
                edges.append((a, v))
                kinds.append(EdgeKind.PARENT_CHILD)
            continue
        new = []
        for a in arms:
            v = len(generation)
            generation.append(g)
            parents.append([a])
            children.append([])
            left.append(-1)
            right.append(-1)
            children[a].append(v)
            edges.append((a, v))
            kinds.append(EdgeKind.PARENT_CHILD)
            new.append(v)
        arms = new
        if p % 2 == 1 and g == p // 2:
            a, b = arms
            right[a] = b
            left[b] = a
            edges.append((a, b))
            kinds.append(EdgeKind.SIBLING if p == 3 else EdgeKind.COUSIN)
    generation = np.asarray(generation)
    interior = np.ones(len(generation), bool) if closed else generation < G
    if spec.vertex_budget is not None and len(generation) > spec.vertex_budget:
        raise BudgetExceeded(f"cycle needs {len(generation)} vertices")
    return Tessellation(
        spec, G, generation, parents, children, left, right, edges, kinds, interior
    )


def strip_sibling_edges(t: Tessellation) -> Tessellation:
    """Delete every sibling edge of a {3,q} truncation, giving {3,q}'."""
    if t.p != 3 or t.stripped:
        raise NotApplicable("sibling edges exist only in {3,q}")
    keep = t.edge_kind != EdgeKind.SIBLING
    none = np.full(t.num_vertices, -1)
    return Tessellation(
        t.spec,
        t.max_generation,
        t.generation,
        t.parents,
        t.children,
        none,
        none,
        t.edges[keep],
        t.edge_kind[keep],
        t.interior,
        stripped=True,
    )


# --------------------------------------------------------------------------
# taxonomy


def _classify(t, v, strength):
    np_ = len(t.parents[v])
    s = Strength.NOT_APPLICABLE if strength is None else strength[v]
    if v == t.origin:
        return VertexClass("origin", False, s)
    if np_ == 2:
        return VertexClass("two-parent", False, s)
    if np_ == 1:
        return VertexClass("one-parent", len(t.cousins(v)) == 1, s)
    raise ValueError(f"vertex {v} has {np_} parents")


def classify_vertex(t: Tessellation, v, strength=None) -> VertexClass:
    return t.classify_vertex(v, strength)


def _strength_applies(t):
    return t.p != INF and t.p % 2 == 1 and t.p >= 5


def assign_strength(t: Tessellation):
    """Strong/weak labels for odd p ≥ 5, computed outward from the origin."""
    if not _strength_applies(t):
        raise NotApplicable("strength is defined only for odd p >= 5")
    out = [Strength.NOT_APPLICABLE] * t.num_vertices
    for gen in t.generations:
        for v in gen.tolist():
            if v == t.origin:
                out[v] = Strength.STRONG
            elif len(t.parents[v]) == 2:
                out[v] = Strength.WEAK
            elif len(t.cousins(v)) == 0:
                out[v] = Strength.STRONG
            else:
                parent = t.parents[v][0]
                out[v] = Strength.STRONG if out[parent] == Strength.WEAK else Strength.WEAK
    return tuple(out)


# --------------------------------------------------------------------------
# audit


def bfs_distances(t: Tessellation, source=0):
    dist = np.full(t.num_vertices, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    nbrs = t.neighbors
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def audit_tessellation(t: Tessellation) -> AuditReport:
    """Check degrees, faces, edge kinds, layering and the structural spacing and parentage rules.

    Checks quantify over interior vertices only, and each structural rule is checked only
    where its hypotheses on (p, q) hold.
    """
    rep = AuditReport()
    p, q = t.p, t.q
    add = rep.violations.append
    rules = rep.rules_checked
    gen = t.generation
    interior = t.interior

    rules.append("degree")
    for v in range(t.num_vertices):
        if not interior[v]:
            continue
        want = q if (not t.stripped or v == t.origin) else q - 2
        if t.degree(v) != want:
            add(Violation("degree", (v,), f"interior vertex has degree {t.degree(v)}, expected {want}"))

    if p != INF and t.q > 2:
        rules.append("face")
        want = 4 if t.stripped else p
        for f in t.faces:
            if all(interior[x] for x in f) and len(f) != want:
                add(Violation("face", f, f"closed face has degree {len(f)}, expected {want}"))

    rules.append("edge-kind")
    for eid, ((a, b), k) in enumerate(zip(t.edges.tolist(), t.edge_kind.tolist())):
        ga, gb = gen[a], gen[b]
        if k == EdgeKind.PARENT_CHILD:
            ok = abs(ga - gb) == 1
        elif k == EdgeKind.SIBLING:
            ok = ga == gb and p == 3
        else:
            ok = ga == gb and p != INF and p % 2 == 1 and p >= 5
        if not ok:
            add(Violation("edge-kind", (eid,), f"{EdgeKind(k).name} edge joins generations {ga},{gb}"))

    rules.append("layering")
    dist = bfs_distances(t)
    for v in np.nonzero(dist != gen)[0].tolist():
        add(Violation("layering", (v,), f"stored generation {gen[v]} but distance {dist[v]}"))

    rules.append("parents")
    for v in range(t.num_vertices):
        ps = t.parents[v]
        if v == t.origin:
            if ps:
                add(Violation("parents", (v,), "origin has parents"))
            continue
        if len(ps) not in (1, 2):
            add(Violation("parents", (v,), f"{len(ps)} parents"))
        elif len(ps) == 2:
            a, b = ps
            n = len(t.generations[gen[a]])
            if (t.position[a] + 1) % n != t.position[b]:
                add(Violation("parents", (v, a, b), "parents are not consecutive"))

    rules.append("planarity")
    for g in range(1, t.max_generation + 1):
        cur = t.generations[g].tolist()
        if g == 1 or len(cur) < 2:
            continue
        n_prev = len(t.generations[g - 1])
        for j in range(len(cur)):
            u, w = cur[j], cur[(j + 1) % len(cur)]
            if not t.parents[u] or not t.parents[w]:
                continue
            a, b = t.parents[u][-1], t.parents[w][0]
            if a != b and (t.position[a] + 1) % n_prev != t.position[b]:
                add(Violation("planarity", (u, w), "children of consecutive parents out of order"))

    if p != INF and q > 2 and not t.stripped and geometry(p, q) != "spherical":
        rules.append("euler")
        chi = t.num_vertices - t.num_edges + len(t.faces)
        if chi != 1:
            add(Violation("euler", (), f"V - E + F = {chi}, expected 1 for a disk"))

    if not t.stripped:
        _audit_structure(t, rep)

    rep.generation_sizes = t.generation_sizes()
    counts = {}
    for v in range(t.num_vertices):
        if v != t.origin and len(t.parents[v]) not in (1, 2):
            key = "malformed"  # already reported by the parents rule
        else:
            c = _classify(t, v, None)
            key = "cousin" if c.is_cousin else c.kind
        counts[key] = counts.get(key, 0) + 1
    rep.class_counts = counts
    return rep


def _interior_generations(t):
    return [g for g in range(1, t.max_generation + 1) if t.interior[t.generations[g]].all()]


def _audit_structure(t, rep):
    p, q = t.p, t.q
    add = rep.violations.append
    rules = rep.rules_checked
    two = t.two_parent
    cousin = t.is_cousin_vertex
    interior = t.interior

    def spacing(rule, need):
        for g in _interior_generations(t):
            cur = t.generations[g].tolist()
            idx = [i for i, v in enumerate(cur) if two[v]]
            n = len(cur)
            for a, b in zip(idx, idx[1:] + idx[:1]):
                between = (b - a - 1) % n if len(idx) > 1 else n - 1
                if between < need:
                    add(Violation(rule, (cur[a], cur[b]), f"only {between} one-parent vertices between two-parent vertices"))

    if p != INF and p % 2 == 0 and q >= 5:
        rules.append("even-p-two-parent-spacing")
        spacing("even-p-two-parent-spacing", q - 4)
        for v in range(t.num_vertices):
            if interior[v] and two[v] and all(two[x] for x in t.parents[v]):
                add(Violation("even-p-two-parent-spacing", (v,), "both parents are two-parent"))

    if p == 3 and q >= 7:
        rules.append("triangle-two-parent-spacing")
        spacing("triangle-two-parent-spacing", q - 6)
        if q >= 8:
            for v in range(1, t.num_vertices):
                if interior[v] and not two[v]:
                    sib = t.siblings(v)
                    if sib and all(two[s] for s in sib):
                        add(Violation("triangle-two-parent-spacing", (v,), "one-parent vertex whose siblings are all two-parent"))

    if p != INF and p >= 5 and q >= 5:
        rules += ["parent-cousin-children-count", "single-two-parent-child", "two-parent-parentage"]
        for v in range(1, t.num_vertices):
            if not interior[v]:
                continue
            if len(t.parents[v]) + len(t.cousins(v)) > 2:
                add(Violation("parent-cousin-children-count", (v,), "more than two parents/cousins"))
            if len(t.children[v]) < 3:
                add(Violation("parent-cousin-children-count", (v,), f"only {len(t.children[v])} children"))
            if not two[v] and sum(bool(two[c]) for c in t.children[v]) > 1:
                add(Violation("single-two-parent-child", (v,), "one-parent vertex with two two-parent children"))
            if two[v]:
                for par in t.parents[v]:
                    if two[par] or cousin[par]:
                        add(Violation("two-parent-parentage", (v, par), "parent of two-parent vertex is not a non-cousin one-parent vertex"))

    if p != INF and p % 2 == 1 and p >= 5 and q >= 5:
        rules.append("cousin-parentage")
        for eid in np.nonzero(t.edge_kind == EdgeKind.COUSIN)[0].tolist():
            a, b = (int(x) for x in t.edges[eid])
            if not (interior[a] and interior[b]):
                continue
            ok = any(
                not two[par] and not cousin[par] and par != t.origin
                for x in (a, b)
                for par in t.parents[x]
            )
            if not ok:
                add(Violation("cousin-parentage", (a, b), "neither cousin has a non-cousin one-parent parent"))
