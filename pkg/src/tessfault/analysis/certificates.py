"""Negative certificates: self-sustaining islands and pier-supported bridges.

Verifiers look only at guardian counts; constructors are never trusted.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..automaton import AutomatonSpec, build_automaton
from ..errors import FaceDegreeNot4, InsufficientMargin, NotApplicable
from ..simulate import run_deterministic
from ..tessellation import INF, Tessellation, strip_sibling_edges

DYNAMIC_STEPS = 1000


@dataclass
class CountCheck:
    vertex: int
    support: int
    threshold: int

    @property
    def ok(self):
        return self.support >= self.threshold


@dataclass
class IslandCertificate:
    kind: str
    cells: tuple
    counts: list = field(default_factory=list)
    dynamic_steps: int = 0
    dynamic_ok: bool | None = None

    @property
    def violations(self):
        return [c for c in self.counts if not c.ok]

    @property
    def valid(self):
        return bool(self.counts) and not self.violations and self.dynamic_ok is not False

    def to_dict(self):
        return {
            "kind": self.kind,
            "cells": list(self.cells),
            "valid": self.valid,
            "counts": [[c.vertex, c.support, c.threshold] for c in self.counts],
            "dynamic_steps": self.dynamic_steps,
            "dynamic_ok": self.dynamic_ok,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class BridgeCertificate:
    bridge: tuple
    piers: tuple
    chain: tuple = ()  # edges (vertex pairs) e_{-m} .. e_n, empty for trees
    counts: list = field(default_factory=list)
    dynamic_steps: int = 0
    dynamic_ok: bool | None = None

    @property
    def violations(self):
        return [c for c in self.counts if not c.ok]

    @property
    def valid(self):
        return bool(self.counts) and not self.violations and self.dynamic_ok is not False

    def to_dict(self):
        return {
            "bridge": list(self.bridge),
            "piers": list(self.piers),
            "chain": [list(e) for e in self.chain],
            "valid": self.valid,
            "counts": [[c.vertex, c.support, c.threshold] for c in self.counts],
            "dynamic_steps": self.dynamic_steps,
            "dynamic_ok": self.dynamic_ok,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _support_counts(spec: AutomatonSpec, cells, support):
    support = set(support)
    out = []
    for v in cells:
        # guardians already include v itself when q is even
        s = sum(1 for g in spec.guardians[v] if g in support)
        out.append(CountCheck(int(v), s, int(spec.threshold[v])))
    return out


def _require_interior(spec, cells):
    bad = [v for v in cells if spec.boundary[v]]
    if bad:
        raise InsufficientMargin(f"cells {bad[:5]} lie on the truncation boundary")


# --------------------------------------------------------------------------
# islands


def island_kind(p, q) -> str:
    if q == 2:
        return "pair"
    if p != INF and 3 <= q <= 4:
        return "face"
    if p == 3 and 5 <= q <= 6:
        return "star"
    raise NotApplicable(f"{{{p},{q}}} has no self-sustaining island of the known kinds")


def make_island(t: Tessellation, kind=None) -> IslandCertificate:
    """Two adjacent cells (q=2), a closed face (q<=4), or a vertex with its neighbours (p=3, q<=6)."""
    expected = island_kind(t.p, t.q)
    kind = kind or expected
    if kind != expected:
        raise NotApplicable(f"island kind {kind!r} does not apply to {t.spec.label}")
    if kind == "pair":
        if not t.neighbors[t.origin]:
            raise InsufficientMargin("origin has no neighbour")
        cells = (t.origin, t.neighbors[t.origin][0])
    elif kind == "star":
        cells = (t.origin,) + tuple(t.neighbors[t.origin])
    else:
        cells = None
        faces = sorted(t.faces, key=lambda f: (t.origin not in f, max(t.generation[list(f)])))
        for f in faces:
            if all(t.interior[v] for v in f):
                cells = tuple(f)
                break
        if cells is None:
            raise InsufficientMargin("no closed face lies inside the truncation")
    if not all(t.interior[v] for v in cells):
        raise InsufficientMargin("island patch touches the truncation boundary")
    spec = build_automaton(t)
    cert = IslandCertificate(kind, tuple(int(v) for v in cells))
    cert.counts = _support_counts(spec, cert.cells, cert.cells)
    return cert


def verify_island(spec: AutomatonSpec, cells, steps=DYNAMIC_STEPS) -> IslandCertificate:
    """Static majority count for each cell plus a clamped fault-free run of ``steps``."""
    cells = tuple(sorted(set(int(v) for v in cells)))
    cert = IslandCertificate("given", cells)
    _require_interior(spec, cells)
    cert.counts = _support_counts(spec, cells, cells)
    if steps:
        target = np.asarray(cells)
        traj = run_deterministic(spec, cells, steps, clamp=True)
        cert.dynamic_steps = steps
        cert.dynamic_ok = all(len(s) == len(target) and np.array_equal(s, target) for s in traj)
    return cert


# --------------------------------------------------------------------------
# opposite-edge sets and bridges


@dataclass
class OppositeEdgeSet:
    edges: tuple  # ordered chain of edge ids
    root_index: int  # position of the starting edge in ``edges``
    exits_left: bool
    exits_right: bool
    cyclic: bool = False

    @property
    def exits(self):
        return self.exits_left or self.exits_right


def _opposite(face, a, b):
    n = len(face)
    i = face.index(a)
    if face[(i + 1) % n] == b:
        return face[(i + 2) % n], face[(i + 3) % n]
    return face[(i - 2) % n], face[(i - 3) % n]


def opposite_edge_set(t: Tessellation, e: int) -> OppositeEdgeSet:
    """Closure of edge ``e`` under taking the opposite edge across each incident face.

    Every face of ``t`` must be a quadrilateral.  The closure is a chain; where
    an edge has fewer than two closed faces the chain leaves the truncation.
    """
    if any(len(f) != 4 for f in t.faces):
        raise FaceDegreeNot4(f"{t.spec.label} has faces of degree other than 4")
    faces = t.faces
    ef = t.edge_faces

    def walk(through):
        # follow the chain from e across face ``through``; returns (edges, exits, cyclic)
        out = []
        eid, f = e, through
        while True:
            a, b = (int(x) for x in t.edges[eid])
            g = t.edge_between(*_opposite(faces[f], a, b))
            if g == e:
                return out, False, True
            out.append(g)
            nxt = [h for h in ef[g] if h != f]
            if not nxt:
                return out, True, False
            eid, f = g, nxt[0]

    fs = ef[e]
    if not fs:
        return OppositeEdgeSet((e,), 0, True, True)
    right, exit_r, cyc = walk(fs[0])
    if cyc:
        return OppositeEdgeSet((e,) + tuple(right), 0, False, False, cyclic=True)
    if len(fs) > 1:
        left, exit_l, _ = walk(fs[1])
    else:
        left, exit_l = [], True
    chain = tuple(reversed(left)) + (e,) + tuple(right)
    return OppositeEdgeSet(chain, len(left), exit_l, exit_r)


def _tree_bridge(t, m, n):
    # bi-infinite path through the origin: one ray down the first child, one down the second
    def ray(first):
        path = [first]
        while len(path) < max(m, n) + 1:
            cs = t.children[path[-1]]
            if not cs:
                raise InsufficientMargin("truncation too shallow for the requested bridge")
            path.append(cs[0])
        return path

    cs = t.children[t.origin]
    right = ray(cs[0])
    left = ray(cs[1])
    line = list(reversed(left[:m])) + [t.origin] + right[:n]  # v_{-m} .. v_n
    return line[1:-1], [line[0], line[-1]], ()


def _chain_ok(spec, t, edges, m, n):
    # edges: m + n + 1 consecutive chain edges, as vertex pairs
    inner = {v for e in edges[1:-1] for v in e}
    piers = {v for v in edges[0] + edges[-1]}
    if inner & piers or len(inner) != 2 * (len(edges) - 2) or len(piers) != 4:
        return None
    if not all(t.interior[v] for v in inner | piers):
        return None
    support = inner | piers
    if all(c.ok for c in _support_counts(spec, sorted(inner), support)):
        return sorted(inner), sorted(piers)
    return None


def make_bridge(t: Tessellation, m=3, n=3) -> BridgeCertificate:
    """Bridge I with piers J for {inf,3}, {inf,4}, {4,5}, {4,6}, {3,7}, {3,8} (and the flat {4,4}).

    Trees use a path v_{-m} .. v_n with the end vertices as piers.  For p = 4
    (and p = 3 after deleting sibling edges) the bridge is a run of m + n - 1
    consecutive edges of an opposite-edge chain, with the two flanking edges as
    piers.  Chains and windows are tried outward from the origin.  For p = 4 the
    window centred on an origin edge works; for p = 3 the origin lacks support
    (its sibling edges add nothing to the chain) so the window ends up beside
    it, with the origin edge serving as a pier.
    """
    p, q = t.p, t.q
    ok = (p == INF and q in (3, 4)) or (p == 4 and q in (4, 5, 6)) or (p == 3 and q in (7, 8))
    if not ok:
        raise NotApplicable(f"no bridge construction for {t.spec.label}")
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    spec = build_automaton(t)
    if p == INF:
        inner, piers, chain = _tree_bridge(t, m, n)
    else:
        quad = strip_sibling_edges(t) if p == 3 else t
        found = None
        order = sorted(range(quad.num_edges), key=lambda e: (int(quad.generation[quad.edges[e]].max()), e))
        seen = set()
        for e in order:
            if e in seen or not all(quad.interior[v] for v in quad.edges[e]):
                continue
            F = opposite_edge_set(quad, e)
            seen.update(F.edges)
            pairs = [tuple(int(x) for x in quad.edges[g]) for g in F.edges]
            width = m + n + 1
            # windows nearest the root first
            starts = sorted(range(len(pairs) - width + 1), key=lambda s: abs(s + m - F.root_index))
            for s in starts:
                window = pairs[s : s + width]
                res = _chain_ok(spec, t, window, m, n)
                if res:
                    found = res + (tuple(window),)
                    break
            if found:
                break
        if not found:
            raise InsufficientMargin("no opposite-edge chain window fits in the truncation")
        inner, piers, chain = found
    cert = BridgeCertificate(tuple(int(v) for v in inner), tuple(int(v) for v in piers), chain)
    cert.counts = _support_counts(spec, cert.bridge, set(cert.bridge) | set(cert.piers))
    return cert


def verify_bridge(spec: AutomatonSpec, bridge, piers, steps=DYNAMIC_STEPS) -> BridgeCertificate:
    """Static count of guardians in I u J, then a run with J held faulty and I started in error."""
    bridge = tuple(sorted(set(int(v) for v in bridge)))
    piers = tuple(sorted(set(int(v) for v in piers)))
    if set(bridge) & set(piers):
        raise ValueError("bridge and piers must be disjoint")
    cert = BridgeCertificate(bridge, piers)
    _require_interior(spec, bridge + piers)
    cert.counts = _support_counts(spec, bridge, set(bridge) | set(piers))
    if steps:
        traj = run_deterministic(spec, bridge, steps, clamp=True, permanent=piers)
        need = set(bridge)
        cert.dynamic_steps = steps
        cert.dynamic_ok = all(need <= set(s.tolist()) for s in traj)
    return cert
