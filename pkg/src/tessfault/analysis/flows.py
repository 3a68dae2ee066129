"""Balance-of-payments certificates for weakened automata.

Every arc u -> w of an explanation graph (w a non-ignored guardian of u)
carries a fixed number of dollars decided by the arc's class.  A family's
flow assignment gives, per vertex class, the in-edge values a vertex can
receive at most and the out-edge values it must pay at least.  With every
non-terminal netting at least r and every terminal receiving at most s, an
explanation graph on n vertices with m terminals has n <= (1 + s/r) m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from ..automaton import AutomatonSpec, in_positive_region
from ..errors import BalanceViolated, OutsidePositiveRegion
from ..tessellation import INF, EdgeKind, Strength, Tessellation, assign_strength

UNBOUNDED = None


@dataclass(frozen=True)
class ClassBound:
    """Worst local configuration of one vertex class."""

    in_edges: tuple  # largest admissible in-edge values, one entry per possible in-arc
    out_options: tuple  # ((value, cap or None), ...) admissible out-edge values
    threshold: int  # reduced threshold = number of out-arcs a non-terminal must have

    @property
    def in_max(self):
        return sum(self.in_edges)

    @property
    def out_min(self):
        left = self.threshold
        total = 0
        for value, cap in sorted(self.out_options):
            take = left if cap is None else min(cap, left)
            total += take * value
            left -= take
            if not left:
                break
        if left:
            raise ValueError("out options cannot cover the threshold")
        return total

    @property
    def net(self):
        return self.out_min - self.in_max


@dataclass
class FlowAssignment:
    family: str
    p: float
    q: int
    values: dict  # arc class -> dollars
    classes: dict  # vertex class -> ClassBound
    terminal_in: int

    @property
    def r(self):
        return min(b.net for name, b in self.classes.items() if name != "origin")

    @property
    def s(self):
        return self.terminal_in

    @property
    def M(self):
        return 1 + Fraction(self.s, self.r)

    def to_dict(self):
        return {
            "family": self.family,
            "values": self.values,
            "r": self.r,
            "s": self.s,
            "M": str(self.M),
            "classes": {
                k: {"in_max": b.in_max, "out_min": b.out_min, "net": b.net, "threshold": b.threshold}
                for k, b in self.classes.items()
            },
        }


def _base_threshold(q):
    # majority of q guardians, or of q+1 with self; self is always ignored when q is even
    q_odd = q + 1 if q % 2 == 0 else q
    return (q_odd + 1) // 2 - (1 if q % 2 == 0 else 0)


def family_of(p) -> str:
    if p == INF:
        return "tree"
    if p == 3:
        return "triangle"
    if p == 4:
        return "square"
    return "even" if p % 2 == 0 else "odd"


def make_flow(p, q) -> FlowAssignment:
    """Dollar values per arc class and the analytic per-class table for {p,q}."""
    if not in_positive_region(p, q):
        raise OutsidePositiveRegion(f"{{{p},{q}}} is outside the combined-tolerant region")
    fam = family_of(p)
    b = _base_threshold(q)
    U = UNBOUNDED
    if fam == "tree":
        values = {"edge": 1}
        classes = {
            "origin": ClassBound((), ((1, U),), b),
            "one-parent": ClassBound((1,), ((1, U),), b - 1),
        }
        terminal = 1
    elif fam in ("square", "even"):
        values = {"special": 1, "other": 3}
        # a one-parent vertex has at most two (square) or one (larger even p) two-parent children
        cap = 2 if fam == "square" else 1
        # square: one parent of a two-parent vertex is one-parent; even p >= 6: both are
        two_in = (1, 3) if fam == "square" else (1, 1)
        classes = {
            "origin": ClassBound((), ((3, U),), b),
            "one-parent": ClassBound((3,), ((1, cap), (3, U)), b - 1),
            "two-parent": ClassBound(two_in, ((3, U),), b - 2),
        }
        terminal = 6 if fam == "square" else 3
    elif fam == "triangle":
        values = {"sibling": 2, "other": 3}
        classes = {
            "origin": ClassBound((), ((3, U),), b),
            # at most one sibling is two-parent, and only two-parent siblings pay
            "one-parent": ClassBound((3, 2), ((3, U),), b - 3),
            "two-parent": ClassBound((3, 3), ((2, 2), (3, U)), b - 2),
        }
        terminal = 6
    else:
        values = {
            "cousin": 2,
            "into-two-parent": 4,
            "into-weak-cousin/strong-cousin": 6,
            "into-weak-cousin/weak-cousin": 8,
            "other": 9,
        }
        classes = {
            "origin": ClassBound((), ((9, U),), b),
            "one-parent": ClassBound((9,), ((4, 1), (6, U), (8, U), (9, U)), b - 1),
            "two-parent": ClassBound((4, 4), ((9, U),), b - 2),
            "strong-cousin": ClassBound((9,), ((2, 1), (8, U), (9, U)), b - 1),
            "weak-cousin/strong-cousin": ClassBound((2, 6), ((9, U),), b - 2),
            "weak-cousin/weak-cousin": ClassBound((8,), ((9, U),), b - 2),
        }
        terminal = 9
    return FlowAssignment(fam, p, q, values, classes, terminal)


def vertex_class(t: Tessellation, v, strength=None) -> str:
    if v == t.origin:
        return "origin"
    if t.two_parent[v]:
        return "two-parent"
    cs = t.cousins(v)
    if not cs:
        return "one-parent"
    if strength[v] == Strength.STRONG:
        return "strong-cousin"
    return "weak-cousin/strong-cousin" if strength[cs[0]] == Strength.STRONG else "weak-cousin/weak-cousin"


def arc_class(t: Tessellation, u, w, family, strength=None) -> str:
    """Class of the arc from ``u`` to its guardian ``w``."""
    if family == "tree":
        return "edge"
    if family in ("square", "even"):
        if not t.two_parent[u] and t.two_parent[w] and u in t.parents[w]:
            return "special"
        return "other"
    if family == "triangle":
        kind = t.edge_kind[t.edge_between(u, w)]
        return "sibling" if kind == EdgeKind.SIBLING else "other"
    if t.generation[u] == t.generation[w]:
        return "cousin"
    if u in t.parents[w]:
        c = vertex_class(t, w, strength)
        if c == "two-parent":
            return "into-two-parent"
        if c.startswith("weak-cousin"):
            return "into-" + c
    return "other"


@dataclass
class ClassObservation:
    count: int = 0
    in_max: int = 0
    out_min: int | None = None
    net_min: int | None = None

    def add(self, inflow, outflow):
        self.count += 1
        self.in_max = max(self.in_max, inflow)
        self.out_min = outflow if self.out_min is None else min(self.out_min, outflow)
        net = outflow - inflow
        self.net_min = net if self.net_min is None else min(self.net_min, net)


@dataclass
class FlowReport:
    flow: FlowAssignment
    region_size: int = 0
    observed: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations and self.region_size > 0

    def to_dict(self):
        return {
            "flow": self.flow.to_dict(),
            "region_size": self.region_size,
            "observed": {k: vars(o) for k, o in self.observed.items()},
            "violations": self.violations,
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, default=str)

    def raise_if_failed(self):
        if self.violations:
            raise BalanceViolated(self.violations[0]["message"], self.violations[0])


def verify_flows(t: Tessellation, spec: AutomatonSpec, flow: FlowAssignment, region=None) -> FlowReport:
    """Check the worst local configuration of every vertex in ``region``.

    A vertex's out-flow is at least the sum of its cheapest reduced-threshold
    many out-arcs; its in-flow is at most the sum over all dependents that do
    not ignore it.  Needs net >= r for non-terminals and in-flow <= s for
    terminals, and each observed class must stay within its analytic row.
    """
    if spec.weakening is None:
        raise ValueError("flows are defined for a weakened automaton")
    strength = spec.strength
    if flow.family == "odd" and strength is None:
        strength = assign_strength(t)
    if region is None:
        region = [v for v in range(t.num_vertices) if t.generation[v] <= t.max_generation - 2]
    deps = spec.dependents()
    rep = FlowReport(flow, len(region))
    r, s = flow.r, flow.s
    for v in region:
        cls = vertex_class(t, v, strength)
        outs = sorted(flow.values[arc_class(t, v, w, flow.family, strength)] for w in spec.effective_guardians[v])
        k = int(spec.reduced_threshold[v])
        outflow = sum(outs[:k])
        ins = [flow.values[arc_class(t, u, v, flow.family, strength)] for u in deps[v]]
        inflow = sum(ins)
        rep.observed.setdefault(cls, ClassObservation()).add(inflow, outflow)
        bound = flow.classes.get(cls)
        config = {"vertex": int(v), "class": cls, "in": sorted(ins, reverse=True), "out": outs[:k]}
        if len(outs) < k:
            rep.violations.append(dict(config, message=f"vertex {v} has fewer out-arcs than its threshold"))
        elif cls != "origin" and outflow - inflow < r:
            rep.violations.append(dict(config, message=f"vertex {v} nets {outflow - inflow} < r = {r}"))
        if inflow > s:
            rep.violations.append(dict(config, message=f"vertex {v} receives {inflow} > s = {s}"))
        if bound is None:
            rep.violations.append(dict(config, message=f"class {cls} has no analytic row"))
        elif inflow > bound.in_max or outflow < bound.out_min:
            rep.violations.append(dict(config, message=f"vertex {v} exceeds the analytic row for {cls}"))
    return rep
