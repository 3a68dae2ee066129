"""Explanation graphs for errors of a weakened automaton, and the resulting probability bound."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..automaton import AutomatonSpec, BoundaryPolicy, pin_boundary, step
from ..errors import DomainError, RootNotInError
from ..faults import FaultConfig, FaultTrace


@dataclass
class Trajectory:
    """Recorded run of an automaton: ``states[t]`` is the error vector at time t."""

    spec: AutomatonSpec
    trace: FaultTrace
    states: np.ndarray  # (T+1, n) uint8

    def faulty(self, cell, t):
        return self.trace.is_faulty(cell, t)


def record_trajectory(spec: AutomatonSpec, config: FaultConfig, T: int, boundary=BoundaryPolicy.FROZEN_ZERO):
    trace = FaultTrace(config, spec.n)
    states = np.zeros((T + 1, spec.n), dtype=np.uint8)
    states[0] = pin_boundary(spec, trace.mask(0).astype(np.uint8), boundary)
    for t in range(1, T + 1):
        states[t] = step(spec, states[t - 1], trace.mask(t), boundary)
    return Trajectory(spec, trace, states)


@dataclass
class ExplanationGraph:
    root: tuple
    times: dict = field(default_factory=dict)  # cell -> the one time it appears at
    terminal: set = field(default_factory=set)
    arcs: list = field(default_factory=list)  # ((b, s), (c, s-1))

    @property
    def nodes(self):
        return [(c, s) for c, s in self.times.items()]

    @property
    def num_vertices(self):
        return len(self.times)

    @property
    def num_terminals(self):
        return len(self.terminal)

    def projected(self):
        """(X, Y, Z): terminal cells, non-terminal cells, arcs between cells."""
        X = set(self.terminal)
        Y = set(self.times) - X
        Z = {(b, c) for (b, _), (c, _) in self.arcs}
        return X, Y, Z

    def out_degrees(self):
        deg = {c: 0 for c in self.times}
        for (b, _), _ in self.arcs:
            deg[b] += 1
        return deg

    def to_dict(self):
        return {
            "root": list(self.root),
            "nodes": [[int(c), int(s), c in self.terminal] for c, s in sorted(self.times.items())],
            "arcs": [[int(b), int(s), int(c), int(r)] for (b, s), (c, r) in self.arcs],
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def extract_explanation_graph(spec: AutomatonSpec, traj: Trajectory, root) -> ExplanationGraph:
    """Trace an error back to faults, breadth first.

    A node (b, s) is dropped when b already appears at a time r >= s.  A
    faulty (b, s) becomes a terminal.  Otherwise b was set by a vote, so the
    lexicographically least minimal error set whose cells were all in error at
    s - 1 is attached and its nodes are queued.
    """
    a, t = int(root[0]), int(root[1])
    if not traj.states[t, a]:
        raise RootNotInError(f"cell {a} is not in error at time {t}")
    g = ExplanationGraph((a, t))
    queue = deque([(a, t)])
    while queue:
        b, s = queue.popleft()
        if b in g.times and g.times[b] >= s:
            continue
        g.times[b] = s
        if traj.faulty(b, s):
            g.terminal.add(b)
            continue
        prev = traj.states[s - 1]
        k = int(spec.reduced_threshold[b])
        chosen = sorted(c for c in spec.effective_guardians[b] if prev[c])[:k]
        if len(chosen) < k or s == 0:
            raise RuntimeError(f"cell {b} in error at {s} without fault or error set")
        for c in chosen:
            g.arcs.append(((b, s), (c, s - 1)))
            queue.append((c, s - 1))
    return g


def check_graph(spec: AutomatonSpec, traj: Trajectory, g: ExplanationGraph):
    """Structural invariants; returns a list of problems (empty when all hold)."""
    problems = []
    deg = g.out_degrees()
    times = g.times
    for c, s in times.items():
        faulty = traj.faulty(c, s)
        if (c in g.terminal) != faulty:
            problems.append(f"cell {c}: terminal={c in g.terminal} but fault={faulty}")
        if c in g.terminal and deg[c]:
            problems.append(f"terminal {c} has out-degree {deg[c]}")
        if c not in g.terminal and deg[c] < spec.reduced_threshold[c]:
            problems.append(f"non-terminal {c} has out-degree {deg[c]}")
    for (b, s), (c, r) in g.arcs:
        if times.get(b) != s or times.get(c) != r:
            problems.append(f"arc ({b},{s})->({c},{r}) leaves the node set")
        if r != s - 1:
            problems.append(f"arc ({b},{s})->({c},{r}) does not step back one unit")
        if c not in spec.effective_guardians[b]:
            problems.append(f"arc {b}->{c} is not a dependence arc")
    X, Y, Z = g.projected()
    indeg = {c: 0 for c in times}
    for _, c in Z:
        indeg[c] += 1
    sources = [c for c, d in indeg.items() if d == 0]
    if sources != [g.root[0]]:
        problems.append(f"sources {sources} != root")
    # arcs go strictly back in time, so the projected graph is acyclic; check reachability
    seen = {g.root[0]}
    stack = [g.root[0]]
    adj = {}
    for b, c in Z:
        adj.setdefault(b, []).append(c)
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if seen != set(times):
        problems.append("some nodes are unreachable from the root")
    return problems


def count_bound(q: int, n: int) -> int:
    """Upper bound q**(2qn+1) on explanation graphs with n vertices."""
    return q ** (2 * q * n + 1)


def count_bound_sum(q: int, n: int) -> int:
    """Geometric-sum form: sum over j <= 2qn of q**j."""
    return (q ** (2 * q * n + 1) - 1) // (q - 1)


def error_bound(q: int, M, eps: float) -> float:
    """q**(2qM+1) eps / (1 - q**(2qM) eps), evaluated in log space and capped at 1."""
    if not (0.0 <= eps <= 1.0):
        raise DomainError("eps must lie in [0, 1]")
    if eps == 0:
        return 0.0
    M = float(M)
    log_x = 2 * q * M * math.log(q) + math.log(eps)  # log(q**(2qM) eps)
    if log_x >= 0:
        raise DomainError("q**(2qM) * eps must be < 1")
    log_bound = math.log(q) + log_x - math.log1p(-math.exp(log_x))
    return 1.0 if log_bound >= 0 else math.exp(log_bound)


def error_bound_exact(q: int, M, eps) -> Fraction:
    """Exact rational value of the same bound (M an integer)."""
    eps = Fraction(eps)
    x = Fraction(q) ** (2 * q * int(M)) * eps
    if x >= 1:
        raise DomainError("q**(2qM) * eps must be < 1")
    return min(Fraction(1), q * x / (1 - x))
