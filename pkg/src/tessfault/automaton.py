"""Majority-vote automata on a tessellation: guardians, thresholds, weakenings, speed-ups."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _kernels
from .errors import BoundaryVertex, OutsidePositiveRegion, ShapeMismatch, WeakeningNotApplicable
from .tessellation import INF, Strength, Tessellation, assign_strength

# weakening rule ids, named by what each cell ignores (besides itself when q is even)
IGNORE_PARENTS = "parents"
IGNORE_PARENTS_SIBLINGS = "parents+siblings"
IGNORE_PARENTS_WEAK_COUSIN = "parents+weak-cousin"
WEAKENINGS = (IGNORE_PARENTS, IGNORE_PARENTS_SIBLINGS, IGNORE_PARENTS_WEAK_COUSIN)


class BoundaryPolicy(enum.Enum):
    FROZEN_ZERO = "frozen-zero"
    ADVERSARIAL = "adversarial"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("_", "-")
        aliases = {
            "frozenzero": cls.FROZEN_ZERO,
            "frozen-zero": cls.FROZEN_ZERO,
            "zero": cls.FROZEN_ZERO,
            "adversarial": cls.ADVERSARIAL,
            "adversarialboundary": cls.ADVERSARIAL,
            "adversarial-boundary": cls.ADVERSARIAL,
            "one": cls.ADVERSARIAL,
        }
        if v not in aliases:
            raise ValueError(f"unknown boundary policy {value!r}")
        return aliases[v]

    @property
    def pin_value(self):
        return 0 if self is BoundaryPolicy.FROZEN_ZERO else 1


def in_positive_region(p, q) -> bool:
    if p == INF:
        return q >= 5
    if p == 3:
        return q >= 9
    if p == 4:
        return q >= 7
    return p >= 5 and q >= 5


def weakening_rule(p, q) -> str:
    """Ignore-set rule used to certify combined-fault tolerance of {p,q}."""
    if not in_positive_region(p, q):
        raise OutsidePositiveRegion(f"{{{p},{q}}} is outside the combined-tolerant region")
    if p == 3:
        return IGNORE_PARENTS_SIBLINGS
    if p != INF and p % 2 == 1:
        return IGNORE_PARENTS_WEAK_COUSIN
    return IGNORE_PARENTS


def ignore_set(t: Tessellation, v: int, rule: str, strength=None):
    """Guardians that ``v`` treats as permanently in error under ``rule``."""
    out = list(t.parents[v])
    if rule == IGNORE_PARENTS_SIBLINGS:
        if len(t.parents[v]) == 1:
            out += list(t.siblings(v))
    elif rule == IGNORE_PARENTS_WEAK_COUSIN:
        cs = t.cousins(v)
        if len(cs) == 1 and strength[v] == Strength.WEAK:
            out += list(cs)
    elif rule != IGNORE_PARENTS:
        raise WeakeningNotApplicable(f"unknown weakening {rule!r}")
    if t.q % 2 == 0:
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class ErrorSet:
    target: int
    members: frozenset

    def __len__(self):
        return len(self.members)


class AutomatonSpec:
    """Guardian lists in CSR form plus per-cell thresholds.

    ``indptr``/``indices`` hold the full guardian lists; ``eff_*`` hold the
    guardians that are not ignored together with the reduced thresholds, which
    is what the step kernel evaluates.
    """

    def __init__(self, t: Tessellation, weakening=None, kappa=1):
        if kappa < 1:
            raise ValueError("kappa must be >= 1")
        self.t = t
        self.kappa = int(kappa)
        self.self_vote = t.q % 2 == 0
        self.weakening = weakening
        n = t.num_vertices
        guardians = []
        for v in range(n):
            g = list(t.neighbors[v])
            if self.self_vote:
                g.append(v)
            guardians.append(tuple(g))
        self.guardians = tuple(guardians)
        q_odd = t.q + 1 if self.self_vote else t.q
        self.nominal_threshold = (q_odd + 1) // 2
        self.threshold = np.full(n, self.nominal_threshold, dtype=np.int64)
        self.boundary = ~np.asarray(t.interior)
        self.strength = None
        if weakening is not None:
            if weakening not in WEAKENINGS:
                raise WeakeningNotApplicable(f"unknown weakening {weakening!r}")
            if weakening == IGNORE_PARENTS_WEAK_COUSIN:
                self.strength = assign_strength(t)
            if weakening == IGNORE_PARENTS_SIBLINGS and t.p != 3:
                raise WeakeningNotApplicable("sibling weakening needs p = 3")
            self.ignore = tuple(ignore_set(t, v, weakening, self.strength) for v in range(n))
        else:
            self.ignore = tuple(() for _ in range(n))
        self.reduced_threshold = self.threshold - np.array([len(i) for i in self.ignore])
        self.indptr, self.indices = _csr(self.guardians)
        eff = [tuple(g for g in gs if g not in set(ig)) for gs, ig in zip(self.guardians, self.ignore)]
        self.effective_guardians = tuple(eff)
        self.eff_indptr, self.eff_indices = _csr(eff)
        self.eff_rows = np.repeat(np.arange(n), np.diff(self.eff_indptr))
        self.eff_threshold = self.reduced_threshold.astype(np.int64)

    @property
    def n(self):
        return self.t.num_vertices

    def is_interior(self, v):
        return not self.boundary[v]

    def dependents(self):
        """Reverse guardian lists over effective (non-ignored) guardians."""
        out = [[] for _ in range(self.n)]
        for v, gs in enumerate(self.effective_guardians):
            for g in gs:
                out[g].append(v)
        return tuple(tuple(x) for x in out)

    def __repr__(self):
        w = self.weakening or "none"
        return f"<AutomatonSpec {self.t.spec.label} weakening={w} kappa={self.kappa}>"


def _csr(lists):
    indptr = np.zeros(len(lists) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in lists])
    indices = np.fromiter(itertools.chain.from_iterable(lists), dtype=np.int64, count=indptr[-1])
    return indptr, indices


def build_automaton(t: Tessellation, weakening=None, kappa=1) -> AutomatonSpec:
    """Majority-vote automaton on ``t``; ``weakening="auto"`` picks the rule for (p, q)."""
    if weakening == "auto":
        weakening = weakening_rule(t.p, t.q)
    elif weakening is not None:
        if not in_positive_region(t.p, t.q):
            raise OutsidePositiveRegion(f"{t.spec.label} has no certified weakening")
    return AutomatonSpec(t, weakening, kappa)


def minimal_error_sets(spec: AutomatonSpec, a: int):
    """All minimal error sets of ``a``: reduced-threshold-sized subsets of non-ignored guardians."""
    if spec.boundary[a]:
        raise BoundaryVertex(f"vertex {a} has an incomplete guardian set")
    k = int(spec.reduced_threshold[a])
    for combo in itertools.combinations(spec.effective_guardians[a], k):
        yield ErrorSet(a, frozenset(combo))


def minimal_error_set_count(spec: AutomatonSpec, a: int) -> int:
    return comb(len(spec.effective_guardians[a]), int(spec.reduced_threshold[a]))


def _two_step_clear(spec, a):
    if spec.boundary[a] or any(spec.boundary[g] for g in spec.effective_guardians[a]):
        raise BoundaryVertex(f"vertex {a} is within two steps of the boundary")


def composed_error_sets(spec: AutomatonSpec, a: int):
    """Unions over an error set T of a of one minimal error set per member of T.

    These are the error sets of the two-fold speed-up (up to supersets).
    Yields ErrorSet objects without deduplication.
    """
    _two_step_clear(spec, a)
    per_cell = {}
    for T in minimal_error_sets(spec, a):
        choices = []
        for c in sorted(T.members):
            if c not in per_cell:
                per_cell[c] = [s.members for s in minimal_error_sets(spec, c)]
            choices.append(per_cell[c])
        for pick in itertools.product(*choices):
            yield ErrorSet(a, frozenset().union(*pick))


def composed_error_set_count(spec: AutomatonSpec, a: int) -> int:
    _two_step_clear(spec, a)
    total = 0
    for T in minimal_error_sets(spec, a):
        prod = 1
        for c in T.members:
            prod *= minimal_error_set_count(spec, c)
        total += prod
    return total


def _check_shape(spec, arr, name):
    if arr.shape != (spec.n,):
        raise ShapeMismatch(f"{name} has shape {arr.shape}, expected ({spec.n},)")


def pin_boundary(spec: AutomatonSpec, state, boundary):
    if boundary is None:
        return state
    policy = BoundaryPolicy.parse(boundary)
    state[spec.boundary] = policy.pin_value
    return state


def step(spec: AutomatonSpec, state, fault_mask=None, boundary=BoundaryPolicy.FROZEN_ZERO):
    """One synchronous update.

    A faulted cell is set to 1 (the adversary's best move when the stored bit
    is 0); other cells take 1 iff at least their reduced threshold of
    non-ignored guardians are 1.  Boundary cells are then pinned by policy;
    ``boundary=None`` leaves them to vote with their truncated guardian lists.
    """
    state = np.asarray(state, dtype=np.uint8)
    _check_shape(spec, state, "state")
    if fault_mask is None:
        fault_mask = np.zeros(spec.n, dtype=np.uint8)
    fault_mask = np.asarray(fault_mask, dtype=np.uint8)
    _check_shape(spec, fault_mask, "fault_mask")
    out = _kernels.majority_step(
        spec.eff_indptr, spec.eff_indices, spec.eff_threshold, state, fault_mask, spec.eff_rows
    )
    return pin_boundary(spec, out, boundary)


def speed_up_step(spec: AutomatonSpec, state, fault_masks=None, boundary=BoundaryPolicy.FROZEN_ZERO):
    """``spec.kappa`` consecutive steps, one fault mask per sub-step."""
    k = spec.kappa
    if fault_masks is None:
        fault_masks = [None] * k
    if len(fault_masks) != k:
        raise ShapeMismatch(f"expected {k} fault masks, got {len(fault_masks)}")
    for m in fault_masks:
        state = step(spec, state, m, boundary)
    return state


def dependence_ball_size(spec: AutomatonSpec, v: int, radius: int) -> int:
    """Number of cells reachable from ``v`` by guardian paths of length at most ``radius``."""
    seen = {v}
    frontier = {v}
    for _ in range(radius):
        nxt = set()
        for u in frontier:
            nxt.update(spec.guardians[u])
        frontier = nxt - seen
        seen |= nxt
    return len(seen)
