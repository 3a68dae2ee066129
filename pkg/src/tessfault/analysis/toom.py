"""Toom potentials built from an addressing scheme, and the three conditions they must meet.

With l colors there are n = l + 1 component functions of a space-time point::

    L_{k+1}(a, t) = -(l+1) * |a|_k - t      for colors k = 0 .. l-1
    L_{l+1}(a, t) =  (l+1) * |a|   + l * t

All checks compare a point (a, t+1) against points (b, t) it depends on.  The
differences are time invariant, so every check works on norm differences.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..addressing import AddressingScheme, compute_norms
from ..automaton import AutomatonSpec, minimal_error_sets
from ..errors import ConditionViolated, NotInvariant
from ..tessellation import Tessellation

VALIDATION_SAMPLES = 10
MAX_BALL = 64  # bitmask width of the exhaustive validator


@dataclass
class ToomPotential:
    l: int
    norms: np.ndarray  # (V, l+1): column 0 is |a|, column k+1 is |a|_k
    M: int
    kappa: int = 1

    @property
    def n(self):
        return self.l + 1

    def values(self, a, t):
        """(L_1, ..., L_n) at (a, t)."""
        l = self.l
        row = self.norms[a]
        out = np.empty(self.n, dtype=np.int64)
        out[:l] = -(l + 1) * row[1:] - t
        out[l] = (l + 1) * row[0] + l * t
        return out

    def deltas(self, a, bs):
        """L_k(b, t) - L_k(a, t+1) for each b in ``bs``; shape (len(bs), n)."""
        l = self.l
        bs = np.asarray(bs, dtype=np.int64)
        d = self.norms[bs] - self.norms[a]
        out = np.empty((len(bs), self.n), dtype=np.int64)
        out[:, :l] = -(l + 1) * d[:, 1:] + 1
        out[:, l] = (l + 1) * d[:, 0] - l
        return out


def build_potential(t: Tessellation, scheme: AddressingScheme, kappa=1, M=None) -> ToomPotential:
    """Potential with bound M = kappa * (l + 2) unless ``M`` is given.

    Along a dependence arc the last component moves by (l+1)*1 + l, so the
    smallest bound that actually holds is kappa*(l+1) + l; the report records
    the observed value next to the one being checked.
    """
    norms = compute_norms(t, scheme)
    if not np.array_equal(norms[:, 0], norms[:, 1:].sum(axis=1)):
        raise NotInvariant("norm identity |a| = sum_k |a|_k fails")
    if M is None:
        M = kappa * (scheme.l + 2)
    return ToomPotential(scheme.l, norms, int(M), kappa)


def component_name(potential, k):
    """Hypothesis label for component index k (0-based)."""
    if k == potential.l:
        return "norm-increase"
    return f"color-{k}-no-increase"


@dataclass
class ToomReport:
    kappa: int
    M: int
    region_size: int = 0
    observed_M: int = 0
    cond1_witness: tuple | None = None  # (a, b, component, delta)
    cond2_ok: bool = True
    cond3_failures: int = 0
    cond3_witness: dict | None = None
    validated: list = field(default_factory=list)  # (vertex, agree, unions examined)

    @property
    def cond1_ok(self):
        return self.observed_M <= self.M

    @property
    def cond3_ok(self):
        return self.cond3_failures == 0

    @property
    def validation_ok(self):
        return all(v[1] for v in self.validated)

    @property
    def passed(self):
        return self.cond1_ok and self.cond2_ok and self.cond3_ok and self.validation_ok

    def to_dict(self):
        return {
            "kappa": self.kappa,
            "M": self.M,
            "observed_M": self.observed_M,
            "region_size": self.region_size,
            "condition_1": {"passed": self.cond1_ok, "witness": self.cond1_witness},
            "condition_2": {"passed": self.cond2_ok},
            "condition_3": {
                "passed": self.cond3_ok,
                "failures": self.cond3_failures,
                "witness": self.cond3_witness,
            },
            "validation": [list(v) for v in self.validated],
            "passed": self.passed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def raise_if_failed(self):
        if not self.cond1_ok:
            raise ConditionViolated(
                f"bound |L_k(b) - L_k(a)| <= {self.M} fails (observed {self.observed_M})",
                self.cond1_witness,
            )
        if not self.cond2_ok:
            raise ConditionViolated("components do not sum to zero")
        if not self.cond3_ok:
            raise ConditionViolated("an error set has no cell raising some component", self.cond3_witness)
        if not self.validation_ok:
            raise ConditionViolated("constructive and exhaustive checks disagree", self.validated)


def default_region(spec: AutomatonSpec, kappa):
    G = spec.t.max_generation
    return [v for v in range(spec.n) if G - spec.t.generation[v] >= kappa]


def _ball(spec, v, radius):
    """Cells reachable from v by guardian paths of length 1..radius."""
    reach = set()
    layer = {v}
    for _ in range(radius):
        layer = {g for u in layer for g in spec.guardians[u]}
        reach |= layer
    return sorted(reach)


def verify_toom(spec: AutomatonSpec, potential: ToomPotential, region=None, kappa=None, seed=0, samples=VALIDATION_SAMPLES):
    """Check the three conditions for the ``kappa``-fold speed-up.

    Condition 1: |L_k(b, t) - L_k(a, t+1)| <= M on every dependence arc.
    Condition 2: the components sum to zero at every point.
    Condition 3: every error set of a holds, for every k, a cell b with
    L_k(b, t) - L_k(a, t+1) >= 1.  For kappa = 1 all minimal error sets are
    enumerated.  For kappa = 2 see ``_two_step_failures``.
    """
    kappa = potential.kappa if kappa is None else kappa
    if kappa not in (1, 2):
        raise ValueError("kappa must be 1 or 2")
    if region is None:
        region = default_region(spec, kappa)
    rep = ToomReport(kappa, potential.M, len(region))
    rng = np.random.default_rng(seed)
    for a in region:
        bs = _ball(spec, a, kappa)
        d = potential.deltas(a, bs)
        i, k = np.unravel_index(np.argmax(np.abs(d)), d.shape)
        if abs(d[i, k]) > rep.observed_M:
            rep.observed_M = int(abs(d[i, k]))
            if rep.observed_M > rep.M:
                rep.cond1_witness = (int(a), int(bs[i]), component_name(potential, k), int(d[i, k]))
        for t in (0, 1, 5):
            if potential.values(a, t).sum() != 0:
                rep.cond2_ok = False
        fails = _one_step_failures(spec, potential, a) if kappa == 1 else _two_step_failures(spec, potential, a)
        if fails:
            rep.cond3_failures += 1
            if rep.cond3_witness is None:
                rep.cond3_witness = fails[0]
    if kappa == 2 and samples:
        picks = rng.choice(len(region), size=min(samples, len(region)), replace=False)
        for i in sorted(picks.tolist()):
            rep.validated.append(_validate_exhaustive(spec, potential, region[i]))
    return rep


def _witness(spec, potential, a, k, cells):
    return {
        "vertex": int(a),
        "two_parent": bool(spec.t.two_parent[a]),
        "generation": int(spec.t.generation[a]),
        "error_set": sorted(int(c) for c in cells),
        "component": component_name(potential, k),
    }


def _one_step_failures(spec, potential, a):
    gs = spec.effective_guardians[a]
    good = potential.deltas(a, gs) >= 1  # (len(gs), n)
    pos = {g: i for i, g in enumerate(gs)}
    out = []
    for S in minimal_error_sets(spec, a):
        idx = [pos[c] for c in sorted(S.members)]
        hit = good[idx].any(axis=0)
        for k in np.flatnonzero(~hit):
            out.append(_witness(spec, potential, a, int(k), S.members))
        if out:
            break
    return out


def _two_step_failures(spec, potential, a):
    """Two-step move argument.

    A first step a -> c is safe for component k when every minimal error set
    of c holds a cell good for k (relative to a).  Every composed error set of
    a holds a good cell iff every minimal error set of a contains a safe c,
    i.e. iff fewer than threshold(a) guardians of a are unsafe.  On failure the
    witness unions the first non-good cells of the first unsafe guardians.
    """
    out = []
    gs = spec.effective_guardians[a]
    thr_a = int(spec.reduced_threshold[a])
    for k in range(potential.n):
        unsafe = []
        feeders = {}
        for c in gs:
            hs = spec.effective_guardians[c]
            bad = [h for h, ok in zip(hs, potential.deltas(a, hs)[:, k] >= 1) if not ok]
            if len(bad) >= spec.reduced_threshold[c]:
                unsafe.append(c)
                feeders[c] = bad[: int(spec.reduced_threshold[c])]
        if len(unsafe) >= thr_a:
            cells = set()
            for c in unsafe[:thr_a]:
                cells.update(feeders[c])
            out.append(_witness(spec, potential, a, k, cells))
    return out


def _validate_exhaustive(spec, potential, a):
    """Enumerate every composed error set of a as bitmasks and compare verdicts."""
    gs = spec.effective_guardians[a]
    cells = sorted(set(gs) | {h for c in gs for h in spec.effective_guardians[c]})
    if len(cells) > MAX_BALL:
        raise ValueError(f"two-step ball of {a} has {len(cells)} cells (> {MAX_BALL})")
    bit = {c: np.uint64(1) << np.uint64(i) for i, c in enumerate(cells)}
    sets = [[np.uint64(sum(int(bit[h]) for h in S.members)) for S in minimal_error_sets(spec, c)] for c in gs]
    width = max(len(s) for s in sets)
    slot_sets = np.zeros((len(gs), width), dtype=np.uint64)
    for i, s in enumerate(sets):
        slot_sets[i, : len(s)] = s
    counts = np.array([len(s) for s in sets])
    choices = np.array(list(itertools.combinations(range(len(gs)), int(spec.reduced_threshold[a]))))
    good = potential.deltas(a, cells) >= 1
    targets = np.array(
        [sum(int(bit[c]) for c, ok in zip(cells, good[:, k]) if ok) for k in range(potential.n)],
        dtype=np.uint64,
    )
    fails, total, _ = _kernels.union_cover_failures(slot_sets, counts, choices, targets)
    exhaustive = {k for k in range(potential.n) if fails[k]}
    constructive = {component_name(potential, k) for k in range(potential.n)} & {
        w["component"] for w in _two_step_failures(spec, potential, a)
    }
    agree = constructive == {component_name(potential, k) for k in exhaustive}
    return (int(a), bool(agree), int(total))
