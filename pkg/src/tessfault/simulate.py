"""Seeded trajectories, Monte Carlo error curves and fault-free persistence runs."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import _kernels
from ._accel import USE_NUMBA, backend
from .automaton import AutomatonSpec, BoundaryPolicy, pin_boundary, step
from .errors import InsufficientMargin
from .faults import FaultConfig, FaultTrace

SCHEMA_VERSION = 1

FrozenZero = BoundaryPolicy.FROZEN_ZERO
AdversarialBoundary = BoundaryPolicy.ADVERSARIAL


@dataclass
class TrialResult:
    origin: np.ndarray  # uint8, length T + 1
    seed: int
    config: dict
    density: np.ndarray | None = None  # fraction of interior cells in error per step


@dataclass
class ErrorCurve:
    t: np.ndarray
    rate: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    trials: int
    seeds: list = field(default_factory=list)

    @property
    def terminal_rate(self):
        return float(self.rate[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "error_rate", "ci_low", "ci_high"])
        for row in zip(self.t.tolist(), self.rate, self.ci_low, self.ci_high):
            w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
        return buf.getvalue()


def initial_state(spec: AutomatonSpec, trace: FaultTrace, boundary):
    # only manufacturing faults act at time 0
    state = trace.mask(0).astype(np.uint8)
    return pin_boundary(spec, state, boundary)


def _check_margin(spec, T):
    if T < 0:
        raise ValueError("T must be >= 0")
    if spec.t.max_generation < 1:
        raise InsufficientMargin("the origin needs at least one generation around it")


def run_trial(spec: AutomatonSpec, config: FaultConfig, T: int, boundary=FrozenZero, density=False):
    """Single trajectory from all-zero memory; ``origin[t]`` is the origin's error bit at time t."""
    _check_margin(spec, T)
    boundary = BoundaryPolicy.parse(boundary)
    trace = FaultTrace(config, spec.n)
    state = initial_state(spec, trace, boundary)
    origin = np.zeros(T + 1, dtype=np.uint8)
    origin[0] = state[0]
    dens = None
    interior = ~spec.boundary
    if density or not USE_NUMBA:
        if density:
            dens = np.zeros(T + 1)
            dens[0] = state[interior].mean()
        for t in range(1, T + 1):
            state = step(spec, state, trace.mask(t), boundary)
            origin[t] = state[0]
            if density:
                dens[t] = state[interior].mean()
    elif T > 0:
        faults = trace.masks(1, T + 1)
        _kernels.run_steps_numba(
            spec.eff_indptr,
            spec.eff_indices,
            spec.eff_threshold,
            state,
            faults,
            spec.boundary.astype(np.uint8),
            np.uint8(boundary.pin_value),
            origin,
        )
    return TrialResult(origin, config.seed, asdict(config), dens)


def trial_seeds(master_seed: int, trials: int):
    ss = np.random.SeedSequence(master_seed)
    return [int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(trials)]


def _one(args):
    spec, alpha, beta, seed, T, boundary = args
    return run_trial(spec, FaultConfig(alpha, beta, seed), T, boundary).origin


def monte_carlo(spec, config: FaultConfig, T: int, trials: int, boundary=FrozenZero, workers=1):
    """Pointwise origin error rate with 95% Wilson intervals over ``trials`` seeded runs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    boundary = BoundaryPolicy.parse(boundary)
    seeds = trial_seeds(config.seed, trials)
    jobs = [(spec, config.alpha, config.beta, s, T, boundary) for s in seeds]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_one, jobs))
    else:
        rows = [_one(j) for j in jobs]
    hits = np.sum(np.vstack(rows), axis=0)
    low, high = proportion_confint(hits, trials, alpha=0.05, method="wilson")
    return ErrorCurve(
        np.arange(T + 1),
        hits / trials,
        np.asarray(low, dtype=float),
        np.asarray(high, dtype=float),
        trials,
        seeds,
    )


def run_deterministic(spec: AutomatonSpec, initial, T: int, clamp=True, permanent=(), boundary=FrozenZero):
    """Fault-free run (apart from ``permanent`` cells held at 1) from a given error set.

    With ``clamp`` every cell outside the initial set and the permanent set is
    forced back to 0 after each step, the least favourable surroundings for
    persistence.  Returns a list of sorted error-set arrays, one per time.
    """
    initial = np.asarray(sorted(set(int(x) for x in initial)), dtype=np.int64)
    permanent = np.asarray(sorted(set(int(x) for x in permanent)), dtype=np.int64)
    for v in np.concatenate([initial, permanent]):
        if spec.boundary[v]:
            raise InsufficientMargin(f"cell {v} lies on the truncation boundary")
    n = spec.n
    state = np.zeros(n, dtype=np.uint8)
    state[initial] = 1
    state[permanent] = 1
    fault = np.zeros(n, dtype=np.uint8)
    fault[permanent] = 1
    keep = np.zeros(n, dtype=bool)
    keep[initial] = True
    keep[permanent] = True
    out = [np.flatnonzero(state)]
    for _ in range(T):
        state = step(spec, state, fault, boundary)
        if clamp:
            state[~keep] = 0
        out.append(np.flatnonzero(state))
    return out


def manifest(command, spec, config=None, extra=None):
    from . import __version__

    m = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "tool_version": __version__,
        "backend": backend(),
        "tessellation": {
            "p": "inf" if spec.t.p == float("inf") else int(spec.t.p),
            "q": spec.t.q,
            "max_generation": spec.t.max_generation,
            "content_hash": spec.t.content_hash(),
        },
        "weakening": spec.weakening,
    }
    if config is not None:
        m["config"] = asdict(config)
    if extra:
        m.update(extra)
    return m


def manifest_json(m) -> str:
    return json.dumps(m, indent=2, sort_keys=True)
