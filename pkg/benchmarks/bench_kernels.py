"""Compare the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py [--p 5 --q 5 --generations 9 --repeat 20]

Both paths are timed in one process: the numba kernels are compiled on import
regardless of TESSFAULT_DISABLE_NUMBA, and the numpy versions are called
directly.  Results are checked for equality before timing.
"""

import argparse
import itertools
import time

import numpy as np

from tessfault import _kernels
from tessfault._accel import HAVE_NUMBA
from tessfault.automaton import build_automaton
from tessfault.faults import FaultConfig, FaultTrace
from tessfault.tessellation import TessellationSpec, build_tessellation, parse_p


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_step(spec, repeat, steps):
    rng = np.random.default_rng(0)
    state = (rng.random(spec.n) < 0.1).astype(np.uint8)
    faults = FaultTrace(FaultConfig(0.01, 0.0, 1), spec.n).masks(1, steps + 1)
    args = (spec.eff_indptr, spec.eff_indices, spec.eff_threshold)

    def run_numpy():
        s = state
        for f in faults:
            s = _kernels.majority_step_numpy(*args, s, f, spec.eff_rows)
        return s

    def run_numba():
        s = state
        for f in faults:
            s = _kernels.majority_step_numba(*args, s, f)
        return s

    assert np.array_equal(run_numpy(), run_numba())
    return best_of(run_numpy, repeat), best_of(run_numba, repeat)


def bench_union(repeat):
    rng = np.random.default_rng(1)
    cells, per_cell, pick = 7, 35, 4
    slot_sets = rng.integers(0, 2**40, size=(cells, per_cell), dtype=np.uint64)
    counts = np.full(cells, per_cell, dtype=np.int64)
    choices = np.array(list(itertools.combinations(range(cells), pick)))[:4]
    targets = rng.integers(0, 2**40, size=8, dtype=np.uint64) & np.uint64(0x3)
    a = _kernels.union_cover_failures_numpy(slot_sets, counts, choices, targets)
    b = _kernels.union_cover_failures_numba(slot_sets, counts, choices, targets)
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]
    t_np = best_of(lambda: _kernels.union_cover_failures_numpy(slot_sets, counts, choices, targets), repeat)
    t_nb = best_of(lambda: _kernels.union_cover_failures_numba(slot_sets, counts, choices, targets), repeat)
    return t_np, t_nb


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", default="5")
    ap.add_argument("--q", type=int, default=5)
    ap.add_argument("--generations", type=int, default=9)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    t = build_tessellation(TessellationSpec(parse_p(args.p), args.q, args.generations))
    spec = build_automaton(t)
    print(f"{t.spec.label} G={args.generations}: {spec.n} cells, {len(spec.eff_indices)} guardian links")
    rows = [
        (f"majority step x{args.steps}", *bench_step(spec, args.repeat, args.steps)),
        ("union coverage (4 x 35^4)", *bench_union(args.repeat)),
    ]
    print(f"{'kernel':<28}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, a, b in rows:
        print(f"{name:<28}{a:>10.4f}{b:>10.4f}{a / b:>8.1f}x")


if __name__ == "__main__":
    main()
