"""Hot loops: one synchronous majority step, and exhaustive union-of-sets coverage.

Each kernel has a numba version and a numpy version with identical results;
``majority_step`` and ``union_cover_failures`` dispatch on the backend flag.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# majority step


@njit
def majority_step_numba(indptr, indices, thresh, state, fault):
    n = indptr.shape[0] - 1
    out = np.empty(n, dtype=np.uint8)
    for v in range(n):
        if fault[v]:
            out[v] = 1
            continue
        c = 0
        for j in range(indptr[v], indptr[v + 1]):
            c += state[indices[j]]
        out[v] = 1 if c >= thresh[v] else 0
    return out


def majority_step_numpy(indptr, indices, thresh, state, fault, rows=None):
    n = indptr.shape[0] - 1
    if rows is None:
        rows = np.repeat(np.arange(n), np.diff(indptr))
    counts = np.bincount(rows, weights=state[indices], minlength=n)
    out = (counts >= thresh) | fault.astype(bool)
    return out.astype(np.uint8)


def majority_step(indptr, indices, thresh, state, fault, rows=None):
    if USE_NUMBA:
        return majority_step_numba(indptr, indices, thresh, state, fault)
    return majority_step_numpy(indptr, indices, thresh, state, fault, rows)


@njit
def run_steps_numba(indptr, indices, thresh, state, faults, pinned, pin_value, record):
    """Apply ``faults.shape[0]`` steps; ``record[t]`` gets the state of cell ``record_cell``."""
    n = indptr.shape[0] - 1
    cur = state.copy()
    nxt = np.empty(n, dtype=np.uint8)
    T = faults.shape[0]
    for t in range(T):
        for v in range(n):
            if pinned[v]:
                nxt[v] = pin_value
                continue
            if faults[t, v]:
                nxt[v] = 1
                continue
            c = 0
            for j in range(indptr[v], indptr[v + 1]):
                c += cur[indices[j]]
            nxt[v] = 1 if c >= thresh[v] else 0
        record[t + 1] = nxt[0]
        cur, nxt = nxt, cur
    return cur


# --------------------------------------------------------------------------
# union coverage: does every union of one set per slot meet every target mask?


@njit
def union_cover_failures_numba(slot_sets, slot_counts, choices, targets):
    """Count unions that miss each target.

    ``slot_sets[i, j]`` is the bitmask of the j-th candidate set for cell i;
    ``choices[r]`` lists the cells whose sets are united for outer choice r.
    Returns (fail counts per target, total unions, witness row) where the
    witness row holds (r, target, j_0, j_1, ...) for the first failure or -1s.
    """
    n_choice, width = choices.shape
    n_targets = targets.shape[0]
    fails = np.zeros(n_targets, dtype=np.int64)
    witness = np.full(width + 2, -1, dtype=np.int64)
    total = 0
    idx = np.zeros(width, dtype=np.int64)
    prefix = np.zeros(width + 1, dtype=np.uint64)
    for r in range(n_choice):
        sizes = np.empty(width, dtype=np.int64)
        n_combo = 1
        for i in range(width):
            sizes[i] = slot_counts[choices[r, i]]
            n_combo *= sizes[i]
        total += n_combo
        for i in range(width):
            idx[i] = 0
        for i in range(width):
            prefix[i + 1] = prefix[i] | slot_sets[choices[r, i], 0]
        while True:
            u = prefix[width]
            for k in range(n_targets):
                if (u & targets[k]) == 0:
                    fails[k] += 1
                    if witness[0] < 0:
                        witness[0] = r
                        witness[1] = k
                        for i in range(width):
                            witness[i + 2] = idx[i]
            # odometer increment, last slot fastest
            i = width - 1
            while i >= 0:
                idx[i] += 1
                if idx[i] < sizes[i]:
                    break
                idx[i] = 0
                i -= 1
            if i < 0:
                break
            for m in range(i, width):
                prefix[m + 1] = prefix[m] | slot_sets[choices[r, m], idx[m]]
    return fails, total, witness


def union_cover_failures_numpy(slot_sets, slot_counts, choices, targets):
    n_choice, width = choices.shape
    fails = np.zeros(len(targets), dtype=np.int64)
    witness = np.full(width + 2, -1, dtype=np.int64)
    total = 0
    for r in range(n_choice):
        cells = choices[r]
        u = np.zeros(1, dtype=np.uint64)
        for c in cells:
            u = (u[:, None] | slot_sets[c, : slot_counts[c]][None, :]).ravel()
        total += u.size
        for k, tk in enumerate(targets):
            miss = (u & tk) == 0
            nm = int(miss.sum())
            fails[k] += nm
            if nm and witness[0] < 0:
                flat = int(np.argmax(miss))
                shape = [int(slot_counts[c]) for c in cells]
                witness[0] = r
                witness[1] = k
                witness[2:] = np.unravel_index(flat, shape)
    return fails, total, witness


def union_cover_failures(slot_sets, slot_counts, choices, targets):
    args = (
        np.ascontiguousarray(slot_sets, dtype=np.uint64),
        np.ascontiguousarray(slot_counts, dtype=np.int64),
        np.ascontiguousarray(choices, dtype=np.int64),
        np.ascontiguousarray(targets, dtype=np.uint64),
    )
    if USE_NUMBA:
        return union_cover_failures_numba(*args)
    return union_cover_failures_numpy(*args)
