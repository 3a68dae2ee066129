import numpy as np
import pytest

from conftest import automaton
from tessfault.errors import InsufficientMargin
from tessfault.faults import FaultConfig
from tessfault.simulate import (
    AdversarialBoundary,
    FrozenZero,
    manifest,
    monte_carlo,
    run_deterministic,
    run_trial,
)
from tessfault.tessellation import INF


def test_no_faults_no_errors():
    s = automaton(5, 5, 4)
    r = run_trial(s, FaultConfig(0, 0, 1), 50)
    assert len(r.origin) == 51 and not r.origin.any()


def test_all_permanent_faults():
    s = automaton(5, 5, 3)
    r = run_trial(s, FaultConfig(0, 1, 1), 10)
    assert r.origin.all()


def test_trial_determinism_and_density():
    s = automaton(4, 5, 5)
    a = run_trial(s, FaultConfig(0.05, 0.01, 77), 40, density=True)
    b = run_trial(s, FaultConfig(0.05, 0.01, 77), 40, density=True)
    c = run_trial(s, FaultConfig(0.05, 0.01, 77), 40)
    assert np.array_equal(a.origin, b.origin) and np.array_equal(a.origin, c.origin)
    assert len(a.density) == 41 and 0 <= a.density.min() <= a.density.max() <= 1


def test_margin_required():
    s = automaton(4, 5, 0)
    with pytest.raises(InsufficientMargin):
        run_trial(s, FaultConfig(0, 0, 0), 3)


def test_monotone_in_alpha():
    s = automaton(4, 5, 5)
    for seed in range(5):
        lo = run_trial(s, FaultConfig(0.02, 0.0, seed), 60).origin
        hi = run_trial(s, FaultConfig(0.06, 0.0, seed), 60).origin
        assert (lo <= hi).all()


def test_frozen_zero_below_adversarial():
    s = automaton(4, 4, 6)
    for seed in range(5):
        fz = run_trial(s, FaultConfig(0.05, 0, seed), 60, FrozenZero).origin
        ad = run_trial(s, FaultConfig(0.05, 0, seed), 60, AdversarialBoundary).origin
        assert (fz <= ad).all()


def test_monte_carlo_zero_curve():
    s = automaton(4, 5, 4)
    c = monte_carlo(s, FaultConfig(0, 0, 3), 20, 10)
    assert not c.rate.any() and c.ci_low.max() == 0
    assert c.to_csv().splitlines()[:2] == ["# schema_version=1", "t,error_rate,ci_low,ci_high"]


def test_monte_carlo_reproducible_and_worker_independent():
    s = automaton(4, 4, 5)
    cfg = FaultConfig(0.05, 0, 123)
    a = monte_carlo(s, cfg, 30, 12, AdversarialBoundary)
    b = monte_carlo(s, cfg, 30, 12, AdversarialBoundary, workers=2)
    assert a.to_csv() == b.to_csv()
    assert (a.ci_low <= a.rate).all() and (a.rate <= a.ci_high).all()


def test_intolerant_flat_lattice_error_grows():
    # without a boundary pulling errors in, {4,4} still accumulates errors over time
    s = automaton(4, 4, 20)
    c = monte_carlo(s, FaultConfig(0.05, 0, 8), 500, 60, FrozenZero)
    early = c.rate[1:50].mean()
    late = c.rate[-50:].mean()
    assert late > early


def test_deterministic_runs():
    s = automaton(4, 4, 5)
    assert all(len(x) == 0 for x in run_deterministic(s, [], 20))
    face = next(f for f in s.t.faces if 0 in f)
    traj = run_deterministic(s, face, 1000)
    assert all(sorted(x.tolist()) == sorted(face) for x in traj)
    with pytest.raises(InsufficientMargin):
        run_deterministic(s, [int(s.t.generations[5][0])], 3)


def test_star_island_persists():
    s = automaton(3, 6, 3)
    cells = [0, *s.t.neighbors[0]]
    traj = run_deterministic(s, cells, 1000)
    assert all(len(x) == 7 for x in traj)


def test_manifest_fields():
    s = automaton(INF, 5, 3)
    m = manifest("simulate", s, FaultConfig(0.1, 0, 4))
    assert m["schema_version"] == 1
    assert m["tessellation"]["p"] == "inf"
    assert len(m["tessellation"]["content_hash"]) == 40
    assert m["config"]["seed"] == 4
