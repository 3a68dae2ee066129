"""Fault models and reproducible fault sampling.

Fault indicators come from a counter-based generator (Philox) keyed by
``(seed, stream)``, where stream 0 holds manufacturing faults and stream
``t`` (t >= 1) holds the transient faults that act on the state at time t.
Time 0 sees only manufacturing faults.  Cell ``c`` reads the ``c``-th
32-bit word of its stream, so an indicator depends only on (seed, cell, t).
A cell is faulty when its word falls below ``rate * 2**32``; raising a rate
therefore only adds faults, which gives the monotone coupling used in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_SCALE = float(2**32)


@dataclass(frozen=True)
class FaultConfig:
    alpha: float = 0.0
    beta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            x = getattr(self, name)
            if not (0.0 <= x <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {x}")
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def model(self) -> str:
        return "transient" if self.beta == 0 else "combined"

    @property
    def epsilon(self) -> float:
        return epsilon(self)


def epsilon(config) -> float:
    """Probability that a given cell is adversary-controlled at a given time."""
    a, b = config.alpha, config.beta
    return a + b - a * b


def _words(seed, stream, n):
    bg = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64), counter=0)
    raw = bg.random_raw((n + 1) // 2)
    words = np.empty(2 * len(raw), dtype=np.uint64)
    words[0::2] = raw & np.uint64(0xFFFFFFFF)
    words[1::2] = raw >> np.uint64(32)
    return words[:n]


def _cut(rate):
    # P(word < cut) = cut / 2**32; rate 1 makes every cell faulty
    return np.uint64(min(int(np.ceil(rate * _SCALE)), 2**32))


@dataclass
class FaultTrace:
    """Fault stream for one trial over ``n`` cells."""

    config: FaultConfig
    n: int

    def __post_init__(self):
        if self.config.beta > 0:
            self.permanent = _words(self.config.seed, 0, self.n) < _cut(self.config.beta)
        else:
            self.permanent = np.zeros(self.n, dtype=bool)

    def transient(self, t: int):
        if t < 0:
            raise DomainError("t must be >= 0")
        if self.config.alpha <= 0 or t == 0:
            return np.zeros(self.n, dtype=bool)
        return _words(self.config.seed, t, self.n) < _cut(self.config.alpha)

    def mask(self, t: int):
        """Cells controlled by the adversary at time ``t``."""
        return self.permanent | self.transient(t)

    def masks(self, t0: int, t1: int):
        """Stacked masks for times t0..t1-1 as uint8, shape (t1 - t0, n)."""
        out = np.empty((t1 - t0, self.n), dtype=np.uint8)
        for i, t in enumerate(range(t0, t1)):
            out[i] = self.mask(t)
        return out

    def is_faulty(self, cell: int, t: int) -> bool:
        return bool(self.permanent[cell] or self.transient(t)[cell])


def sample_mask(config: FaultConfig, trace: FaultTrace | None, cells, t: int):
    """Fault indicators for ``cells`` at time ``t``."""
    cells = np.asarray(cells)
    if trace is None:
        n = int(cells.max()) + 1 if cells.size else 0
        trace = FaultTrace(config, n)
    return trace.mask(t)[cells]


def rate_translation(xi: float, kappa: int, lam: int):
    """(eta, zeta) = (xi**lam, 1 - (1 - xi)**(kappa*lam))."""
    if not (0.0 <= xi <= 1.0):
        raise DomainError("xi must lie in [0, 1]")
    if kappa < 2 or lam < 1:
        raise DomainError("need kappa >= 2 and lam >= 1")
    eta = xi**lam
    zeta = -np.expm1(kappa * lam * np.log1p(-xi)) if xi < 1 else 1.0
    return float(eta), float(zeta)


def eta_from_zeta(zeta: float, kappa: int, lam: int) -> float:
    """Base-automaton fault rate whose translated sped-up rate is ``zeta``."""
    if not (0.0 <= zeta <= 1.0):
        raise DomainError("zeta must lie in [0, 1]")
    if kappa < 2 or lam < 1:
        raise DomainError("need kappa >= 2 and lam >= 1")
    if zeta == 1.0:
        return 1.0
    xi = -np.expm1(np.log1p(-zeta) / (kappa * lam))
    return float(xi**lam)


def lambda_for(spec, kappa: int) -> int:
    """Common size of the radius-``kappa`` dependence ball, checked over deep interior cells."""
    from .automaton import dependence_ball_size

    t = spec.t
    lam = dependence_ball_size(spec, t.origin, kappa)
    for v in range(t.num_vertices):
        if t.generation[v] + kappa < t.max_generation:
            if dependence_ball_size(spec, v, kappa) != lam:
                raise DomainError(f"dependence ball at {v} differs from the origin's")
    return lam
