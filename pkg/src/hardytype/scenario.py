"""Core data model: Bell scenarios, behaviors, events, deterministic strategies.

A behavior is the full table of joint conditional probabilities P(a,b|x,y)
for a symmetric bipartite scenario with k inputs and d outcomes per party.
Everything here is immutable after construction and safe to share between
workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

# Entry bounds are checked tightly; normalization gets a looser tolerance
# because externally supplied tables (optimizer output) carry float error.
ENTRY_TOL = 1e-12
NORM_TOL = 1e-9


@dataclass(frozen=True)
class Scenario:
    """Symmetric bipartite Bell scenario: k inputs, d outcomes per party."""

    k: int
    d: int

    def __post_init__(self) -> None:
        if self.k < 2 or self.d < 2:
            raise ValueError(f"scenario needs k >= 2 and d >= 2, got ({self.k}, {self.d})")

    @property
    def n_deterministic(self) -> int:
        """Number of local deterministic strategies, d^(2k)."""
        return self.d ** (2 * self.k)


@dataclass(frozen=True)
class Event:
    """A set of joint outcomes at one input pair (x, y).

    The event fires when the observed outcome pair (a, b) lies in
    ``outcomes``. Outcome labels are integers 0..d-1 and the order used by
    the less/greater constructors is plain numeric order.
    """

    x: int
    y: int
    outcomes: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if not self.outcomes:
            raise ValueError("event outcome set must be nonempty")
        for a, b in self.outcomes:
            if a < 0 or b < 0:
                raise ValueError(f"negative outcome label in {(a, b)}")

    def validate(self, sc: Scenario) -> None:
        if not (0 <= self.x < sc.k and 0 <= self.y < sc.k):
            raise ValueError(f"event inputs ({self.x},{self.y}) invalid for k={sc.k}")
        for a, b in self.outcomes:
            if a >= sc.d or b >= sc.d:
                raise ValueError(f"outcome pair {(a, b)} invalid for d={sc.d}")

    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Outcome pairs in sorted order (deterministic serialization)."""
        return tuple(sorted(self.outcomes))

    def fires(self, a: int, b: int) -> bool:
        return (a, b) in self.outcomes

    def mask(self, d: int) -> np.ndarray:
        """Dense (d, d) 0/1 indicator of the outcome set."""
        m = np.zeros((d, d), dtype=np.int64)
        for a, b in self.outcomes:
            m[a, b] = 1
        return m

    def __str__(self) -> str:
        return f"P({set(self.pairs())}|{self.x},{self.y})"


def point_event(a: int, b: int, x: int, y: int) -> Event:
    """Single-outcome event P(a,b|x,y)."""
    return Event(x=x, y=y, outcomes=frozenset({(a, b)}))


def less_event(x: int, y: int, d: int) -> Event:
    """Event 'Alice's outcome is below Bob's': {(a,b) : a < b}."""
    return Event(x=x, y=y, outcomes=frozenset((a, b) for a in range(d) for b in range(d) if a < b))


def greater_event(x: int, y: int, d: int) -> Event:
    """Event 'Alice's outcome is above Bob's': {(a,b) : a > b}."""
    return Event(x=x, y=y, outcomes=frozenset((a, b) for a in range(d) for b in range(d) if a > b))


def equal_event(x: int, y: int, d: int) -> Event:
    """Event {(a,b) : a = b}; complements less/greater to a partition."""
    return Event(x=x, y=y, outcomes=frozenset((a, a) for a in range(d)))


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed outcome assignments: sA[x] for Alice, sB[y] for Bob."""

    sA: tuple[int, ...]
    sB: tuple[int, ...]

    def validate(self, sc: Scenario) -> None:
        if len(self.sA) != sc.k or len(self.sB) != sc.k:
            raise ValueError(
                f"strategy has lengths ({len(self.sA)},{len(self.sB)}), scenario needs k={sc.k}"
            )
        for v in (*self.sA, *self.sB):
            if not (0 <= v < sc.d):
                raise ValueError(f"outcome {v} invalid for d={sc.d}")


@dataclass(frozen=True, eq=False)
class Behavior:
    """Probability table p[a, b, x, y] over a scenario.

    The array is dense float64, indexed (a, b, x, y), and frozen read-only.
    Use :func:`behavior` to construct with validation.
    """

    scenario: Scenario
    p: np.ndarray

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[a, b, x, y])

    def marginal_A(self) -> np.ndarray:
        """Alice's marginals, shape (d, k, k) indexed (a, x, y)."""
        return self.p.sum(axis=1)

    def marginal_B(self) -> np.ndarray:
        """Bob's marginals, shape (d, k, k) indexed (b, x, y)."""
        return self.p.sum(axis=0)

    def allclose(self, other: "Behavior", tol: float = 1e-12) -> bool:
        return self.scenario == other.scenario and bool(np.all(np.abs(self.p - other.p) <= tol))


def behavior(sc: Scenario, p: np.ndarray, *, validate: bool = True) -> Behavior:
    """Wrap a (d, d, k, k) probability array, checking bounds and normalization."""
    arr = np.asarray(p, dtype=np.float64)
    expected = (sc.d, sc.d, sc.k, sc.k)
    if arr.shape != expected:
        raise ValueError(f"behavior array shape {arr.shape}, expected {expected}")
    if validate:
        if arr.min() < -ENTRY_TOL or arr.max() > 1.0 + ENTRY_TOL:
            raise ValueError("behavior entries outside [0, 1]")
        totals = arr.sum(axis=(0, 1))
        if np.max(np.abs(totals - 1.0)) > NORM_TOL:
            raise ValueError(
                f"behavior not normalized: worst setting deviates by {np.max(np.abs(totals - 1.0)):.3e}"
            )
    arr = arr.copy()
    arr.flags.writeable = False
    return Behavior(scenario=sc, p=arr)


def behavior_from_deterministic(s: DeterministicStrategy, sc: Scenario) -> Behavior:
    """Delta behavior of a deterministic strategy: p = 1 iff a=sA[x] and b=sB[y]."""
    s.validate(sc)
    p = np.zeros((sc.d, sc.d, sc.k, sc.k))
    xs = np.arange(sc.k)
    a_idx = np.asarray(s.sA)[xs]
    b_idx = np.asarray(s.sB)[xs]
    p[a_idx[:, None], b_idx[None, :], xs[:, None], xs[None, :]] = 1.0
    p.flags.writeable = False
    return Behavior(scenario=sc, p=p)


def event_probability(b: Behavior, e: Event) -> float:
    """Probability of an event: sum of p(a,b|x,y) over its outcome pairs."""
    e.validate(b.scenario)
    pa, pb = zip(*e.pairs())
    return float(b.p[list(pa), list(pb), e.x, e.y].sum())


def mix(behaviors: Sequence[Behavior], weights: Sequence[float]) -> Behavior:
    """Entrywise convex combination of behaviors over one scenario."""
    if len(behaviors) != len(weights):
        raise ValueError("behaviors and weights differ in length")
    if not behaviors:
        raise ValueError("cannot mix an empty collection")
    w = np.asarray(weights, dtype=np.float64)
    if w.min() < 0:
        raise ValueError("mixture weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights sum to {w.sum()!r}, not 1")
    sc = behaviors[0].scenario
    for b in behaviors[1:]:
        if b.scenario != sc:
            raise ValueError("cannot mix behaviors over different scenarios")
    p = sum(wi * b.p for wi, b in zip(w, behaviors))
    p.flags.writeable = False
    return Behavior(scenario=sc, p=p)


@dataclass(frozen=True)
class NoSignalingReport:
    """Worst marginal discrepancy per party and the verdict at a tolerance."""

    max_dev_A: float
    max_dev_B: float
    tol: float

    @property
    def max_dev(self) -> float:
        return max(self.max_dev_A, self.max_dev_B)

    @property
    def passed(self) -> bool:
        return self.max_dev <= self.tol


def check_no_signaling(b: Behavior, tol: float = 1e-10) -> NoSignalingReport:
    """Largest dependence of one party's marginal on the other party's input."""
    mA = b.marginal_A()  # (a, x, y): must not depend on y
    mB = b.marginal_B()  # (b, x, y): must not depend on x
    dev_A = float(np.max(mA.max(axis=2) - mA.min(axis=2)))
    dev_B = float(np.max(mB.max(axis=1) - mB.min(axis=1)))
    return NoSignalingReport(max_dev_A=dev_A, max_dev_B=dev_B, tol=tol)


def enumerate_strategies(sc: Scenario) -> Iterator[DeterministicStrategy]:
    """All d^(2k) deterministic strategies in lexicographic (sA, sB) order."""
    from itertools import product

    for digits in product(range(sc.d), repeat=2 * sc.k):
        yield DeterministicStrategy(sA=digits[: sc.k], sB=digits[sc.k :])


# -- JSON interchange ---------------------------------------------------------

def behavior_to_json(b: Behavior) -> dict:
    """JSON object {"k", "d", "p"} with p nested in a->b->x->y order."""
    return {"k": b.scenario.k, "d": b.scenario.d, "p": b.p.tolist()}


def behavior_from_json(obj: dict) -> Behavior:
    sc = Scenario(k=int(obj["k"]), d=int(obj["d"]))
    return behavior(sc, np.asarray(obj["p"], dtype=np.float64))
