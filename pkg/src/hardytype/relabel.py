"""Input/outcome relabelings and the ladder-chain equivalence certificate.

The central construction maps the generalized chained-ladder argument (with
its terminal probability pinned to zero) onto the generalized transitivity
argument (with its penalty pinned to zero) by permuting inputs and, for an
even number of inputs, reversing the outcome order on both sides. The
equivalence is certified computationally as exact event-set equality, never
numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paradox import ParadoxSpec, generalized_cll, generalized_fti
from .scenario import Behavior, Event, Scenario, behavior


@dataclass(frozen=True)
class RelabelingMap:
    """Bijective relabeling of inputs and, per input, of outcomes.

    Semantics: the relabeled observable at input x' is the original
    observable at input ``input_A[x']`` with outcomes pushed through
    ``outcome_A[x']`` (so a relabeled outcome a' arises from the original
    outcome a with outcome_A[x'][a] = a'). Likewise for Bob.
    """

    input_A: tuple[int, ...]
    input_B: tuple[int, ...]
    outcome_A: tuple[tuple[int, ...], ...]
    outcome_B: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        k = len(self.input_A)
        for name, m in (("input_A", self.input_A), ("input_B", self.input_B)):
            if sorted(m) != list(range(k)):
                raise ValueError(f"{name}={m} is not a permutation of 0..{k - 1}")
        for name, maps in (("outcome_A", self.outcome_A), ("outcome_B", self.outcome_B)):
            if len(maps) != k:
                raise ValueError(f"{name} must provide one outcome map per input")
            d = len(maps[0])
            for pm in maps:
                if sorted(pm) != list(range(d)):
                    raise ValueError(f"{name} entry {pm} is not a permutation of 0..{d - 1}")

    @property
    def k(self) -> int:
        return len(self.input_A)

    @property
    def d(self) -> int:
        return len(self.outcome_A[0])


def identity_map(sc: Scenario) -> RelabelingMap:
    ident = tuple(range(sc.d))
    return RelabelingMap(
        input_A=tuple(range(sc.k)),
        input_B=tuple(range(sc.k)),
        outcome_A=(ident,) * sc.k,
        outcome_B=(ident,) * sc.k,
    )


def inverse_map(m: RelabelingMap) -> RelabelingMap:
    """The relabeling undoing ``m``."""
    k, d = m.k, m.d
    inv_in_A = [0] * k
    inv_in_B = [0] * k
    inv_out_A = [None] * k
    inv_out_B = [None] * k
    for xp in range(k):
        x = m.input_A[xp]
        inv_in_A[x] = xp
        perm = m.outcome_A[xp]
        inv_out_A[x] = tuple(int(np.argsort(perm)[a]) for a in range(d))
    for yp in range(k):
        y = m.input_B[yp]
        inv_in_B[y] = yp
        perm = m.outcome_B[yp]
        inv_out_B[y] = tuple(int(np.argsort(perm)[b]) for b in range(d))
    return RelabelingMap(
        input_A=tuple(inv_in_A),
        input_B=tuple(inv_in_B),
        outcome_A=tuple(inv_out_A),
        outcome_B=tuple(inv_out_B),
    )


def _interval_sets(k: int) -> tuple[list[int], list[int], list[int], list[int]]:
    """The four index intervals used to assemble the equivalence permutation."""
    half = k // 2
    l1_minus = list(range(1, half))
    l1 = l1_minus + [half]
    l0_minus = [0] + l1_minus
    l0 = l0_minus + [half]
    return l1_minus, l1, l0_minus, l0


def equivalence_relabeling(sc: Scenario) -> RelabelingMap:
    """Relabeling turning the zero-penalty ladder spec into the zero-penalty
    transitivity spec.

    Odd k permutes inputs only; even k additionally reverses the outcome
    order (a -> d-1-a) on every input of both parties.
    """
    k, d = sc.k, sc.d
    l1_minus, l1, l0_minus, l0 = _interval_sets(k)
    in_A = [-1] * k
    in_B = [-1] * k
    if k % 2 == 1:
        for el in l1:
            in_A[k - 2 * el] = el - 1
        for el in l0:
            in_A[k - 1 - 2 * el] = k - 1 - el
        in_B[k - 1] = k - 1
        for el in l1:
            in_B[k - 2 * el] = k - 1 - el
            in_B[k - 1 - 2 * el] = el - 1
    else:
        for el in l1:
            in_A[k - 2 * el] = el - 1
        for el in l0_minus:
            in_A[k - 1 - 2 * el] = k - 1 - el
        in_B[k - 1] = k - 1
        for el in l1:
            in_B[k - 2 * el] = k - 1 - el
        for el in l1_minus:
            in_B[k - 1 - 2 * el] = el - 1
    assert sorted(in_A) == list(range(k)) and sorted(in_B) == list(range(k))
    if k % 2 == 1:
        out = tuple(range(d))
    else:
        out = tuple(d - 1 - a for a in range(d))
    return RelabelingMap(
        input_A=tuple(in_A),
        input_B=tuple(in_B),
        outcome_A=(out,) * k,
        outcome_B=(out,) * k,
    )


def apply_relabeling(b: Behavior, m: RelabelingMap) -> Behavior:
    """Push a behavior through a relabeling.

    The result p' satisfies p'(a',b'|x',y') = p(a,b|x,y) with
    x = input_A[x'], a' = outcome_A[x'][a] (and the Bob analogues).
    """
    sc = b.scenario
    if m.k != sc.k or m.d != sc.d:
        raise ValueError(f"map shape ({m.k},{m.d}) does not match scenario {sc}")
    p = np.empty_like(b.p)
    for xp in range(sc.k):
        for yp in range(sc.k):
            x, y = m.input_A[xp], m.input_B[yp]
            inv_a = np.argsort(np.asarray(m.outcome_A[xp]))
            inv_b = np.argsort(np.asarray(m.outcome_B[yp]))
            p[:, :, xp, yp] = b.p[np.ix_(inv_a, inv_b)][:, :, x, y]
    return behavior(sc, p, validate=False)


def map_event(e: Event, m: RelabelingMap) -> Event:
    """The original-label event matching a relabeled-label event.

    An event stated at relabeled inputs (x', y') with outcome pairs S' holds
    exactly when the original-label event at (input_A[x'], input_B[y']) with
    pairs {(a,b) : (outcome_A[x'][a], outcome_B[y'][b]) in S'} does.
    """
    x, y = m.input_A[e.x], m.input_B[e.y]
    om_a, om_b = m.outcome_A[e.x], m.outcome_B[e.y]
    pairs = frozenset(
        (a, b) for a in range(m.d) for b in range(m.d) if (om_a[a], om_b[b]) in e.outcomes
    )
    return Event(x=x, y=y, outcomes=pairs)


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of the event-set comparison between the two zero-penalty specs."""

    scenario: Scenario
    maps_success: bool
    map: RelabelingMap
    constraint_bijection: tuple[tuple[Event, Event], ...]
    unmatched: tuple[Event, ...]

    def to_json(self) -> dict:
        from .paradox import event_to_json

        return {
            "k": self.scenario.k,
            "d": self.scenario.d,
            "maps_success": self.maps_success,
            "input_map_A": list(self.map.input_A),
            "input_map_B": list(self.map.input_B),
            "outcome_reversal": self.map.outcome_A[0] != tuple(range(self.scenario.d)),
            "bijection": [
                {"source": event_to_json(src), "target": event_to_json(dst)}
                for src, dst in self.constraint_bijection
            ],
            "unmatched": [event_to_json(e) for e in self.unmatched],
        }


def verify_equivalence(sc: Scenario) -> EquivalenceReport:
    """Certify that the relabeling maps the ladder spec's conditions onto the
    transitivity spec's, condition by condition, as exact event sets."""
    m = equivalence_relabeling(sc)
    ladder = generalized_cll(sc, penalty_as_constraint=True)
    transitivity = generalized_fti(sc, penalty_as_constraint=True)

    bijection: list[tuple[Event, Event]] = []
    unmatched: list[Event] = []

    mapped_success = map_event(ladder.success_event, m)
    success_ok = mapped_success == transitivity.success_event
    if success_ok:
        bijection.append((ladder.success_event, mapped_success))
    else:
        unmatched.append(ladder.success_event)

    targets = {c.event for c in transitivity.constraints}
    for c in ladder.constraints:
        mapped = map_event(c.event, m)
        if mapped in targets:
            targets.remove(mapped)
            bijection.append((c.event, mapped))
        else:
            unmatched.append(c.event)
    ok = success_ok and not unmatched and not targets
    return EquivalenceReport(
        scenario=sc,
        maps_success=ok,
        map=m,
        constraint_bijection=tuple(bijection),
        unmatched=tuple(unmatched),
    )
