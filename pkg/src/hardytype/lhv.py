"""Exact local-hidden-variable bounds by deterministic-strategy enumeration.

The certified quantity is the vertex functional

    F(s) = [success fires] - sum [penalty fires] - sum [constraint event fires]

evaluated in integer arithmetic on every deterministic strategy. F upper
bounds the degree of success of any LHV behavior satisfying the spec's
constraints (a fired constraint subtracts at least the success's maximum of
one; a constraint-free strategy obeys the chain lemma, so success forces the
penalty). Its exact maximum is 0 for every builtin spec, which is the whole
local side of the paradox.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paradox import Constraint, ParadoxSpec
from .scenario import Behavior, DeterministicStrategy, Scenario, enumerate_strategies

DEFAULT_CAP = 10**8
_ARGMAX_KEEP = 8


def enumerate_deterministic(sc: Scenario, cap: int = DEFAULT_CAP):
    """Lazily yield all d^(2k) strategies in lexicographic order.

    Refuses scenarios whose strategy count exceeds ``cap``.
    """
    count = sc.n_deterministic
    if count > cap:
        raise ValueError(
            f"scenario ({sc.k},{sc.d}) has {count} deterministic strategies, "
            f"exceeding the cap of {cap}"
        )
    return enumerate_strategies(sc)


def _digit_table(n: int, k: int, d: int) -> np.ndarray:
    """Rows 0..n-1 as k-digit base-d numbers, most significant digit first."""
    idx = np.arange(n, dtype=np.int64)
    digits = np.empty((n, k), dtype=np.int64)
    for pos in range(k):
        digits[:, k - 1 - pos] = (idx // d**pos) % d
    return digits


@dataclass(frozen=True)
class LocalBoundReport:
    """Exact LHV bound for one spec, with lexicographically-first witnesses."""

    spec_name: str
    max_ds: int
    argmax: tuple[DeterministicStrategy, ...]
    argmax_count: int
    strategies_checked: int

    def to_json(self) -> dict:
        return {
            "spec": self.spec_name,
            "max_ds": self.max_ds,
            "strategies_checked": self.strategies_checked,
            "argmax_count": self.argmax_count,
            "argmax": [{"sA": list(s.sA), "sB": list(s.sB)} for s in self.argmax],
        }


def local_max_ds(spec: ParadoxSpec, cap: int = DEFAULT_CAP) -> LocalBoundReport:
    """Maximize the vertex functional over all deterministic strategies.

    Signed events: +1 success, -1 each penalty, -1 each constraint event.
    Evaluation is chunked over Alice's strategies; ties are reported
    lexicographically-first. All arithmetic is integer, so the bound is exact.
    """
    sc = spec.scenario
    total = sc.n_deterministic
    if total > cap:
        raise ValueError(
            f"scenario ({sc.k},{sc.d}) has {total} deterministic strategies, "
            f"exceeding the cap of {cap}"
        )
    k, d = sc.k, sc.d
    n_side = d**k
    A = _digit_table(n_side, k, d)
    B = A  # symmetric scenario: same digit table for Bob

    signed = [(1, spec.success_event)]
    signed += [(-1, e) for e in spec.penalty_events]
    signed += [(-1, c.event) for c in spec.constraints]

    chunk = max(1, min(n_side, (2_000_000 + n_side - 1) // n_side))
    best = None
    witnesses: list[tuple[int, int]] = []
    n_ties = 0
    for start in range(0, n_side, chunk):
        rows = slice(start, min(start + chunk, n_side))
        F = np.zeros((rows.stop - rows.start, n_side), dtype=np.int64)
        for sign, e in signed:
            mask = e.mask(d)
            F += sign * mask[A[rows, e.x][:, None], B[:, e.y][None, :]]
        local_best = int(F.max())
        if best is None or local_best > best:
            best = local_best
            witnesses = []
            n_ties = 0
        if local_best == best:
            hits = np.argwhere(F == best)
            n_ties += len(hits)
            for iA, iB in hits[: _ARGMAX_KEEP - len(witnesses)]:
                witnesses.append((start + int(iA), int(iB)))

    def strategy(iA: int, iB: int) -> DeterministicStrategy:
        return DeterministicStrategy(
            sA=tuple(int(v) for v in A[iA]), sB=tuple(int(v) for v in B[iB])
        )

    return LocalBoundReport(
        spec_name=spec.name,
        max_ds=int(best),
        argmax=tuple(strategy(*w) for w in witnesses[:_ARGMAX_KEEP]),
        argmax_count=n_ties,
        strategies_checked=total,
    )


@dataclass(frozen=True)
class ChainReport:
    """Outcome-ordering chain implied by a spec's constraints for one strategy."""

    holds: bool
    chain: tuple[tuple[str, int, int], ...]
    violated: Constraint | None
    success_fires: bool
    penalty_fires: bool


def _chain_nodes(spec: ParadoxSpec) -> list[tuple[str, int]]:
    k = spec.scenario.k
    if spec.family in ("gen-fti", "gen-stapp"):
        nodes = []
        for i in range(k):
            nodes.append(("A", i))
            nodes.append(("B", i))
        return nodes
    if spec.family in ("gen-cll", "gen-hardy"):
        left = [("A" if i % 2 == 0 else "B", i) for i in range(k)]
        right = [("B" if i % 2 == 0 else "A", i) for i in reversed(range(k))]
        return left + right
    raise ValueError(
        f"chain verification applies to the generalized families, not {spec.family!r}"
    )


def verify_chain(s: DeterministicStrategy, spec: ParadoxSpec) -> ChainReport:
    """Check the outcome chain a constraint-satisfying strategy must obey.

    If any constraint event fires, the report carries the violated
    constraint and holds is False. Otherwise every adjacent chain link
    except the central success comparison must be nondecreasing, and a
    firing success event must force the terminal comparison (the chain's
    first outcome strictly below its last), i.e. the penalty event.
    """
    sc = spec.scenario
    s.validate(sc)

    def fires(e) -> bool:
        return e.fires(s.sA[e.x], s.sB[e.y])

    for c in spec.constraints:
        if fires(c.event):
            return ChainReport(
                holds=False,
                chain=(),
                violated=c,
                success_fires=fires(spec.success_event),
                penalty_fires=any(fires(e) for e in spec.penalty_events),
            )

    nodes = _chain_nodes(spec)
    outcome = {("A", i): s.sA[i] for i in range(sc.k)}
    outcome.update({("B", i): s.sB[i] for i in range(sc.k)})
    values = [outcome[n] for n in nodes]
    mid = len(nodes) // 2 - 1  # link between nodes[mid] and nodes[mid+1] is the success one
    links_ok = all(
        values[j] <= values[j + 1] for j in range(len(nodes) - 1) if j != mid
    )
    success = fires(spec.success_event)
    penalty = values[0] < values[-1]
    chain = tuple((p, i, outcome[(p, i)]) for p, i in nodes)
    return ChainReport(
        holds=links_ok and ((not success) or penalty),
        chain=chain,
        violated=None,
        success_fires=success,
        penalty_fires=penalty,
    )


def ch_functional(b: Behavior) -> float:
    """P(1,1|1,1) - P(1,1|1,0) - P(1,1|0,1) - P(0,0|0,0); at most 0 for LHV."""
    if (b.scenario.k, b.scenario.d) != (2, 2):
        raise ValueError(f"defined for the (2,2) scenario, got {b.scenario}")
    p = b.p
    return float(p[1, 1, 1, 1] - p[1, 1, 1, 0] - p[1, 1, 0, 1] - p[0, 0, 0, 0])
