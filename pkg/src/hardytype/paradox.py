"""Hardy-type paradox specifications and their degree-of-success functionals.

A paradox spec bundles one success event, optional penalty events, and a set
of probability constraints (exactly zero, or at most a tolerance eps). Its
degree of success on a behavior is

    DS(b) = P(success) - sum of penalty probabilities - sum of eps terms.

A positive DS on a behavior satisfying the constraints witnesses
nonlocality. Two generator families cover every builtin argument: the
chained "ladder" family (with penalty P(A_0 < B_0)) and the transitivity
family (with penalty P(A_0 < B_{k-1})); turning each penalty into a zero
constraint recovers the plain Hardy-style variants.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .scenario import (
    Behavior,
    Event,
    Scenario,
    event_probability,
    greater_event,
    less_event,
    point_event,
)

EPS_MAX = 0.5

FAMILIES = ("hardy", "cll", "fti", "gen-cll", "gen-hardy", "gen-fti", "gen-stapp")


@dataclass(frozen=True)
class Constraint:
    """A bounded event: probability exactly zero, or at most ``eps``."""

    event: Event
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.eps is not None and not (0.0 <= self.eps < EPS_MAX):
            raise ValueError(f"constraint tolerance must lie in [0, {EPS_MAX}), got {self.eps}")

    @property
    def is_exact(self) -> bool:
        return self.eps is None


@dataclass(frozen=True)
class ParadoxSpec:
    """One Hardy-type argument: success event, penalties, constraints."""

    scenario: Scenario
    success_event: Event
    penalty_events: tuple[Event, ...]
    constraints: tuple[Constraint, ...]
    name: str
    family: str

    def __post_init__(self) -> None:
        self.success_event.validate(self.scenario)
        for e in self.penalty_events:
            e.validate(self.scenario)
        for c in self.constraints:
            c.event.validate(self.scenario)
            if c.event == self.success_event:
                raise ValueError("success event may not also appear as a constraint")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def eps_offset(self) -> float:
        """Constant subtracted from DS: one eps per relaxed constraint."""
        return sum(c.eps for c in self.constraints if c.eps is not None)

    def zero_constraint_events(self) -> tuple[Event, ...]:
        return tuple(c.event for c in self.constraints if c.is_exact)

    def all_events(self) -> tuple[Event, ...]:
        return (self.success_event, *self.penalty_events, *(c.event for c in self.constraints))


def degree_of_success(spec: ParadoxSpec, b: Behavior) -> float:
    """DS of a behavior; constraint violations are not enforced here."""
    if b.scenario != spec.scenario:
        raise ValueError(f"behavior scenario {b.scenario} does not match spec {spec.scenario}")
    ds = event_probability(b, spec.success_event)
    for e in spec.penalty_events:
        ds -= event_probability(b, e)
    return ds - spec.eps_offset


@dataclass(frozen=True)
class ViolationReport:
    """Per-constraint violations and their maximum."""

    items: tuple[tuple[Constraint, float], ...]
    max_violation: float


def constraint_violations(spec: ParadoxSpec, b: Behavior) -> ViolationReport:
    """Violation per constraint: the event probability (exact-zero case) or
    its excess above eps (relaxed case), floored at zero."""
    if b.scenario != spec.scenario:
        raise ValueError(f"behavior scenario {b.scenario} does not match spec {spec.scenario}")
    items = []
    for c in spec.constraints:
        prob = event_probability(b, c.event)
        v = prob if c.is_exact else max(0.0, prob - c.eps)
        items.append((c, v))
    worst = max((v for _, v in items), default=0.0)
    return ViolationReport(items=tuple(items), max_violation=worst)


# -- the four-event arguments of the two-input two-outcome scenario -----------

def hardy_chsh() -> ParadoxSpec:
    """Original four-event argument: three zero constraints, success (1,1|1,1)."""
    sc = Scenario(2, 2)
    return ParadoxSpec(
        scenario=sc,
        success_event=point_event(1, 1, 1, 1),
        penalty_events=(),
        constraints=(
            Constraint(point_event(0, 0, 0, 0)),
            Constraint(point_event(1, 1, 0, 1)),
            Constraint(point_event(1, 1, 1, 0)),
        ),
        name="hardy",
        family="hardy",
    )


def cll_chsh() -> ParadoxSpec:
    """Relaxation where P(0,0|0,0) is subtracted as a penalty instead of pinned to zero."""
    sc = Scenario(2, 2)
    return ParadoxSpec(
        scenario=sc,
        success_event=point_event(1, 1, 1, 1),
        penalty_events=(point_event(0, 0, 0, 0),),
        constraints=(
            Constraint(point_event(1, 1, 0, 1)),
            Constraint(point_event(1, 1, 1, 0)),
        ),
        name="cll",
        family="cll",
    )


def fti_chsh(eps: float = 0.0) -> ParadoxSpec:
    """Transitivity-failure argument; eps > 0 relaxes both zero constraints.

    The penalty is P(1,1|0,1) and the DS functional is q - r - 2*eps.
    """
    if not (0.0 <= eps < EPS_MAX):
        raise ValueError(f"eps must lie in [0, {EPS_MAX}), got {eps}")
    sc = Scenario(2, 2)
    bound = None if eps == 0.0 else eps
    name = "fti" if eps == 0.0 else f"fti[eps={eps:g}]"
    return ParadoxSpec(
        scenario=sc,
        success_event=point_event(1, 1, 1, 1),
        penalty_events=(point_event(1, 1, 0, 1),),
        constraints=(
            Constraint(point_event(0, 0, 0, 0), bound),
            Constraint(point_event(1, 1, 1, 0), bound),
        ),
        name=name,
        family="fti",
    )


# -- generalizations to arbitrary symmetric (k, d) scenarios ------------------

def generalized_cll(
    sc: Scenario, *, penalty_as_constraint: bool = False, eps: float = 0.0
) -> ParadoxSpec:
    """Chained ladder argument for a (k, d) scenario.

    Success compares the outcomes at the last input pair (direction depends
    on the parity of k); 2(k-1) chained zero constraints alternate direction
    down the ladder; the penalty is P(A_0 < B_0). With
    ``penalty_as_constraint`` the penalty probability is pinned to zero as
    well, which gives the plain generalized-Hardy variant.
    """
    if not (0.0 <= eps < EPS_MAX):
        raise ValueError(f"eps must lie in [0, {EPS_MAX}), got {eps}")
    k, d = sc.k, sc.d
    bound = None if eps == 0.0 else eps
    success = less_event(k - 1, k - 1, d) if k % 2 == 1 else greater_event(k - 1, k - 1, d)
    events = []
    for i in range(1, k):
        if i % 2 == 1:
            events.append(greater_event(i, i - 1, d))
        else:
            events.append(less_event(i, i - 1, d))
    for i in range(1, k):
        if i % 2 == 1:
            events.append(greater_event(i - 1, i, d))
        else:
            events.append(less_event(i - 1, i, d))
    constraints = [Constraint(e, bound) for e in events]
    penalty = less_event(0, 0, d)
    if penalty_as_constraint:
        constraints.append(Constraint(penalty, bound))
        penalties: tuple[Event, ...] = ()
        family = "gen-hardy"
    else:
        penalties = (penalty,)
        family = "gen-cll"
    name = f"{family}(k={k},d={d})" + (f"[eps={eps:g}]" if eps else "")
    return ParadoxSpec(
        scenario=sc,
        success_event=success,
        penalty_events=penalties,
        constraints=tuple(constraints),
        name=name,
        family=family,
    )


def generalized_fti(
    sc: Scenario, *, penalty_as_constraint: bool = False, eps: float = 0.0
) -> ParadoxSpec:
    """Transitivity-failure argument for a (k, d) scenario.

    Success is P(A_{k-1} < B_{k-1}); the 2(k-1) zero constraints chain
    A_0 <= B_0 <= A_1 <= ... <= A_{k-1} for deterministic models; the
    penalty is P(A_0 < B_{k-1}). With ``penalty_as_constraint`` the penalty
    is pinned to zero (the generalized chained-implication variant).
    """
    if not (0.0 <= eps < EPS_MAX):
        raise ValueError(f"eps must lie in [0, {EPS_MAX}), got {eps}")
    k, d = sc.k, sc.d
    bound = None if eps == 0.0 else eps
    success = less_event(k - 1, k - 1, d)
    events = []
    for i in range(1, k):
        events.append(less_event(i, i - 1, d))
    for i in range(1, k):
        events.append(greater_event(i - 1, i - 1, d))
    constraints = [Constraint(e, bound) for e in events]
    penalty = less_event(0, k - 1, d)
    if penalty_as_constraint:
        constraints.append(Constraint(penalty, bound))
        penalties: tuple[Event, ...] = ()
        family = "gen-stapp"
    else:
        penalties = (penalty,)
        family = "gen-fti"
    name = f"{family}(k={k},d={d})" + (f"[eps={eps:g}]" if eps else "")
    return ParadoxSpec(
        scenario=sc,
        success_event=success,
        penalty_events=penalties,
        constraints=tuple(constraints),
        name=name,
        family=family,
    )


def builtin_spec(family: str, k: int = 2, d: int = 2, eps: float = 0.0) -> ParadoxSpec:
    """Construct a builtin spec by family name; used by the CLI and tests."""
    if family in ("hardy", "cll", "fti"):
        if (k, d) != (2, 2):
            raise ValueError(f"family {family!r} is defined only at (k,d)=(2,2), got ({k},{d})")
        if family == "hardy":
            if eps:
                raise ValueError("the hardy family has no eps relaxation")
            return hardy_chsh()
        if family == "cll":
            if eps:
                raise ValueError("the cll family has no eps relaxation")
            return cll_chsh()
        return fti_chsh(eps)
    sc = Scenario(k, d)
    if family == "gen-cll":
        return generalized_cll(sc, eps=eps)
    if family == "gen-hardy":
        return generalized_cll(sc, penalty_as_constraint=True, eps=eps)
    if family == "gen-fti":
        return generalized_fti(sc, eps=eps)
    if family == "gen-stapp":
        return generalized_fti(sc, penalty_as_constraint=True, eps=eps)
    raise ValueError(f"unknown family {family!r}; choose one of {FAMILIES}")


# -- JSON interchange ---------------------------------------------------------

def event_to_json(e: Event) -> dict:
    return {"x": e.x, "y": e.y, "pairs": [list(p) for p in e.pairs()]}


def event_from_json(obj: dict) -> Event:
    return Event(
        x=int(obj["x"]),
        y=int(obj["y"]),
        outcomes=frozenset((int(a), int(b)) for a, b in obj["pairs"]),
    )


def spec_to_json(spec: ParadoxSpec) -> dict:
    return {
        "name": spec.name,
        "family": spec.family,
        "scenario": {"k": spec.scenario.k, "d": spec.scenario.d},
        "success_event": event_to_json(spec.success_event),
        "penalty_events": [event_to_json(e) for e in spec.penalty_events],
        "constraints": [
            {"event": event_to_json(c.event), "bound": "zero" if c.is_exact else c.eps}
            for c in spec.constraints
        ],
    }


def spec_from_json(obj: dict) -> ParadoxSpec:
    sc = Scenario(k=int(obj["scenario"]["k"]), d=int(obj["scenario"]["d"]))
    constraints = []
    for c in obj["constraints"]:
        bound = c["bound"]
        constraints.append(
            Constraint(event_from_json(c["event"]), None if bound == "zero" else float(bound))
        )
    return ParadoxSpec(
        scenario=sc,
        success_event=event_from_json(obj["success_event"]),
        penalty_events=tuple(event_from_json(e) for e in obj["penalty_events"]),
        constraints=tuple(constraints),
        name=str(obj["name"]),
        family=str(obj["family"]),
    )
