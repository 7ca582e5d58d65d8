"""Session records and the evaluation metric kernels.

A SessionRecord is the minimal trace both environments can emit and all
metrics can be recomputed from: the act sequence, the final status, and
the per-side outcome (allocations or satisfied/booked sets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..domain import Goal, Scenario


@dataclass
class SessionRecord:
    env: str  # "negotiation" or "cooperative"
    acts: list  # (actor, DialogueAct) in time order
    status: str
    turns: int  # target-agent turns
    # negotiation
    scenario: Scenario = None
    allocations: dict = None  # agent -> per-type counts, agreed games only
    # cooperative
    goal: Goal = None
    sys_informed: frozenset = frozenset()  # (domain, slot) the system informed
    bookings: dict = field(default_factory=dict)  # domain -> belief snapshot at booking


def record_negotiation(env_adapter) -> SessionRecord:
    game = env_adapter.game
    return SessionRecord(
        env="negotiation",
        acts=list(env_adapter.acts),
        status=game.status,
        turns=sum(1 for actor, _ in env_adapter.acts if actor == "target"),
        scenario=game.scenario,
        allocations=dict(game.allocations) if game.allocations else None)


def record_cooperative(env_adapter) -> SessionRecord:
    return SessionRecord(
        env="cooperative",
        acts=list(env_adapter.acts),
        status="success" if env_adapter.sim.succeeded else "failure",
        turns=env_adapter.state.turn,
        goal=env_adapter.sim.goal,
        sys_informed=frozenset(env_adapter.state.informed),
        bookings=dict(env_adapter.bookings))


def _requested_slots(goal: Goal) -> frozenset:
    out = set()
    for d in goal.domains:
        out |= {(d, s) for s in goal.requests_for(d)}
    return frozenset(out)


def inform_f1(record: SessionRecord) -> float:
    """F1 of system-informed slots against the goal's requested slots."""
    requested = _requested_slots(record.goal)
    informed = record.sys_informed
    hit = len(informed & requested)
    p = hit / len(informed) if informed else 0.0
    r = hit / len(requested) if requested else 0.0
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def inform_recall(record: SessionRecord) -> float:
    requested = _requested_slots(record.goal)
    if not requested:
        return 1.0
    return len(record.sys_informed & requested) / len(requested)


def match_rate(record: SessionRecord) -> float:
    """Fraction of booking domains whose booked entity satisfies every
    goal constraint (judged from the belief snapshot at booking time)."""
    goal = record.goal
    domains = [d for d in goal.domains if goal.booking_for(d)]
    if not domains:
        return 1.0
    ok = 0
    for d in domains:
        snapshot = record.bookings.get(d)
        if snapshot is not None and set(goal.constraints_for(d)) <= set(snapshot):
            ok += 1
    return ok / len(domains)


def success(record: SessionRecord) -> bool:
    return inform_recall(record) == 1.0 and match_rate(record) == 1.0
