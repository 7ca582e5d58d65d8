"""Cooperative slot-filling against an agenda-based user simulator.

The user pursues a sampled goal: inform constraints, get request slots
answered, and have each goal domain booked. The simulator keeps an
agenda (ordered pending intents) and follows a fixed rule table; the
system side only observes dialogue acts, never the goal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domain import (CooperativeConfig, CoopState, DialogueAct, Goal,
                      book_act, inform_act, request_act, simple_act)


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def _subset(rng, pool, keep_order=True):
    """Non-empty random subset, preserving the pool's order."""
    k = int(rng.integers(1, len(pool) + 1))
    picked = set(rng.choice(len(pool), size=k, replace=False).tolist())
    return tuple(s for i, s in enumerate(pool) if i in picked)


def sample_goal(rng_seed, config: CooperativeConfig) -> Goal:
    rng = _as_rng(rng_seed)
    n = int(rng.integers(1, len(config.domains) + 1))
    chosen = set(rng.choice(len(config.domains), size=n, replace=False).tolist())
    domains, cons, reqs, booking = [], [], [], []
    for i, d in enumerate(config.domains):
        if i not in chosen:
            continue
        domains.append(d)
        cons.append(_subset(rng, config.constraint_slots[i]))
        reqs.append(_subset(rng, config.request_slots[i]))
        booking.append(True)
    return Goal(tuple(domains), tuple(cons), tuple(reqs), tuple(booking)).validate()


@dataclass
class AgendaSimulator:
    """Rule-driven user: utters its agenda top when the system act does
    not call for a direct reply.

    Agenda entries are (kind, domain, slot) triples; inform entries pop
    when uttered, request and book entries stay until satisfied.
    """

    goal: Goal
    patience: int
    agenda: list = field(default_factory=list)
    informed_constraints: set = field(default_factory=set)
    booked: set = field(default_factory=set)
    done: bool = False
    succeeded: bool = False

    @classmethod
    def create(cls, goal: Goal, patience: int) -> "AgendaSimulator":
        agenda = []
        for d in goal.domains:
            agenda += [("inform", d, s) for s in goal.constraints_for(d)]
            agenda += [("request", d, s) for s in goal.requests_for(d)]
            if goal.booking_for(d):
                agenda.append(("book", d, None))
        return cls(goal=goal, patience=patience, agenda=agenda)

    def utter_top(self) -> DialogueAct:
        if not self.agenda:
            return simple_act("opposite", "bye")
        kind, d, s = self.agenda[0]
        if kind == "inform":
            self.agenda.pop(0)
            self.informed_constraints.add((d, s))
            return inform_act("opposite", d, s)
        if kind == "request":
            return request_act("opposite", d, s)
        return book_act("opposite", d)


def coop_new(rng_seed, config: CooperativeConfig):
    """Sampled goal, initialized agenda, and the user's opening act."""
    config.validate()
    rng = _as_rng(rng_seed)
    goal = sample_goal(rng, config)
    sim = AgendaSimulator.create(goal, config.patience)
    return sim, sim.utter_top()


def coop_user_step(sim: AgendaSimulator, system_act: DialogueAct):
    """One exchange: process the system act, produce the user reply.

    Returns (user_act, done, success_feedback). Irrelevant or illegal
    system acts simply make the user repeat its agenda top.
    """
    if sim.done:
        raise RuntimeError("session already finished")
    sim.patience -= 1
    goal = sim.goal
    reply = None
    kind = system_act.kind
    args = system_act.args_dict()
    if kind == "inform":
        entry = ("request", args.get("domain"), args.get("slot"))
        if entry in sim.agenda:
            sim.agenda.remove(entry)
    elif kind == "request":
        d, s = args.get("domain"), args.get("slot")
        if goal.has_domain(d) and s in goal.constraints_for(d):
            sim.informed_constraints.add((d, s))
            if ("inform", d, s) in sim.agenda:
                sim.agenda.remove(("inform", d, s))
            reply = inform_act("opposite", d, s)
    elif kind == "book":
        d = args.get("domain")
        if (d not in sim.booked and goal.has_domain(d) and goal.booking_for(d)
                and set(goal.constraints_for(d))
                <= {s for dd, s in sim.informed_constraints if dd == d}):
            sim.booked.add(d)
            if ("book", d, None) in sim.agenda:
                sim.agenda.remove(("book", d, None))
    # anything else (hello, bye, unknown) is irrelevant

    if not sim.agenda:
        sim.done = True
        sim.succeeded = True
        return simple_act("opposite", "bye"), True, True
    if sim.patience <= 0:
        sim.done = True
        return simple_act("opposite", "bye"), True, False
    return (reply if reply is not None else sim.utter_top()), False, False


# ---------------------------------------------------------------------------
# scripted expert


def scripted_system_act(state: CoopState) -> DialogueAct:
    """Hand-written reactive policy over the observable state.

    Priorities: answer the first outstanding request, then book any
    domain the user asked to book, else wait politely. Slot order
    follows the config so the policy is deterministic.
    """
    cfg = state.config
    for d, reqs in zip(cfg.domains, cfg.request_slots):
        for s in reqs:
            if (d, s) in state.outstanding:
                return inform_act("target", d, s)
    for d in cfg.domains:
        if d in state.booking_requested and d not in state.booked:
            return book_act("target", d)
    return simple_act("target", "hello")


# ---------------------------------------------------------------------------
# policy-facing adapter


class CooperativeEnv:
    """Episode driver around the simulator; the user always opens.

    Reward shaping: -1 per system turn, +2 * patience on success, so a
    session is profitable exactly when it succeeds before the patience
    budget burns down past half the bonus.
    """

    def __init__(self, config: CooperativeConfig, target_catalog, opposite_catalog):
        self.config = config.validate()
        self.target_catalog = target_catalog
        self.opposite_catalog = opposite_catalog
        self.sim = None
        self.state = None
        self.acts = []
        self.bookings = {}

    def _observe_user(self, act: DialogueAct) -> None:
        args = act.args_dict()
        if act.kind == "inform":
            self.state.belief.add((args["domain"], args["slot"]))
        elif act.kind == "request":
            self.state.outstanding.add((args["domain"], args["slot"]))
        elif act.kind == "book":
            self.state.booking_requested.add(args["domain"])
        self.acts.append(("opposite", act))

    def reset(self, rng, goal: Goal = None):
        rng = _as_rng(rng)
        if goal is None:
            self.sim, first = coop_new(rng, self.config)
        else:
            self.sim = AgendaSimulator.create(goal.validate(), self.config.patience)
            first = self.sim.utter_top()
        self.state = CoopState(self.config)
        self.acts = []
        self.bookings = {}
        self._observe_user(first)
        return self.state, self.opposite_catalog.position(first)

    def step(self, act_index):
        act = self.target_catalog[int(act_index)]
        self.acts.append(("target", act))
        args = act.args_dict()
        if act.kind == "inform":
            self.state.informed.add((args["domain"], args["slot"]))
            self.state.outstanding.discard((args["domain"], args["slot"]))
        user_act, done, success = coop_user_step(self.sim, act)
        if act.kind == "book" and args.get("domain") in self.sim.booked \
                and args["domain"] not in self.state.booked:
            self.state.booked.add(args["domain"])
            self.bookings[args["domain"]] = frozenset(
                s for d, s in self.state.belief if d == args["domain"])
        self.state.turn += 1
        info = {"opp_act": self.opposite_catalog.position(user_act),
                "success": success}
        if done:
            self.acts.append(("opposite", user_act))
            reward = -1.0 + (2.0 * self.config.patience if success else 0.0)
        else:
            self._observe_user(user_act)
            reward = -1.0
        return self.state, reward, done, info
