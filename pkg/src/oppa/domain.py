"""Dialogue acts, states, goals, scenarios, and their feature encodings.

Shared vocabulary for both environments. Everything here is deterministic
and config-driven: a given config always yields the same action catalog
and the same feature layout, so policies, logs, and checkpoints stay
mutually compatible.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Union

import numpy as np

ITEM_TYPES = ("book", "hat", "ball")
NEGO_KINDS = ("propose", "agree", "disagree", "end", "greet")
COOP_KINDS = ("inform", "request", "book", "offer", "bye", "hello", "thanks")
ACTORS = ("target", "opposite")


@dataclass(frozen=True)
class DialogueAct:
    """One discrete conversational move.

    args is a tuple of (key, value) pairs: slot bindings for cooperative
    acts, per-item-type claimed counts for negotiation proposals.
    """

    actor: str
    kind: str
    args: tuple = ()

    def args_dict(self) -> dict:
        return dict(self.args)

    def __str__(self):
        inner = " ".join(f"{k}={v}" for k, v in self.args)
        return f"{self.actor}:{self.kind}" + (f"({inner})" if inner else "")


def propose_act(actor: str, counts) -> DialogueAct:
    counts = tuple(int(c) for c in counts)
    if len(counts) != len(ITEM_TYPES):
        raise ValueError(f"propose needs {len(ITEM_TYPES)} counts, got {len(counts)}")
    return DialogueAct(actor, "propose", tuple(zip(ITEM_TYPES, counts)))


def propose_counts(act: DialogueAct) -> tuple:
    d = act.args_dict()
    return tuple(int(d[t]) for t in ITEM_TYPES)


def inform_act(actor: str, domain: str, slot: str) -> DialogueAct:
    return DialogueAct(actor, "inform", (("domain", domain), ("slot", slot)))


def request_act(actor: str, domain: str, slot: str) -> DialogueAct:
    return DialogueAct(actor, "request", (("domain", domain), ("slot", slot)))


def book_act(actor: str, domain: str) -> DialogueAct:
    return DialogueAct(actor, "book", (("domain", domain),))


def simple_act(actor: str, kind: str) -> DialogueAct:
    return DialogueAct(actor, kind)


# ---------------------------------------------------------------------------
# environment configs


@dataclass(frozen=True)
class NegotiationConfig:
    """Item-division game over ITEM_TYPES with total-value-10 scenarios."""

    item_caps: tuple = (4, 4, 4)
    max_turns: int = 20
    state_dim: int = 256
    history_window: int = 4
    catalog_cap: int = 512
    total_value: int = 10

    env = "negotiation"

    def feature_count(self) -> int:
        # counts, own values, kind one-hots per history slot,
        # standing proposal (exists, mine, claims, payoff if accepted),
        # opposite's latest demand (seen, claims), turn
        return 3 + 3 + len(NEGO_KINDS) * self.history_window + 6 + 4 + 1

    def validate(self) -> "NegotiationConfig":
        if len(self.item_caps) != 3 or any(c < 0 for c in self.item_caps):
            raise ValueError(f"item_caps must be 3 non-negative ints, got {self.item_caps}")
        if max(self.item_caps) == 0:
            raise ValueError("at least one item cap must be positive")
        if self.max_turns < 2:
            raise ValueError("max_turns must allow at least one exchange")
        if self.feature_count() > self.state_dim:
            raise ValueError(
                f"state_dim {self.state_dim} too small for {self.feature_count()} raw features")
        return self


@dataclass(frozen=True)
class CooperativeConfig:
    """Agenda-based slot filling across a fixed set of domains."""

    domains: tuple = ("restaurant", "hotel")
    constraint_slots: tuple = (("area", "price", "food"), ("area", "price", "stars"))
    request_slots: tuple = (("phone", "address", "postcode"), ("phone", "address", "parking"))
    patience: int = 12
    state_dim: int = 256
    catalog_cap: int = 512

    env = "cooperative"

    def feature_count(self) -> int:
        n = 1  # turn
        for c, r in zip(self.constraint_slots, self.request_slots):
            # belief flags, (informed + outstanding) per request slot,
            # booked, booking_requested
            n += len(c) + 2 * len(r) + 2
        return n

    def validate(self) -> "CooperativeConfig":
        if not (len(self.domains) == len(self.constraint_slots) == len(self.request_slots)):
            raise ValueError("domains, constraint_slots, request_slots must align")
        for d, c, r in zip(self.domains, self.constraint_slots, self.request_slots):
            if set(c) & set(r):
                raise ValueError(f"domain {d}: constraint and request slots overlap")
        if self.patience < 1:
            raise ValueError("patience must be positive")
        if self.feature_count() > self.state_dim:
            raise ValueError(
                f"state_dim {self.state_dim} too small for {self.feature_count()} raw features")
        return self

    def domain_index(self, domain: str) -> int:
        return self.domains.index(domain)


EnvConfig = Union[NegotiationConfig, CooperativeConfig]


# ---------------------------------------------------------------------------
# scenarios and goals


@dataclass(frozen=True)
class Scenario:
    """Per-type item counts plus each agent's private per-type values."""

    counts: tuple
    values_a: tuple
    values_b: tuple

    def values_of(self, agent: str) -> tuple:
        if agent == "a":
            return self.values_a
        if agent == "b":
            return self.values_b
        raise ValueError(f"unknown agent {agent!r}")

    def validate(self, total_value: int = 10) -> "Scenario":
        if len(self.counts) != 3 or any(c < 0 for c in self.counts):
            raise ValueError(f"bad counts {self.counts}")
        if max(self.counts) == 0:
            raise ValueError("scenario needs at least one item")
        for side, vals in (("a", self.values_a), ("b", self.values_b)):
            if len(vals) != 3 or any(v < 0 for v in vals):
                raise ValueError(f"bad values for agent {side}: {vals}")
            got = sum(c * v for c, v in zip(self.counts, vals))
            if got != total_value:
                raise ValueError(
                    f"agent {side} total value {got} != required {total_value}")
        return self


@dataclass(frozen=True)
class Goal:
    """User goal: per-domain constraint bindings, requested slots, bookings.

    Tuples are aligned with `domains`; constraint/request entries are slot
    names drawn from the config's vocabulary for that domain.
    """

    domains: tuple
    constraints: tuple
    requests: tuple
    booking: tuple

    def validate(self) -> "Goal":
        if not (len(self.domains) == len(self.constraints) == len(self.requests)
                == len(self.booking)):
            raise ValueError("goal tuples must align with domains")
        for d, c, r in zip(self.domains, self.constraints, self.requests):
            if set(c) & set(r):
                raise ValueError(f"goal domain {d}: requests overlap constraints")
        return self

    def _pos(self, domain: str) -> int:
        return self.domains.index(domain)

    def has_domain(self, domain: str) -> bool:
        return domain in self.domains

    def constraints_for(self, domain: str) -> tuple:
        return self.constraints[self._pos(domain)]

    def requests_for(self, domain: str) -> tuple:
        return self.requests[self._pos(domain)]

    def booking_for(self, domain: str) -> bool:
        return self.booking[self._pos(domain)]


# ---------------------------------------------------------------------------
# dialogue states


@dataclass
class NegoState:
    """One negotiating agent's view of the game."""

    config: NegotiationConfig
    scenario: Scenario
    agent: str  # "a" or "b"
    history: tuple = ()  # last history_window act kinds, newest last
    standing: Optional[tuple] = None  # (claimed counts, owner agent)
    opp_last_claim: Optional[tuple] = None  # the other side's latest demand
    turn: int = 0

    @property
    def values(self) -> tuple:
        return self.scenario.values_of(self.agent)

    def record_act(self, kind: str) -> None:
        self.history = (self.history + (kind,))[-self.config.history_window:]
        self.turn += 1


@dataclass
class CoopState:
    """The system side's observable dialogue state.

    belief holds constraint slots the user has informed; informed holds
    request slots the system has answered; outstanding holds user requests
    not yet answered. All entries are (domain, slot) pairs.
    """

    config: CooperativeConfig
    belief: set = field(default_factory=set)
    informed: set = field(default_factory=set)
    outstanding: set = field(default_factory=set)
    booked: set = field(default_factory=set)
    booking_requested: set = field(default_factory=set)
    turn: int = 0


DialogueState = Union[NegoState, CoopState]


# ---------------------------------------------------------------------------
# action catalogs


@dataclass(frozen=True)
class ActionIndex:
    """Position of an act in a specific catalog."""

    index: int
    catalog_id: str

    def __index__(self) -> int:
        return self.index

    def __int__(self) -> int:
        return self.index


class ActionCatalog:
    """Immutable ordered action list with index lookup."""

    def __init__(self, catalog_id: str, acts, placeholder_kind: str):
        self.catalog_id = catalog_id
        self.acts = tuple(acts)
        self._index = {a: i for i, a in enumerate(self.acts)}
        if len(self._index) != len(self.acts):
            raise ValueError("duplicate acts in catalog")
        ph = [i for i, a in enumerate(self.acts) if a.kind == placeholder_kind]
        if len(ph) != 1:
            raise ValueError(f"catalog needs exactly one {placeholder_kind!r} act")
        self.placeholder = ActionIndex(ph[0], catalog_id)

    def __len__(self):
        return len(self.acts)

    def __getitem__(self, i):
        return self.acts[i]

    def __iter__(self):
        return iter(self.acts)

    def __contains__(self, act):
        return act in self._index

    def position(self, act: DialogueAct) -> int:
        try:
            return self._index[act]
        except KeyError:
            raise ValueError(f"act not in catalog {self.catalog_id}: {act}") from None


def _role_actor(role: str) -> str:
    if role not in ACTORS:
        raise ValueError(f"role must be one of {ACTORS}, got {role!r}")
    return role


def enumerate_actions(config: EnvConfig, role: str = "target") -> ActionCatalog:
    """Deterministic act catalog for one side of the dialogue.

    Negotiation catalogs are identical for both roles: every propose
    vector within the config caps (lexicographic) plus the control acts.
    Cooperative catalogs differ: the target informs request slots and
    requests constraint slots; the opposite (user) does the mirror image.
    """
    actor = _role_actor(role)
    if isinstance(config, NegotiationConfig):
        config.validate()
        acts = [propose_act(actor, c)
                for c in product(*(range(cap + 1) for cap in config.item_caps))]
        acts += [simple_act(actor, k) for k in ("agree", "disagree", "end", "greet")]
        cid = f"nego:caps={config.item_caps}:{role}"
        placeholder = "greet"
    elif isinstance(config, CooperativeConfig):
        config.validate()
        acts = []
        for d, cons, reqs in zip(config.domains, config.constraint_slots,
                                 config.request_slots):
            inf = reqs if role == "target" else cons
            req = cons if role == "target" else reqs
            acts += [inform_act(actor, d, s) for s in inf]
            acts += [request_act(actor, d, s) for s in req]
        acts += [book_act(actor, d) for d in config.domains]
        acts += [simple_act(actor, "hello"), simple_act(actor, "bye")]
        cid = f"coop:domains={config.domains}:{role}"
        placeholder = "hello"
    else:
        raise TypeError(f"unsupported config type {type(config).__name__}")
    if len(acts) > config.catalog_cap:
        raise ValueError(
            f"catalog size {len(acts)} exceeds cap {config.catalog_cap}")
    return ActionCatalog(cid, acts, placeholder)


def act_to_index(act: DialogueAct, catalog: ActionCatalog) -> ActionIndex:
    return ActionIndex(catalog.position(act), catalog.catalog_id)


def index_to_act(index, catalog: ActionCatalog) -> DialogueAct:
    if isinstance(index, ActionIndex) and index.catalog_id != catalog.catalog_id:
        raise ValueError(
            f"index from catalog {index.catalog_id} used with {catalog.catalog_id}")
    i = int(index)
    if not 0 <= i < len(catalog):
        raise ValueError(f"index {i} out of range for catalog of {len(catalog)}")
    return catalog.acts[i]


# ---------------------------------------------------------------------------
# state featurization


def _nego_features(state: NegoState) -> np.ndarray:
    cfg = state.config
    sc = state.scenario
    feats = [c / max(cap, 1) for c, cap in zip(sc.counts, cfg.item_caps)]
    feats += [v / cfg.total_value for v in state.values]
    kinds = {k: i for i, k in enumerate(NEGO_KINDS)}
    hist = np.zeros(cfg.history_window * len(NEGO_KINDS))
    recent = state.history[-cfg.history_window:]
    for slot, kind in enumerate(reversed(recent)):  # slot 0 = most recent
        hist[slot * len(NEGO_KINDS) + kinds[kind]] = 1.0
    feats += list(hist)
    if state.standing is None:
        feats += [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    else:
        claims, owner = state.standing
        mine = owner == state.agent
        feats += [1.0, 1.0 if mine else 0.0]
        feats += [cl / max(c, 1) for cl, c in zip(claims, sc.counts)]
        take = claims if mine else tuple(c - cl for c, cl in zip(sc.counts, claims))
        feats.append(sum(t * v for t, v in zip(take, state.values)) / cfg.total_value)
    if state.opp_last_claim is None:
        feats += [0.0, 0.0, 0.0, 0.0]
    else:
        feats.append(1.0)
        feats += [cl / max(c, 1) for cl, c in zip(state.opp_last_claim, sc.counts)]
    feats.append(state.turn / cfg.max_turns)
    return np.asarray(feats, dtype=np.float64)


def _coop_features(state: CoopState) -> np.ndarray:
    cfg = state.config
    feats = []
    for d, cons, reqs in zip(cfg.domains, cfg.constraint_slots, cfg.request_slots):
        feats += [1.0 if (d, s) in state.belief else 0.0 for s in cons]
        feats += [1.0 if (d, s) in state.informed else 0.0 for s in reqs]
        feats += [1.0 if (d, s) in state.outstanding else 0.0 for s in reqs]
        feats.append(1.0 if d in state.booked else 0.0)
        feats.append(1.0 if d in state.booking_requested else 0.0)
    feats.append(state.turn / cfg.patience)
    return np.asarray(feats, dtype=np.float64)


def encode_state(state: DialogueState) -> np.ndarray:
    """Fixed-length feature vector, zero-padded to the config's state_dim."""
    if isinstance(state, NegoState):
        raw = _nego_features(state)
    elif isinstance(state, CoopState):
        raw = _coop_features(state)
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    dim = state.config.state_dim
    if raw.size > dim:
        raise ValueError(f"state has {raw.size} features but state_dim is {dim}")
    out = np.zeros(dim)
    out[:raw.size] = raw
    return out


# ---------------------------------------------------------------------------
# serialization


def features_digest(vec: np.ndarray) -> int:
    """64-bit content hash of a feature vector, for compact episode logs."""
    h = hashlib.blake2b(np.ascontiguousarray(vec, dtype=np.float64).tobytes(),
                        digest_size=8)
    return int.from_bytes(h.digest(), "little")


def act_to_json(act: DialogueAct) -> dict:
    return {"actor": act.actor, "kind": act.kind, "args": dict(act.args)}


def act_from_json(obj: dict) -> DialogueAct:
    args = tuple((k, v) for k, v in obj.get("args", {}).items())
    if obj["kind"] == "propose":
        return propose_act(obj["actor"], [dict(args)[t] for t in ITEM_TYPES])
    return DialogueAct(obj["actor"], obj["kind"], args)


def scenario_to_json(sc: Scenario) -> dict:
    return {"counts": list(sc.counts), "values_a": list(sc.values_a),
            "values_b": list(sc.values_b)}


def scenario_from_json(obj: dict) -> Scenario:
    return Scenario(tuple(obj["counts"]), tuple(obj["values_a"]),
                    tuple(obj["values_b"]))


def goal_to_json(goal: Goal) -> dict:
    return {"domains": list(goal.domains),
            "constraints": [list(c) for c in goal.constraints],
            "requests": [list(r) for r in goal.requests],
            "booking": list(goal.booking)}


def goal_from_json(obj: dict) -> Goal:
    return Goal(tuple(obj["domains"]),
                tuple(tuple(c) for c in obj["constraints"]),
                tuple(tuple(r) for r in obj["requests"]),
                tuple(obj["booking"]))


def episode_log_line(episode_id, context, turns, outcome, rewards) -> str:
    """One JSONL episode record.

    context is a Scenario or Goal; turns is a list of (actor, act,
    feature vector) triples; the vector is stored as a 64-bit digest.
    """
    if isinstance(context, Scenario):
        ctx = {"scenario": scenario_to_json(context)}
    elif isinstance(context, Goal):
        ctx = {"goal": goal_to_json(context)}
    else:
        raise TypeError(f"context must be Scenario or Goal, got {type(context).__name__}")
    record = {
        "episode_id": episode_id,
        **ctx,
        "turns": [{"actor": actor, "act": act_to_json(act),
                   "state_features_digest": features_digest(vec)}
                  for actor, act, vec in turns],
        "outcome": outcome,
        "rewards": rewards,
    }
    return json.dumps(record, sort_keys=True)
