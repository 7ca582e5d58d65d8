"""Competitive item-division negotiation: game rules, scenario sampling,
scoring, the Pareto oracle, and a rule-based opponent.

Two agents split books/hats/balls. Each agent's per-type values are
private and normalized so the whole pool is worth exactly total_value
(default 10) to each side. Agreement fixes the split; disagreement or
timeout scores 0 for both.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from ..domain import (DialogueAct, ITEM_TYPES, NegoState, NegotiationConfig,
                      Scenario, propose_act, propose_counts, simple_act)


class IllegalAct(ValueError):
    """Act violates the game rules for the current mover."""


class EnvStateError(RuntimeError):
    """Operation invalid for the game's current status."""


def _other(agent: str) -> str:
    return "b" if agent == "a" else "a"


@dataclass
class NegotiationGame:
    config: NegotiationConfig
    scenario: Scenario
    mover: str = "a"
    standing: tuple = None  # (claimed counts, owner)
    status: str = "running"
    allocations: dict = None  # agent -> counts, set on agreement
    turns_taken: int = 0
    states: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.states:
            self.states = {ag: NegoState(self.config, self.scenario, ag)
                           for ag in ("a", "b")}

    @property
    def done(self) -> bool:
        return self.status != "running"


# ---------------------------------------------------------------------------
# scenario sampling


def _valuations(counts, total):
    """All non-negative integer value triples with sum(count*value) == total.

    Zero-count types are pinned to value 0; their value would be
    meaningless and free choices there would skew sampling weights.
    """
    out = []

    def rec(i, remaining, acc):
        if i == len(counts):
            if remaining == 0:
                out.append(tuple(acc))
            return
        c = counts[i]
        if c == 0:
            rec(i + 1, remaining, acc + [0])
            return
        for v in range(remaining // c + 1):
            rec(i + 1, remaining - c * v, acc + [v])

    rec(0, total, [])
    return out


@lru_cache(maxsize=8)
def scenario_space(item_caps: tuple, total_value: int):
    """Every feasible (counts, valuation list) pair under the caps."""
    space = []
    for counts in product(*(range(cap + 1) for cap in item_caps)):
        if max(counts) == 0:
            continue
        vals = _valuations(counts, total_value)
        if vals:
            space.append((counts, tuple(vals)))
    return tuple(space)


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def nego_new(rng_seed, config: NegotiationConfig) -> NegotiationGame:
    """Fresh game with a scenario drawn uniformly over all feasible
    (counts, values_a, values_b) triples."""
    config.validate()
    rng = _as_rng(rng_seed)
    space = scenario_space(tuple(config.item_caps), config.total_value)
    if not space:
        raise ValueError(f"no feasible scenario under caps {config.item_caps}")
    weights = np.array([len(vals) ** 2 for _, vals in space], dtype=np.float64)
    pick = int(rng.choice(len(space), p=weights / weights.sum()))
    counts, vals = space[pick]
    va = vals[int(rng.integers(len(vals)))]
    vb = vals[int(rng.integers(len(vals)))]
    scenario = Scenario(counts, va, vb).validate(config.total_value)
    return NegotiationGame(config, scenario)


# ---------------------------------------------------------------------------
# rules


def nego_step(game: NegotiationGame, act: DialogueAct):
    """Apply the current mover's act. Returns (game, done)."""
    if game.done:
        raise EnvStateError(f"game is finished ({game.status})")
    mover = game.mover
    kind = act.kind
    if kind == "propose":
        claims = propose_counts(act)
        for t, cl, c in zip(ITEM_TYPES, claims, game.scenario.counts):
            if not 0 <= cl <= c:
                raise IllegalAct(f"propose claims {cl} {t}(s), only {c} available")
        game.standing = (claims, mover)
        game.states[_other(mover)].opp_last_claim = claims
    elif kind == "agree":
        if game.standing is None:
            raise IllegalAct("agree with no standing proposal")
        claims, owner = game.standing
        if owner == mover:
            raise IllegalAct("cannot agree with own proposal")
        rest = tuple(c - cl for c, cl in zip(game.scenario.counts, claims))
        game.allocations = {owner: claims, _other(owner): rest}
        game.status = "agreed"
    elif kind == "disagree":
        if game.standing is None or game.standing[1] == mover:
            raise IllegalAct("disagree needs a standing proposal from the other side")
        game.standing = None
    elif kind == "end":
        game.status = "no_deal"
    elif kind == "greet":
        pass
    else:
        raise IllegalAct(f"unknown negotiation act kind {kind!r}")

    game.turns_taken += 1
    for st in game.states.values():
        st.record_act(kind)
        st.standing = game.standing
    if game.status == "running" and game.turns_taken >= game.config.max_turns:
        game.status = "timeout"
    game.mover = _other(mover)
    return game, game.done


def nego_score(game: NegotiationGame, agent: str) -> int:
    if not game.done:
        raise EnvStateError("score requested while the game is running")
    if game.status != "agreed":
        return 0
    alloc = game.allocations[agent]
    values = game.scenario.values_of(agent)
    return sum(a * v for a, v in zip(alloc, values))


def pareto_optimal(scenario: Scenario, score_a, score_b) -> bool:
    """True iff no division of the items dominates (score_a, score_b)."""
    for alloc_a in product(*(range(c + 1) for c in scenario.counts)):
        sa = sum(a * v for a, v in zip(alloc_a, scenario.values_a))
        sb = sum((c - a) * v for c, a, v in zip(scenario.counts, alloc_a,
                                                scenario.values_b))
        if sa >= score_a and sb >= score_b and (sa > score_a or sb > score_b):
            return False
    return True


# ---------------------------------------------------------------------------
# rule-based opponent


def _claim_options(scenario: Scenario, agent: str):
    values = scenario.values_of(agent)
    opts = []
    for claims in product(*(range(c + 1) for c in scenario.counts)):
        gain = sum(cl * v for cl, v in zip(claims, values))
        opts.append((claims, gain))
    return opts


class ThresholdOpponent:
    """Greets once, then demands a value target that concedes over time.

    Accepts any standing proposal worth at least the current threshold;
    otherwise counters with the cheapest claim that still meets it.
    Never ends the game, so stubborn pairs run into the turn limit.
    """

    def __init__(self, agent: str, scenario: Scenario, accept_start: int = 7,
                 accept_floor: int = 3, concede: int = 1):
        self.agent = agent
        self.scenario = scenario
        self.accept_start = accept_start
        self.accept_floor = accept_floor
        self.concede = concede
        self.turns_spoken = 0
        self._options = _claim_options(scenario, agent)

    def _threshold(self) -> int:
        # first demand (right after the greeting) sits at accept_start
        t = self.accept_start - self.concede * max(0, self.turns_spoken - 2)
        return max(self.accept_floor, t)

    def _demand_claim(self, threshold: int):
        # cheapest acceptable claim: min own value >= threshold,
        # then fewest items, then lexicographic
        best = None
        for claims, gain in self._options:
            if gain < threshold:
                continue
            key = (gain, sum(claims), claims)
            if best is None or key < best[0]:
                best = (key, claims)
        if best is None:  # threshold above everything; demand the max
            best = (None, max(self._options, key=lambda o: (o[1], [-c for c in o[0]]))[0])
        return best[1]

    def act(self, game: NegotiationGame) -> DialogueAct:
        self.turns_spoken += 1
        if self.turns_spoken == 1:
            return simple_act("opposite", "greet")
        threshold = self._threshold()
        if game.standing is not None and game.standing[1] != self.agent:
            claims, _ = game.standing
            rest = tuple(c - cl for c, cl in zip(game.scenario.counts, claims))
            gain = sum(r * v for r, v in zip(rest, self.scenario.values_of(self.agent)))
            if gain >= threshold:
                return simple_act("opposite", "agree")
        return propose_act("opposite", self._demand_claim(threshold))


# ---------------------------------------------------------------------------
# policy-facing adapter


class NegotiationEnv:
    """Episode driver: target agent is "a", the rule-based opponent is "b"
    and always moves first.

    Illegal target acts (agree without a counterpart proposal, claims above
    the scenario counts) are executed as a neutral greet so exploration
    can never crash an episode; the info dict flags the substitution.
    """

    def __init__(self, config: NegotiationConfig, target_catalog,
                 opposite_catalog, opponent_factory=None):
        self.config = config.validate()
        self.target_catalog = target_catalog
        self.opposite_catalog = opposite_catalog
        self.opponent_factory = opponent_factory or (
            lambda scenario, rng: ThresholdOpponent("b", scenario))
        self.game = None
        self.opponent = None
        self.acts = []

    def reset(self, rng, scenario: Scenario = None):
        rng = _as_rng(rng)
        if scenario is None:
            self.game = nego_new(rng, self.config)
        else:
            self.game = NegotiationGame(self.config, scenario.validate(self.config.total_value))
        self.game.mover = "b"
        self.opponent = self.opponent_factory(self.game.scenario, rng)
        self.acts = []
        opp_act = self.opponent.act(self.game)
        nego_step(self.game, opp_act)
        self.acts.append(("opposite", opp_act))
        return self.state(), self.opposite_catalog.position(opp_act)

    def state(self) -> NegoState:
        return self.game.states["a"]

    def step(self, act_index):
        """Apply the target act then the opponent reply (if still running).

        Returns (state, reward, done, info); info carries the opponent's
        reply index (or None) and the illegal-substitution flag.
        """
        act = self.target_catalog[int(act_index)]
        info = {"illegal": False, "opp_act": None}
        try:
            nego_step(self.game, act)
            self.acts.append(("target", act))
        except IllegalAct:
            info["illegal"] = True
            substitute = simple_act("target", "greet")
            nego_step(self.game, substitute)
            self.acts.append(("target", substitute))
        if not self.game.done:
            opp_act = self.opponent.act(self.game)
            nego_step(self.game, opp_act)
            self.acts.append(("opposite", opp_act))
            info["opp_act"] = self.opposite_catalog.position(opp_act)
        reward = float(nego_score(self.game, "a")) if self.game.done else 0.0
        return self.state(), reward, self.game.done, info
