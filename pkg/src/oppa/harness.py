"""Experiment orchestration: flat JSON configs, scripted-agent corpus
generation, supervised pretraining, RL training with learning curves,
greedy evaluation, cross-play tournaments, and the ablation battery."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .checkpoint import ShapeMismatchError, load_checkpoint, save_checkpoint
from .domain import (CooperativeConfig, DialogueAct, NegotiationConfig,
                     encode_state, enumerate_actions, simple_act)
from .envs import (CooperativeEnv, NegotiationEnv, ThresholdOpponent, inform_f1,
                   match_rate, nego_new, nego_score, nego_step, pareto_optimal,
                   record_cooperative, scripted_system_act, success)
from .policy import (OppaPolicy, ReinforcePolicy, ReplayBuffer, RngBundle,
                     TrainingConfig, episode_rng, pretrain, reinforce_update,
                     train_iteration)

ENVS = ("cooperative", "negotiation")
ALGORITHMS = ("oppa", "reinforce")

# Table-1/Table-2 style ablation rows, most complete variant first.
ABLATION_VARIANTS = (
    ("oppa", {"algorithm": "oppa", "use_obe": True, "use_action_reg": True}),
    ("oppa_wo_a", {"algorithm": "oppa", "use_obe": True, "use_action_reg": False}),
    ("dqn", {"algorithm": "oppa", "use_obe": False, "use_action_reg": False}),
    ("reinforce", {"algorithm": "reinforce"}),
)


@dataclass
class ExperimentConfig:
    """Everything one run needs, flat and JSON-serializable."""

    env: str = "cooperative"
    algorithm: str = "oppa"
    # environment
    state_dim: int = 64
    item_caps: tuple = (2, 2, 2)
    max_turns: int = 20
    history_window: int = 4
    total_value: int = 10
    patience: int = 12
    accept_start: int = 7
    accept_floor: int = 3
    concede: int = 1
    opponent_spread: int = 0
    # training
    episodes: int = 400
    epsilon_start: float = 0.2
    epsilon_end: float = 0.01
    epsilon_decay_frac: float = 0.6
    gamma_q: float = 0.99
    beta0: float = 1.0
    gamma_beta: float = 0.95
    epoch_episodes: int = 50
    w1: float = 1.0
    w2: float = 1.0
    tau: float = 1.0
    target_sync: int = 1
    batch_size: int = 32
    buffer_capacity: int = 500
    lr: float = 1e-3
    hidden: int = 64
    est_hidden: int = 64
    d_emb: int = 8
    pretrain_epochs: int = 5
    use_obe: bool = True
    use_action_reg: bool = True
    reg_stop_gradient: bool = False
    soft_augment: bool = False
    # harness
    seed: int = 0
    snapshot_every: int = 50
    eval_episodes: int = 100
    corpus_episodes: int = 200

    def validate(self) -> "ExperimentConfig":
        if self.env not in ENVS:
            raise ValueError(f"env must be one of {ENVS}, got {self.env!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, "
                             f"got {self.algorithm!r}")
        if self.episodes < 1 or self.snapshot_every < 1:
            raise ValueError("episodes and snapshot_every must be positive")
        if self.opponent_spread < 0:
            raise ValueError("opponent_spread must be non-negative")
        self.to_training_config().validate()
        self.env_config().validate()
        return self

    def to_training_config(self) -> TrainingConfig:
        kw = {f.name: getattr(self, f.name) for f in fields(TrainingConfig)}
        return TrainingConfig(**kw)

    def env_config(self):
        if self.env == "negotiation":
            return NegotiationConfig(item_caps=tuple(self.item_caps),
                                     max_turns=self.max_turns,
                                     state_dim=self.state_dim,
                                     history_window=self.history_window,
                                     total_value=self.total_value)
        return CooperativeConfig(patience=self.patience, state_dim=self.state_dim)

    def to_json(self) -> str:
        row = dataclasses.asdict(self)
        row["item_caps"] = list(self.item_caps)
        return json.dumps(row, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        row = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(row) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "item_caps" in row:
            row["item_caps"] = tuple(row["item_caps"])
        return cls(**row).validate()


def _draw_threshold(side, scenario, rng, config: ExperimentConfig):
    """Scripted bargainer; opponent_spread > 0 varies its opening demand
    per episode so stance must be read from behavior."""
    start = config.accept_start
    if config.opponent_spread:
        lo = start - config.opponent_spread
        hi = start + config.opponent_spread
        start = max(config.accept_floor, int(rng.integers(lo, hi + 1)))
    return ThresholdOpponent(side, scenario, accept_start=start,
                             accept_floor=config.accept_floor,
                             concede=config.concede)


def make_env(config: ExperimentConfig):
    """Environment adapter plus both act catalogs."""
    env_cfg = config.env_config()
    tcat = enumerate_actions(env_cfg, role="target")
    ocat = enumerate_actions(env_cfg, role="opposite")
    if config.env == "negotiation":
        def opponent(scenario, rng):
            return _draw_threshold("b", scenario, rng, config)
        env = NegotiationEnv(env_cfg, tcat, ocat, opponent_factory=opponent)
    else:
        env = CooperativeEnv(env_cfg, tcat, ocat)
    return env, tcat, ocat


def build_policy(config: ExperimentConfig):
    env_cfg = config.env_config()
    _, tcat, ocat = make_env(config)
    if config.algorithm == "reinforce":
        return ReinforcePolicy(env_cfg.state_dim, len(tcat), hidden=config.hidden,
                               rng=np.random.default_rng([config.seed, 0]))
    return OppaPolicy(env_cfg.state_dim, len(tcat), len(ocat),
                      int(ocat.placeholder), config.to_training_config())


# ---------------------------------------------------------------------------
# corpus generation (scripted experts)


def _reindex(act: DialogueAct, catalog, actor: str) -> int:
    return int(catalog.position(DialogueAct(actor, act.kind, act.args)))


def generate_expert_corpus(config: ExperimentConfig):
    """(state, expert act, opposite reaction) triples from scripted play.

    Negotiation harvests both seats of expert-vs-expert games so agree
    decisions appear as labels, not only counter-proposals; a game's
    final act has no reaction and carries None there.
    """
    env, tcat, ocat = make_env(config)
    triples = []
    if config.env == "negotiation":
        env_cfg = config.env_config()
        for k in range(config.corpus_episodes):
            rng = np.random.default_rng([config.seed, 5, k])
            game = nego_new(rng, env_cfg)
            game.mover = "a" if k % 2 == 0 else "b"
            experts = {side: _draw_threshold(side, game.scenario, rng, config)
                       for side in ("a", "b")}
            pending = None  # previous seat's example awaiting this reply
            while not game.done:
                s = encode_state(game.states[game.mover])
                act = experts[game.mover].act(game)
                if pending is not None:
                    triples.append(pending + (_reindex(act, ocat, "opposite"),))
                pending = (s, _reindex(act, tcat, "target"))
                nego_step(game, act)
            triples.append(pending + (None,))
        return triples
    for k in range(config.corpus_episodes):
        state, _ = env.reset(np.random.default_rng([config.seed, 5, k]))
        done = False
        while not done:
            s = encode_state(state)
            a_idx = _reindex(scripted_system_act(state), tcat, "target")
            state, _, done, info = env.step(a_idx)
            if info.get("opp_act") is not None:
                triples.append((s, a_idx, int(info["opp_act"])))
    return triples


def run_pretrain(config: ExperimentConfig):
    """Supervised warm start from scripted-agent rollouts."""
    config.validate()
    policy = build_policy(config)
    if not isinstance(policy, OppaPolicy):
        raise ValueError("pretraining applies to the oppa/dqn algorithm only")
    corpus = generate_expert_corpus(config)
    report = pretrain(policy.est, policy.q, corpus, policy.config,
                      placeholder=policy.placeholder)
    return policy, report


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainResult:
    config: ExperimentConfig
    policy: object
    curve: list
    stats: list


def run_train(config: ExperimentConfig, policy=None) -> TrainResult:
    """RL training loop with epoch-aligned learning-curve snapshots."""
    config.validate()
    if policy is None:
        policy = build_policy(config)
    if config.algorithm == "reinforce":
        return _train_reinforce(config, policy)
    # a warm-started policy trains under this config's schedules,
    # not whichever config built it
    policy.config = config.to_training_config()
    env, _, _ = make_env(config)
    buf = ReplayBuffer(config.buffer_capacity)
    rngs = RngBundle.from_seed(config.seed)
    metric = "success" if config.env == "cooperative" else "score"
    stats, curve = [], []
    for ep in range(config.episodes):
        st = train_iteration(env, policy, buf, ep, rngs)
        stats.append(st)
        if (ep + 1) % config.snapshot_every == 0:
            window = stats[-config.snapshot_every:]
            value = (float(np.mean([w["success"] for w in window]))
                     if metric == "success"
                     else float(np.mean([w["return"] for w in window])))
            curve.append({"episode": ep + 1, metric: value,
                          "epsilon": st["epsilon"], "beta": st["beta"]})
    return TrainResult(config, policy, curve, stats)


def _train_reinforce(config: ExperimentConfig, policy) -> TrainResult:
    env, _, _ = make_env(config)
    rngs = RngBundle.from_seed(config.seed)
    tc = config.to_training_config()
    metric = "success" if config.env == "cooperative" else "score"
    stats, curve = [], []
    for ep in range(config.episodes):
        state, _ = env.reset(episode_rng(config.seed, ep))
        s = encode_state(state)
        episode, done, info = [], False, {}
        while not done:
            a = policy.act(s, rngs.explore)
            state, r, done, info = env.step(a)
            episode.append((s, a, float(r)))
            s = encode_state(state)
        loss = reinforce_update(policy, episode, tc.gamma_q, tc.lr)
        st = {"episode": ep, "return": sum(r for _, _, r in episode),
              "turns": len(episode), "loss": loss,
              "success": bool(info.get("success", False)),
              "epsilon": 0.0, "beta": 0.0}
        stats.append(st)
        if (ep + 1) % config.snapshot_every == 0:
            window = stats[-config.snapshot_every:]
            value = (float(np.mean([w["success"] for w in window]))
                     if metric == "success"
                     else float(np.mean([w["return"] for w in window])))
            curve.append({"episode": ep + 1, metric: value,
                          "epsilon": 0.0, "beta": 0.0})
    return TrainResult(config, policy, curve, stats)


def curve_to_csv(curve) -> str:
    if not curve:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(curve[0].keys()))
    writer.writeheader()
    for row in curve:
        writer.writerow({k: repr(v) if isinstance(v, float) else v
                         for k, v in row.items()})
    return out.getvalue()


# ---------------------------------------------------------------------------
# greedy action selection shared by eval, cross-play and the play service


def greedy_action(policy, state_vec) -> int:
    if isinstance(policy, OppaPolicy):
        a, _ = policy.act(state_vec, 0.0, None, None, greedy=True)
        return a
    return policy.act(state_vec, None, greedy=True)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalReport:
    env: str
    episodes: int
    seeds: tuple
    metrics: dict  # name -> (mean, std)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["metric", "mean", "std"])
        for name in sorted(self.metrics):
            mean, std = self.metrics[name]
            writer.writerow([name, repr(float(mean)), repr(float(std))])
        return out.getvalue()


def _eval_seed_cooperative(policy, config, seed) -> dict:
    env, _, _ = make_env(config)
    rows = {"turns": [], "inform_f1": [], "match": [], "success": []}
    for ep in range(config.eval_episodes):
        state, _ = env.reset(np.random.default_rng([seed, 8, ep]))
        done = False
        while not done:
            a = greedy_action(policy, encode_state(state))
            state, _, done, _ = env.step(a)
        rec = record_cooperative(env)
        rows["turns"].append(rec.turns)
        rows["inform_f1"].append(inform_f1(rec))
        rows["match"].append(match_rate(rec))
        rows["success"].append(float(success(rec)))
    return {k: float(np.mean(v)) for k, v in rows.items()}


def _eval_seed_negotiation(policy, config, seed) -> dict:
    env, _, _ = make_env(config)
    scores, agreed_scores, pareto_hits = [], [], []
    for ep in range(config.eval_episodes):
        state, _ = env.reset(np.random.default_rng([seed, 8, ep]))
        done, reward = False, 0.0
        while not done:
            a = greedy_action(policy, encode_state(state))
            state, reward, done, _ = env.step(a)
        score = float(reward)
        scores.append(score)
        if env.game.status == "agreed":
            agreed_scores.append(score)
            sb = nego_score(env.game, "b")
            pareto_hits.append(float(pareto_optimal(env.game.scenario, score, sb)))
    return {"score_all": float(np.mean(scores)),
            "score_agreed": float(np.mean(agreed_scores)) if agreed_scores else 0.0,
            "agreed_pct": 100.0 * len(agreed_scores) / max(1, len(scores)),
            "pareto_pct": 100.0 * float(np.mean(pareto_hits)) if pareto_hits else 0.0}


def run_eval(policy, config: ExperimentConfig, seeds=(0,)) -> EvalReport:
    """Greedy evaluation (no exploration, argmax candidates)."""
    config.validate()
    per_seed = []
    for seed in seeds:
        if config.env == "cooperative":
            per_seed.append(_eval_seed_cooperative(policy, config, seed))
        else:
            per_seed.append(_eval_seed_negotiation(policy, config, seed))
    names = sorted(per_seed[0])
    metrics = {}
    for name in names:
        vals = np.array([row[name] for row in per_seed], dtype=float)
        metrics[name] = (float(vals.mean()), float(vals.std()))
    return EvalReport(config.env, config.eval_episodes, tuple(seeds), metrics)


# ---------------------------------------------------------------------------
# cross-play


@dataclass
class CrossplayReport:
    label: str
    episodes: int
    x_all: float
    x_agreed: float
    y_all: float
    y_agreed: float
    agreed_pct: float

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["label", "episodes", "x_all", "x_agreed",
                         "y_all", "y_agreed", "agreed_pct"])
        writer.writerow([self.label, self.episodes, repr(self.x_all),
                         repr(self.x_agreed), repr(self.y_all),
                         repr(self.y_agreed), repr(self.agreed_pct)])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CrossplayReport":
        rows = list(csv.reader(io.StringIO(text)))
        head, data = rows[0], rows[1]
        row = dict(zip(head, data))
        return cls(label=row["label"], episodes=int(row["episodes"]),
                   x_all=float(row["x_all"]), x_agreed=float(row["x_agreed"]),
                   y_all=float(row["y_all"]), y_agreed=float(row["y_agreed"]),
                   agreed_pct=float(row["agreed_pct"]))


def run_crossplay(policy_x, policy_y, config: ExperimentConfig,
                  episodes: int = 100, seed: int = 0,
                  label: str = "x vs y") -> CrossplayReport:
    """Two frozen policies play each other, alternating first mover.

    policy_x always holds side "a" and policy_y side "b"; only the
    opening turn alternates. Illegal moves execute as a neutral greet,
    mirroring the training environments.
    """
    if config.env != "negotiation":
        raise ValueError("cross-play is defined for the negotiation env")
    env_cfg = config.env_config()
    catalog = enumerate_actions(env_cfg, role="target")
    sides = {"a": policy_x, "b": policy_y}
    xs, ys, flags = [], [], []
    for ep in range(episodes):
        game = nego_new(np.random.default_rng([seed, 9, ep]), env_cfg)
        game.mover = "a" if ep % 2 == 0 else "b"
        while not game.done:
            mover = game.mover
            s = encode_state(game.states[mover])
            idx = greedy_action(sides[mover], s)
            try:
                nego_step(game, catalog[int(idx)])
            except ValueError:
                nego_step(game, simple_act("target", "greet"))
        xs.append(float(nego_score(game, "a")))
        ys.append(float(nego_score(game, "b")))
        flags.append(game.status == "agreed")

    def agreed_mean(vals):
        hit = [v for v, f in zip(vals, flags) if f]
        return float(np.mean(hit)) if hit else 0.0

    return CrossplayReport(label=label, episodes=episodes,
                           x_all=float(np.mean(xs)), x_agreed=agreed_mean(xs),
                           y_all=float(np.mean(ys)), y_agreed=agreed_mean(ys),
                           agreed_pct=100.0 * float(np.mean(flags)))


def run_ablations(config: ExperimentConfig, eval_seeds=(0,), warm_start=True) -> dict:
    """Train every variant under identical env seeds; one result per row.

    warm_start applies the supervised stage first (skipped for the
    REINFORCE row, which learns its own softmax head from scratch).
    """
    results = {}
    for name, overrides in ABLATION_VARIANTS:
        variant_cfg = replace(config, **overrides)
        policy = None
        if warm_start and variant_cfg.algorithm != "reinforce":
            policy, _ = run_pretrain(variant_cfg)
        result = run_train(variant_cfg, policy=policy)
        report = run_eval(result.policy, variant_cfg, seeds=eval_seeds)
        results[name] = {"train": result, "eval": report}
    return results


# ---------------------------------------------------------------------------
# policy checkpointing


def save_policy(policy, path) -> None:
    """One checkpoint directory per parameter store under path."""
    path = Path(path)
    if isinstance(policy, OppaPolicy):
        save_checkpoint(policy.q.store, path / "q")
        save_checkpoint(policy.est.store, path / "est")
    else:
        save_checkpoint(policy.store, path / "pi")


def _install(store, loaded) -> None:
    if sorted(loaded.names()) != sorted(store.names()):
        raise ShapeMismatchError(
            f"checkpoint parameters {sorted(loaded.names())} do not match "
            f"the configured network {sorted(store.names())}")
    for name in store.names():
        if loaded[name].data.shape != store[name].data.shape:
            raise ShapeMismatchError(
                f"entry {name}: checkpoint shape {loaded[name].data.shape} "
                f"does not fit configured shape {store[name].data.shape}")
    store.copy_values_from(loaded)
    for name in store.names():
        m1, m2 = store.moments(name)
        l1, l2 = loaded.moments(name)
        m1[...] = l1
        m2[...] = l2
    store.step_count = loaded.step_count


def load_policy(config: ExperimentConfig, path):
    """Rebuild a policy from config and install checkpointed parameters."""
    path = Path(path)
    policy = build_policy(config)
    if isinstance(policy, OppaPolicy):
        _install(policy.q.store, load_checkpoint(path / "q"))
        _install(policy.est.store, load_checkpoint(path / "est"))
        policy.q.sync_target()
    else:
        _install(policy.store, load_checkpoint(path / "pi"))
    return policy


# ---------------------------------------------------------------------------
# config reference page


FIELD_HELP = {
    "env": "task family: cooperative slot-filling or competitive negotiation",
    "algorithm": "learner: oppa (Q-learning pipeline) or reinforce",
    "state_dim": "encoded dialogue-state width (features are zero-padded up)",
    "item_caps": "negotiation: max item count per type in sampled scenarios",
    "max_turns": "negotiation: acts before the game times out as no-deal",
    "history_window": "negotiation: recent act kinds kept in the state",
    "total_value": "negotiation: each side's valuation of the full pool",
    "patience": "cooperative: user turns granted before the session fails",
    "accept_start": "scripted opponent: opening acceptance threshold",
    "accept_floor": "scripted opponent: lowest acceptance threshold",
    "concede": "scripted opponent: threshold drop per exchange",
    "opponent_spread": "per-episode uniform spread around accept_start",
    "episodes": "training episodes",
    "epsilon_start": "exploration rate at episode 0",
    "epsilon_end": "exploration rate after the anneal window",
    "epsilon_decay_frac": "fraction of episodes spent annealing epsilon",
    "gamma_q": "Q-learning discount",
    "beta0": "initial action-regularization weight",
    "gamma_beta": "per-epoch geometric decay of the regularization weight",
    "epoch_episodes": "episodes per epoch (beta decay and curve granularity)",
    "w1": "weight of the Bellman loss term",
    "w2": "weight of the regularization loss term",
    "tau": "Boltzmann temperature for candidate sampling",
    "target_sync": "episodes between target-network syncs",
    "batch_size": "replay minibatch size",
    "buffer_capacity": "replay buffer capacity",
    "lr": "Adam learning rate",
    "hidden": "Q-network hidden width",
    "est_hidden": "opposite-estimator hidden width",
    "d_emb": "opposite-act embedding width",
    "pretrain_epochs": "supervised epochs per pretraining phase",
    "use_obe": "estimate the opposite reaction and augment the state with it",
    "use_action_reg": "apply the decaying candidate cross-entropy term",
    "reg_stop_gradient": "report the regularization term without backprop",
    "soft_augment": "augment with the expected embedding instead of argmax",
    "seed": "root seed for every derived random stream",
    "snapshot_every": "episodes between learning-curve rows",
    "eval_episodes": "episodes per evaluation seed",
    "corpus_episodes": "scripted rollouts for the pretraining corpus",
}


def config_reference_markdown() -> str:
    lines = ["# Configuration reference",
             "",
             "Flat JSON keys accepted by `ExperimentConfig` and the CLI "
             "`--config` file. Every key is optional; defaults below.",
             "",
             "| key | default | description |",
             "| --- | --- | --- |"]
    defaults = ExperimentConfig()
    for f in fields(ExperimentConfig):
        default = getattr(defaults, f.name)
        if isinstance(default, tuple):
            default = list(default)
        lines.append(f"| `{f.name}` | `{json.dumps(default)}` | "
                     f"{FIELD_HELP[f.name]} |")
    return "\n".join(lines) + "\n"


def ablation_table(results) -> str:
    metric = "success" if next(iter(results.values()))["eval"].env == "cooperative" \
        else "score_all"
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["variant", metric + "_mean", metric + "_std"])
    for name, _ in ABLATION_VARIANTS:
        if name not in results:
            continue
        mean, std = results[name]["eval"].metrics[metric]
        writer.writerow([name, repr(mean), repr(std)])
    return out.getvalue()
