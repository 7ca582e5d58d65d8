"""
Two trained negotiators, head to head
=====================================

Trains the full method and a plain-DQN baseline on the item-division
bargaining task (same warm start, same budgets), then plays them
against each other for 100 games and prints both sides' average scores,
plus one full transcript so the bargaining is visible.

Takes a few minutes on one CPU core; shrink corpus_episodes and
episodes in RECIPE for a quicker (noisier) look.
"""

from dataclasses import replace

import numpy as np

from oppa.domain import encode_state, enumerate_actions, simple_act
from oppa.envs.negotiation import nego_new, nego_score, nego_step
from oppa.harness import (ExperimentConfig, greedy_action, run_crossplay,
                          run_pretrain, run_train)

RECIPE = ExperimentConfig(env="negotiation", state_dim=64, item_caps=(2, 2, 2),
                          max_turns=20, episodes=50, hidden=64, est_hidden=64,
                          d_emb=8, lr=1e-3, corpus_episodes=1000,
                          pretrain_epochs=8, epsilon_start=0.2,
                          epsilon_end=0.01, epsilon_decay_frac=0.6,
                          accept_start=8, accept_floor=4, opponent_spread=2,
                          soft_augment=True, snapshot_every=1000)
EPISODES = 100
seed = 0

policies = {}
for name, flags in (("full method", dict(use_obe=True, use_action_reg=True)),
                    ("plain DQN", dict(use_obe=False, use_action_reg=False))):
    cfg = replace(RECIPE, seed=seed, **flags)
    policy, report = run_pretrain(cfg)
    run_train(cfg, policy=policy)
    policies[name] = policy
    print(f"{name}: warm-start imitation accuracy "
          f"{report['q_imitation_accuracy']:.2f}")

report = run_crossplay(policies["full method"], policies["plain DQN"],
                       RECIPE, episodes=EPISODES, seed=seed,
                       label="full method vs plain DQN")
print(f"\n{report.label}, {report.episodes} games:")
print(f"  full method: {report.x_all:.2f} overall, "
      f"{report.x_agreed:.2f} when a deal closed")
print(f"  plain DQN:   {report.y_all:.2f} overall, "
      f"{report.y_agreed:.2f} when a deal closed")
print(f"  deals closed: {report.agreed_pct:.0f}%")

# replay one game move by move
env_cfg = RECIPE.env_config()
catalog = enumerate_actions(env_cfg, role="target")
game = nego_new(np.random.default_rng([seed, 9, 0]), env_cfg)
sides = {"a": ("full method", policies["full method"]),
         "b": ("plain DQN  ", policies["plain DQN"])}
print(f"\nsample game: counts {game.scenario.counts}, "
      f"values a={game.scenario.values_a} b={game.scenario.values_b}")
while not game.done:
    name, policy = sides[game.mover]
    act = catalog[greedy_action(policy, encode_state(game.states[game.mover]))]
    try:
        nego_step(game, act)
    except ValueError:
        act = simple_act("target", "greet")
        nego_step(game, act)
    print(f"  {name}  {act}")
print(f"outcome: {game.status}, full method {nego_score(game, 'a')} points, "
      f"plain DQN {nego_score(game, 'b')} points")
