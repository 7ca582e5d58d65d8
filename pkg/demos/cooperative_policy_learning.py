"""
Learning to fill slots cooperatively
====================================

Trains the full pipeline on the two-domain slot-filling task: a
supervised warm start imitating a scripted expert, then a short RL
phase against the agenda-based user simulator. Runs the three variants
that matter for the story — the full method, the same without action
regularization, and plain DQN — and prints their final success rates.

Takes a couple of minutes on one CPU core.
"""

from dataclasses import replace

import numpy as np

from oppa.harness import ExperimentConfig, run_eval, run_pretrain, run_train

RECIPE = ExperimentConfig(env="cooperative", state_dim=23, episodes=150,
                          hidden=64, est_hidden=64, d_emb=8, lr=1e-3,
                          eval_episodes=100, snapshot_every=50,
                          corpus_episodes=200, pretrain_epochs=5,
                          epsilon_start=0.2, epsilon_end=0.01,
                          epsilon_decay_frac=0.6)

VARIANTS = (
    ("full method", dict(use_obe=True, use_action_reg=True)),
    ("no action regularization", dict(use_obe=True, use_action_reg=False)),
    ("plain DQN", dict(use_obe=False, use_action_reg=False)),
)

seeds = (0, 1, 2)
print(f"cooperative task, {RECIPE.episodes} RL episodes after warm start, "
      f"seeds {list(seeds)}\n")

for label, flags in VARIANTS:
    per_seed = []
    for seed in seeds:
        cfg = replace(RECIPE, seed=seed, **flags)
        policy, report = run_pretrain(cfg)
        result = run_train(cfg, policy=policy)
        ev = run_eval(policy, cfg, seeds=(seed,))
        per_seed.append(ev.metrics["success"][0])
        if seed == seeds[0]:
            curve = ", ".join(f"{row['episode']}:{row['success']:.2f}"
                              for row in result.curve)
            print(f"{label}: imitation accuracy "
                  f"{report['q_imitation_accuracy']:.2f}, "
                  f"curve [{curve}]")
    print(f"{label}: mean success {np.mean(per_seed):.3f} "
          f"(per seed {[round(v, 2) for v in per_seed]})\n")

print("expected ordering: full method >= no-regularization > plain DQN;")
print("all variants share the warm start, so the gaps are what the")
print("estimator and the anchoring regularizer each buy during RL.")
