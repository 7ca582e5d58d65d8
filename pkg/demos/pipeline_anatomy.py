"""
Anatomy of one action choice
============================

Walks a single dialogue state through the full pipeline: propose a
candidate act against a placeholder reaction, ask the opposite-behavior
estimator how the other side would answer it, fold that predicted
reaction into the state, and only then pick the action epsilon-greedily.
Also prints the exploration and regularization schedules the trainer
follows.
"""

import numpy as np

from oppa.domain import encode_state
from oppa.harness import ExperimentConfig, build_policy, make_env
from oppa.policy import augment_state, estimate_opposite, sample_candidate

config = ExperimentConfig(env="negotiation", state_dim=64, item_caps=(2, 2, 2),
                          hidden=32, est_hidden=32, d_emb=8, seed=0)
env, target_catalog, opposite_catalog = make_env(config)
policy = build_policy(config)

state, _ = env.reset(np.random.default_rng(0))
s = encode_state(state)
print(f"state vector: {s.shape[0]} features, "
      f"{int(np.count_nonzero(s))} nonzero")

# step 1: a candidate act, scored with the neutral placeholder reaction
rng = np.random.default_rng(1)
candidate, cand_dist = sample_candidate(s, policy.q, policy.placeholder,
                                        tau=1.0, rng=rng)
print(f"candidate act: {target_catalog[candidate].kind} "
      f"{dict(target_catalog[candidate].args)}")
print(f"candidate distribution peaks at "
      f"{cand_dist.data.max():.3f} over {len(target_catalog)} acts")

# step 2: the estimator predicts the opposite side's reaction to it
reaction, reaction_dist = estimate_opposite(s, candidate, policy.est)
print(f"estimated reaction: {opposite_catalog[reaction].kind} "
      f"(p={reaction_dist.data[reaction]:.3f})")

# step 3: the reaction's embedding widens the state before Q sees it
augmented = augment_state(s, reaction, policy.q.store["emb"].data)
print(f"augmented state: {augmented.shape[0]} features "
      f"(= {s.shape[0]} + embedding width {config.d_emb})")

q_values = policy.q.q_values(s, reaction).data
print(f"greedy act under the augmented state: "
      f"{target_catalog[int(np.argmax(q_values))].kind}")

# the trainer's schedules, tabulated
tc = config.to_training_config()
print("\nepisode  epsilon  beta")
for ep in range(0, config.episodes + 1, 100):
    print(f"{ep:7d}  {tc.epsilon_at(ep):7.3f}  {tc.beta_at(ep):.4f}")
