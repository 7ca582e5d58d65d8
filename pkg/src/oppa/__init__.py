"""Opposite-agent-aware dialogue policy learning.

A target agent's Q-policy is augmented with an estimate of the other
participant's next dialogue act; training, environments, metrics, a
session-outcome reward model and an interactive play service live in the
submodules.
"""

from .policy import (OppaPolicy, OppositeEstimator, QFunction, ReinforcePolicy,
                     ReplayBuffer, RngBundle, TrainingConfig, Transition,
                     augment_state, bellman_target, buffer_push, buffer_sample,
                     candidate_distribution, decay_beta, dqn_loss, episode_rng,
                     estimate_opposite, pretrain, reg_loss, reinforce_update,
                     sample_candidate, select_action, total_loss, train_iteration)

__version__ = "0.1.0"

__all__ = [
    "OppaPolicy", "OppositeEstimator", "QFunction", "ReinforcePolicy",
    "ReplayBuffer", "RngBundle", "TrainingConfig", "Transition",
    "augment_state", "bellman_target", "buffer_push", "buffer_sample",
    "candidate_distribution", "decay_beta", "dqn_loss", "episode_rng",
    "estimate_opposite", "pretrain", "reg_loss", "reinforce_update",
    "sample_candidate", "select_action", "total_loss", "train_iteration",
]
