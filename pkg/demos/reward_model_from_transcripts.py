"""
Reading the deal out of the transcript
======================================

The bargaining environment hands back exact scores, but a pile of
recorded sessions does not. This walk trains the transcript reward
model: word-level and turn-level recurrent encoders (with attention over
turns) read a rendered session plus the agent's goal line, and per-item
heads predict how many of each item the agent walked away with. The
value-weighted decode of that prediction is the reward a policy can
train against when no simulator is available.

A few hundred synthetic sessions are enough to see the idea; the test
suite runs the full-accuracy version on a larger corpus.
"""

import numpy as np

from oppa.domain import NegotiationConfig
from oppa.reward import (RewardModelConfig, SessionTokens, decode_output,
                         generate_corpus, task_reward, train_reward_model)

nego = NegotiationConfig(item_caps=(2, 2, 2), state_dim=64)
records = generate_corpus(500, nego, seed=0)
agreed = [r for r in records if r.score > 0]
print(f"corpus: {len(records)} sessions, {len(agreed)} ended in a deal")

# any agreed session's recorded score is just the value-weighted outcome
rec = agreed[0]
values = rec.scenario.values_of(rec.target)
print(f"check: outcome {rec.outcome} x values {values} "
      f"= {task_reward(rec.outcome, values, rec.scenario.counts)} "
      f"(recorded score {rec.score})")

cfg = RewardModelConfig(d_word=16, gru_w_hidden=24, gru_o_hidden=32,
                        gru_g_hidden=16, d_session=48, lr=3e-3,
                        epochs=5, batch_size=16, seed=0)
model, vocab, report = train_reward_model(records, nego, cfg)
print(f"\nheld out {report['holdout_size']} of {len(records)} sessions")
for i, acc in enumerate(report["per_issue_accuracy"]):
    print(f"  item {i}: {acc:.2f} accuracy")
print(f"  exact allocation match: {report['exact_match']:.2f}")

# decode one session end to end
st = SessionTokens(vocab.encode(rec.tokens), vocab.encode(rec.goal))
pred = decode_output(model.predict_issues(st))
print(f"\nsample transcript ({len(rec.tokens)} tokens):")
tail = " ..." if len(rec.tokens) > 24 else ""
print(" ", " ".join(rec.tokens[:24]) + tail)
print(f"goal line: {' '.join(rec.goal)}")
print(f"predicted outcome {pred}, true outcome {rec.outcome}")
print(f"decoded reward {task_reward(pred, values, rec.scenario.counts)}, "
      f"recorded score {rec.score}")
