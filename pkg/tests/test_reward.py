"""Reward-model tests: canonical token rendering, vocabulary closure,
encoder output shapes, decoding and task-reward arithmetic, corpus
generation with an independent label oracle, and a full-stack gradient
check at tiny sizes."""

import numpy as np
import pytest

from oppa.domain import NegotiationConfig, Scenario, propose_act, simple_act
from oppa.nn import grad_check, one_hot
from oppa.nn import tensor as T
from oppa.reward import (RewardModel, RewardModelConfig, SessionTokens,
                         Vocabulary, act_tokens, corpus_from_jsonl,
                         corpus_to_jsonl, decode_output, generate_corpus,
                         goal_tokens, session_tokens, task_reward,
                         train_reward_model)

NEGO = NegotiationConfig(item_caps=(2, 2, 2), state_dim=64)
APPENDIX = Scenario(counts=(3, 1, 1), values_a=(0, 6, 4), values_b=(1, 4, 3))


def tiny_model(seed=0, issue_classes=(2, 2, 2), vocab_size=30):
    cfg = RewardModelConfig(d_word=3, gru_w_hidden=4, gru_o_hidden=4,
                            gru_g_hidden=3, d_session=5, seed=seed)
    return RewardModel(vocab_size, issue_classes, cfg,
                       rng=np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# token rendering


def test_act_token_rendering():
    assert act_tokens(propose_act("a", (1, 0, 1))) == ["propose", "b=1", "h=0", "l=1"]
    assert act_tokens(simple_act("b", "agree")) == ["agree"]
    assert act_tokens(simple_act("a", "end")) == ["end"]


def test_goal_token_rendering():
    toks = goal_tokens((3, 1, 1), (0, 6, 4))
    assert toks == ["cb=3", "ch=1", "cl=1", "vb=0", "vh=6", "vl=4"]


def test_session_tokens_interleave_speaker_marks():
    acts = [(False, simple_act("b", "greet")),
            (True, propose_act("a", (0, 1, 1))),
            (False, simple_act("b", "agree"))]
    toks, goal = session_tokens(acts, (3, 1, 1), (0, 6, 4))
    assert toks == ("<other>", "greet",
                    "<self>", "propose", "b=0", "h=1", "l=1",
                    "<other>", "agree")
    assert goal == tuple(goal_tokens((3, 1, 1), (0, 6, 4)))


def test_vocabulary_closure_and_roundtrip():
    vocab = Vocabulary(NEGO)
    assert "<self>" in vocab and "propose" in vocab and "b=2" in vocab
    assert "b=3" not in vocab  # beyond the cap
    idx = vocab.encode(["agree", "h=1", "vb=10"])
    assert [vocab.word(i) for i in idx] == ["agree", "h=1", "vb=10"]
    with pytest.raises(KeyError):
        vocab.index("banana")
    assert list(Vocabulary(NEGO).encode(["agree"])) == list(idx[:1])


def test_corpus_tokens_all_in_vocabulary():
    vocab = Vocabulary(NEGO)
    for rec in generate_corpus(50, NEGO, seed=3):
        vocab.encode(rec.tokens)
        vocab.encode(rec.goal)


def test_session_tokens_validation():
    with pytest.raises(ValueError):
        SessionTokens((), (1,)).validate(10)
    with pytest.raises(ValueError):
        SessionTokens((1,), ()).validate(10)
    with pytest.raises(ValueError):
        SessionTokens((99,), (1,)).validate(10)


# ---------------------------------------------------------------------------
# encoder and heads


def test_encode_session_shape_and_attention_simplex():
    m = tiny_model()
    st = SessionTokens((0, 3, 4, 1), (5, 6))
    h_s = m.encode_session(st)
    assert h_s.data.shape == (5,)
    assert m.last_attention.data.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(m.last_attention.data >= 0.0)


def test_encode_single_token_session_gets_full_attention():
    m = tiny_model()
    m.encode_session(SessionTokens((2,), (5,)))
    np.testing.assert_allclose(m.last_attention.data, [1.0])


def test_encode_rejects_empty():
    m = tiny_model()
    with pytest.raises(ValueError):
        m.encode_session(SessionTokens((), (1,)))


def test_predict_issues_are_simplices():
    m = tiny_model(issue_classes=(3, 2, 4))
    dists = m.predict_issues(SessionTokens((0, 1, 2), (3, 4)))
    assert [d.data.shape[0] for d in dists] == [3, 2, 4]
    for d in dists:
        assert d.data.sum() == pytest.approx(1.0)
        assert np.all(d.data > 0.0)


def test_zeroed_heads_predict_uniform():
    m = tiny_model(issue_classes=(3, 5, 2))
    for i in range(3):
        m.store[f"head{i}"].data[:] = 0.0
    dists = m.predict_issues(SessionTokens((0, 1), (2,)))
    for d, classes in zip(dists, (3, 5, 2)):
        np.testing.assert_allclose(d.data, 1.0 / classes)


def test_loss_of_exact_onehot_prediction_is_zero():
    from oppa.nn import cross_entropy
    assert cross_entropy(one_hot(1, 3), T.as_tensor(one_hot(1, 3))).item() == 0.0


def test_loss_validates_outcome():
    m = tiny_model(issue_classes=(2, 2, 2))
    st = SessionTokens((0, 1), (2,))
    with pytest.raises(ValueError):
        m.loss(st, (0, 1))
    with pytest.raises(ValueError):
        m.loss(st, (0, 1, 5))


# ---------------------------------------------------------------------------
# decoding and task reward


def test_decode_output_examples():
    assert decode_output([T.as_tensor([0.1, 0.7, 0.2])]) == (1,)
    assert decode_output([T.as_tensor([0.25, 0.25, 0.25, 0.25])]) == (0,)


def test_decode_output_matches_scan_oracle():
    rng = np.random.default_rng(9)
    for _ in range(200):
        p = rng.random(int(rng.integers(2, 6)))
        p /= p.sum()
        got = decode_output([T.as_tensor(p)])[0]
        best, arg = -1.0, 0
        for i, v in enumerate(p):
            if v > best:
                best, arg = v, i
        assert got == arg


def test_task_reward_appendix_fixture():
    assert task_reward((0, 1, 1), APPENDIX.values_a, APPENDIX.counts) == 10
    assert task_reward((3, 0, 0), APPENDIX.values_b, APPENDIX.counts) == 3
    assert task_reward((0, 0, 0), APPENDIX.values_a, APPENDIX.counts) == 0


def test_task_reward_linearity_and_total():
    base = task_reward((2, 1, 0), (1, 2, 3), (3, 1, 1))
    scaled = task_reward((2, 1, 0), (3, 6, 9), (3, 1, 1))
    assert scaled == 3 * base
    assert task_reward(APPENDIX.counts, APPENDIX.values_a, APPENDIX.counts) == 10
    assert task_reward(APPENDIX.counts, APPENDIX.values_b, APPENDIX.counts) == 10


def test_task_reward_rejects_infeasible():
    with pytest.raises(ValueError):
        task_reward((4, 0, 0), APPENDIX.values_a, APPENDIX.counts)
    with pytest.raises(ValueError):
        task_reward((0, 0, -1), APPENDIX.values_a, APPENDIX.counts)
    with pytest.raises(ValueError):
        task_reward((1, 1), APPENDIX.values_a, APPENDIX.counts)


# ---------------------------------------------------------------------------
# corpus generation


def oracle_outcome(rec):
    """Recompute the target-side allocation from the rendered tokens only."""
    toks = list(rec.tokens)
    if toks[-1] != "agree":
        return tuple(0 for _ in rec.scenario.counts)
    # walk back to the proposal standing when agree was uttered
    last_prop, prop_speaker = None, None
    i = 0
    speaker = None
    while i < len(toks):
        if toks[i] in ("<self>", "<other>"):
            speaker = toks[i]
            i += 1
            continue
        if toks[i] == "propose":
            last_prop = [int(t.split("=")[1]) for t in toks[i + 1:i + 4]]
            prop_speaker = speaker
            i += 4
            continue
        if toks[i] == "disagree":
            last_prop, prop_speaker = None, None
        i += 1
    claims = tuple(last_prop)
    if prop_speaker == "<self>":
        return claims
    return tuple(c - cl for c, cl in zip(rec.scenario.counts, claims))


def test_generate_corpus_deterministic():
    a = generate_corpus(40, NEGO, seed=7)
    b = generate_corpus(40, NEGO, seed=7)
    assert a == b
    c = generate_corpus(40, NEGO, seed=8)
    assert a != c


def test_generated_labels_match_token_oracle():
    for rec in generate_corpus(300, NEGO, seed=11):
        assert rec.outcome == oracle_outcome(rec)


def test_generated_scores_match_task_reward():
    for rec in generate_corpus(200, NEGO, seed=13):
        values = rec.scenario.values_of(rec.target)
        assert task_reward(rec.outcome, values, rec.scenario.counts) == rec.score


def test_corpus_jsonl_roundtrip():
    recs = generate_corpus(20, NEGO, seed=5)
    vocab = Vocabulary(NEGO)
    text = corpus_to_jsonl(recs, vocab)
    back = corpus_from_jsonl(text)
    assert len(back) == 20
    for rec, (st, outcome) in zip(recs, back):
        assert st.tokens == vocab.encode(rec.tokens)
        assert st.goal == vocab.encode(rec.goal)
        assert outcome == rec.outcome


# ---------------------------------------------------------------------------
# training


def test_train_rejects_empty_corpus():
    with pytest.raises(ValueError):
        train_reward_model([], NEGO, RewardModelConfig())


def test_training_learns_above_chance_quickly():
    corpus = generate_corpus(150, NEGO, seed=2)
    cfg = RewardModelConfig(d_word=12, gru_w_hidden=16, gru_o_hidden=20,
                            gru_g_hidden=12, d_session=24, lr=4e-3, epochs=4,
                            batch_size=16, seed=1)
    _, _, report = train_reward_model(corpus, NEGO, cfg)
    # issue classes have 3 values; chance is about 1/3
    assert report["mean_issue_accuracy"] > 0.55
    assert report["holdout_size"] == 15
    assert len(report["per_issue_accuracy"]) == 3


def test_full_stack_gradient_check():
    m = tiny_model(seed=4, issue_classes=(2, 3, 2), vocab_size=12)
    st = SessionTokens((0, 3, 7, 1, 5), (9, 10))

    def build_loss():
        return m.loss(st, (1, 2, 0))

    assert grad_check(build_loss, m.store) < 1e-4
