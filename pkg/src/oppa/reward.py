"""Session-outcome prediction for negotiation dialogues.

When the environment cannot hand back a score (live sessions, logged
transcripts), a recurrent encoder reads the whole session as canonical
act tokens plus the agent's own goal and per-issue classifiers predict
how many items of each type the agent ended up with; the task reward is
the value-weighted sum of that outcome. Dialogue acts are rendered to
short token strings ("propose b=1 h=0 l=1", "agree") so the act-level
pipeline feeds the token-level model without a generation system.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import nn
from .domain import (ITEM_TYPES, DialogueAct, NegotiationConfig, Scenario,
                     propose_act, propose_counts, simple_act)
from .envs import nego_new, nego_score, nego_step
from .nn import tensor as T

ITEM_LETTER = {"book": "b", "hat": "h", "ball": "l"}
SPEAKER_SELF = "<self>"
SPEAKER_OTHER = "<other>"


def act_tokens(act: DialogueAct) -> list:
    """Canonical token rendering of one act (no speaker mark)."""
    if act.kind == "propose":
        counts = propose_counts(act)
        return ["propose"] + [f"{ITEM_LETTER[t]}={c}"
                              for t, c in zip(ITEM_TYPES, counts)]
    return [act.kind]


def goal_tokens(counts, values) -> list:
    """The agent's private game description as tokens."""
    toks = [f"c{ITEM_LETTER[t]}={c}" for t, c in zip(ITEM_TYPES, counts)]
    toks += [f"v{ITEM_LETTER[t]}={v}" for t, v in zip(ITEM_TYPES, values)]
    return toks


def session_tokens(acts, counts, values) -> tuple:
    """Token strings for a session seen from one side.

    acts: list of (is_self, DialogueAct) in time order. Each act is
    prefixed with a speaker mark so outcome attribution is learnable.
    """
    toks = []
    for is_self, act in acts:
        toks.append(SPEAKER_SELF if is_self else SPEAKER_OTHER)
        toks.extend(act_tokens(act))
    return tuple(toks), tuple(goal_tokens(counts, values))


class Vocabulary:
    """Closed token inventory derived from the negotiation config."""

    def __init__(self, config: NegotiationConfig):
        words = [SPEAKER_SELF, SPEAKER_OTHER,
                 "propose", "agree", "disagree", "end", "greet"]
        for t, cap in zip(ITEM_TYPES, config.item_caps):
            words += [f"{ITEM_LETTER[t]}={c}" for c in range(cap + 1)]
            words += [f"c{ITEM_LETTER[t]}={c}" for c in range(cap + 1)]
            words += [f"v{ITEM_LETTER[t]}={v}"
                      for v in range(config.total_value + 1)]
        self._words = tuple(words)
        self._index = {w: i for i, w in enumerate(words)}

    def __len__(self):
        return len(self._words)

    def __contains__(self, word):
        return word in self._index

    def index(self, word) -> int:
        if word not in self._index:
            raise KeyError(f"token not in vocabulary: {word!r}")
        return self._index[word]

    def encode(self, words) -> tuple:
        return tuple(self.index(w) for w in words)

    def word(self, idx: int) -> str:
        return self._words[idx]


@dataclass(frozen=True)
class SessionTokens:
    """Index-encoded session plus the agent's goal sequence."""

    tokens: tuple
    goal: tuple

    def validate(self, vocab_size: int) -> "SessionTokens":
        if not self.tokens or not self.goal:
            raise ValueError("session and goal token sequences must be non-empty")
        for i in tuple(self.tokens) + tuple(self.goal):
            if not 0 <= int(i) < vocab_size:
                raise ValueError(f"token index {i} outside vocabulary")
        return self


@dataclass
class RewardModelConfig:
    d_word: int = 32
    gru_w_hidden: int = 128
    gru_o_hidden: int = 256
    gru_g_hidden: int = 64
    d_session: int = 256
    lr: float = 1e-3
    epochs: int = 10
    batch_size: int = 16
    holdout_frac: float = 0.1
    seed: int = 0


class RewardModel:
    """Word GRU -> BiGRU over [embedding ++ word hidden] -> additive
    attention pooling; a goal GRU encodes the agent's own counts/values;
    h_s = tanh(W_s [goal ++ context]) feeds one softmax head per issue."""

    def __init__(self, vocab_size: int, issue_classes, cfg: RewardModelConfig,
                 rng=None):
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.issue_classes = tuple(int(c) for c in issue_classes)
        store = nn.ParamStore()
        store.add("emb", nn.glorot(rng, vocab_size, cfg.d_word,
                                   (vocab_size, cfg.d_word)))
        self.gru_w = nn.GruCellParams.create(store, "gru_w", cfg.d_word,
                                             cfg.gru_w_hidden, rng)
        d_pair = cfg.d_word + cfg.gru_w_hidden
        self.gru_f = nn.GruCellParams.create(store, "gru_f", d_pair,
                                             cfg.gru_o_hidden, rng)
        self.gru_b = nn.GruCellParams.create(store, "gru_b", d_pair,
                                             cfg.gru_o_hidden, rng)
        self.att = nn.AttentionParams.create(store, "att", 2 * cfg.gru_o_hidden,
                                             cfg.gru_o_hidden, rng)
        self.gru_g = nn.GruCellParams.create(store, "gru_g", cfg.d_word,
                                             cfg.gru_g_hidden, rng)
        d_cat = cfg.gru_g_hidden + 2 * cfg.gru_o_hidden
        store.add("w_s", nn.glorot(rng, d_cat, cfg.d_session,
                                   (cfg.d_session, d_cat)))
        for i, classes in enumerate(self.issue_classes):
            store.add(f"head{i}", nn.glorot(rng, cfg.d_session, classes,
                                            (classes, cfg.d_session)))
        self.store = store

    def _rows(self, indices):
        return [T.pick_row(self.store["emb"], int(i)) for i in indices]

    def encode_session(self, st: SessionTokens) -> T.Tensor:
        st.validate(self.vocab_size)
        emb = self._rows(st.tokens)
        word_h = nn.gru_forward(emb, self.gru_w)
        pairs = [T.concat([e, h]) for e, h in zip(emb, word_h)]
        hidden = nn.bigru_forward(pairs, self.gru_f, self.gru_b)
        self.last_attention, context = nn.attention(hidden, self.att)
        goal_h = nn.gru_forward(self._rows(st.goal), self.gru_g)[-1]
        return T.tanh(T.matmul(self.store["w_s"], T.concat([goal_h, context])))

    def predict_issues(self, st: SessionTokens) -> list:
        h_s = self.encode_session(st)
        return [T.softmax(T.matmul(self.store[f"head{i}"], h_s))
                for i in range(len(self.issue_classes))]

    def loss(self, st: SessionTokens, outcome) -> T.Tensor:
        """Sum of per-issue cross-entropies against the true allocation."""
        outcome = tuple(int(o) for o in outcome)
        if len(outcome) != len(self.issue_classes):
            raise ValueError(f"outcome has {len(outcome)} issues, "
                             f"model expects {len(self.issue_classes)}")
        dists = self.predict_issues(st)
        total = None
        for dist, label, classes in zip(dists, outcome, self.issue_classes):
            if not 0 <= label < classes:
                raise ValueError(f"outcome class {label} outside [0, {classes})")
            ce = nn.cross_entropy(nn.one_hot(label, classes), dist)
            total = ce if total is None else T.add(total, ce)
        return total


def decode_output(dists) -> tuple:
    """Per-issue argmax; ties resolve to the lowest class."""
    out = []
    for d in dists:
        p = d.data if hasattr(d, "data") else np.asarray(d)
        out.append(int(np.argmax(p)))
    return tuple(out)


def task_reward(outcome, values, counts) -> int:
    """Value-weighted sum of the predicted allocation."""
    outcome = tuple(int(o) for o in outcome)
    if len(outcome) != len(values) or len(outcome) != len(counts):
        raise ValueError("outcome, values and counts must align per issue")
    for o, c in zip(outcome, counts):
        if not 0 <= o <= c:
            raise ValueError(f"outcome {outcome} infeasible for counts {tuple(counts)}")
    return int(sum(o * v for o, v in zip(outcome, values)))


# ---------------------------------------------------------------------------
# synthetic corpus


@dataclass(frozen=True)
class SessionRecordTokens:
    """One training example: rendered session, true target-side outcome."""

    tokens: tuple
    goal: tuple
    outcome: tuple
    scenario: Scenario
    target: str
    score: int


def generate_corpus(n: int, config: NegotiationConfig, seed: int = 0,
                    agree_prob: float = 0.5) -> list:
    """Random legal self-play sessions with ground-truth outcomes.

    The final allocation is a deterministic function of the rendered
    tokens (last standing proposal, its speaker mark, and whether the
    session ends in agree), which is exactly what the model must learn.
    """
    rng = np.random.default_rng([seed, 42])
    records = []
    while len(records) < n:
        game = nego_new(rng, config)
        target = "a" if rng.random() < 0.5 else "b"
        acts = []
        done = False
        while not done:
            mover = game.mover
            act = _random_act(game, rng, agree_prob)
            acts.append((mover == target, act))
            game, done = nego_step(game, act)
        score = nego_score(game, target)
        if game.status == "agreed":
            outcome = tuple(game.allocations[target])
        else:
            outcome = tuple(0 for _ in ITEM_TYPES)
        values = game.scenario.values_of(target)
        toks, goal = session_tokens(acts, game.scenario.counts, values)
        records.append(SessionRecordTokens(toks, goal, outcome, game.scenario,
                                           target, int(score)))
    return records


def _random_act(game, rng, agree_prob):
    standing = game.standing
    mover = game.mover
    if standing is not None and standing[1] != mover:
        r = rng.random()
        if r < agree_prob:
            return simple_act(mover, "agree")
        if r < agree_prob + 0.15:
            return simple_act(mover, "disagree")
        if r < agree_prob + 0.25:
            return simple_act(mover, "end")
    elif rng.random() < 0.08:
        return simple_act(mover, "end")
    claims = tuple(int(rng.integers(0, c + 1)) for c in game.scenario.counts)
    return propose_act(mover, claims)


def corpus_to_jsonl(records, vocab: Vocabulary) -> str:
    lines = []
    for r in records:
        lines.append(json.dumps({"tokens": list(vocab.encode(r.tokens)),
                                 "goal_tokens": list(vocab.encode(r.goal)),
                                 "outcome": list(r.outcome)}, sort_keys=True))
    return "\n".join(lines) + "\n"


def corpus_from_jsonl(text: str) -> list:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        out.append((SessionTokens(tuple(row["tokens"]), tuple(row["goal_tokens"])),
                    tuple(row["outcome"])))
    return out


# ---------------------------------------------------------------------------
# training


def train_reward_model(records, config: NegotiationConfig,
                       cfg: RewardModelConfig) -> tuple:
    """Fit the model on rendered sessions; returns (model, vocab, report).

    records: SessionRecordTokens list (or (SessionTokens, outcome) pairs
    already encoded). Report carries held-out per-issue and exact-match
    accuracies.
    """
    if not records:
        raise ValueError("train_reward_model needs a non-empty corpus")
    vocab = Vocabulary(config)
    examples = []
    for r in records:
        if isinstance(r, SessionRecordTokens):
            st = SessionTokens(vocab.encode(r.tokens), vocab.encode(r.goal))
            examples.append((st, r.outcome))
        else:
            st, outcome = r
            examples.append((st.validate(len(vocab)), tuple(outcome)))

    classes = tuple(c + 1 for c in config.item_caps)
    model = RewardModel(len(vocab), classes, cfg,
                        rng=np.random.default_rng([cfg.seed, 3]))
    rng = np.random.default_rng([cfg.seed, 4])
    order = rng.permutation(len(examples))
    n_hold = max(1, int(len(examples) * cfg.holdout_frac)) if len(examples) > 1 else 0
    hold = [examples[i] for i in order[:n_hold]]
    train = [examples[i] for i in order[n_hold:]] or list(examples)

    for _ in range(cfg.epochs):
        perm = rng.permutation(len(train))
        for k in range(0, len(perm), cfg.batch_size):
            batch = [train[i] for i in perm[k:k + cfg.batch_size]]
            losses = [model.loss(st, outcome) for st, outcome in batch]
            loss = T.tmean(T.stack(losses))
            model.store.zero_grads()
            nn.backward(loss)
            nn.adam_step(model.store, lr=cfg.lr)

    report = evaluate_reward_model(model, hold if hold else train)
    report["train_size"] = len(train)
    report["holdout_size"] = len(hold)
    return model, vocab, report


def evaluate_reward_model(model: RewardModel, examples) -> dict:
    n_issues = len(model.issue_classes)
    hits = np.zeros(n_issues)
    exact = 0
    for st, outcome in examples:
        pred = decode_output(model.predict_issues(st))
        for i in range(n_issues):
            hits[i] += int(pred[i] == outcome[i])
        exact += int(pred == tuple(outcome))
    n = max(1, len(examples))
    per_issue = [float(h / n) for h in hits]
    return {"per_issue_accuracy": per_issue,
            "mean_issue_accuracy": float(np.mean(per_issue)),
            "exact_match": exact / n,
            "n": len(examples)}
