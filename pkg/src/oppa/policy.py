"""Opposite-aware dialogue policy learning.

The learner couples a DQN over augmented states with an opposite-behavior
estimator: a candidate own-action is drawn using a constant neutral
opposite act, the estimator predicts the opposite agent's reaction to
that candidate, and the predicted reaction's embedding is appended to
the state before the real action choice. A cross-entropy term with a
decaying weight keeps the candidate distribution close to the actions
actually executed early in training.

Both ablation switches live in TrainingConfig: use_obe=False collapses
the pipeline to a vanilla DQN over placeholder-augmented states;
use_action_reg=False drops the regularization term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .domain import encode_state
from .nn import tensor as T


@dataclass
class TrainingConfig:
    episodes: int = 500
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
    target_sync: int = 1  # episodes between target-net syncs
    batch_size: int = 32
    buffer_capacity: int = 500
    lr: float = 1e-3
    hidden: int = 256
    est_hidden: int = 256
    d_emb: int = 16
    pretrain_epochs: int = 5
    seed: int = 0
    use_obe: bool = True
    use_action_reg: bool = True
    reg_stop_gradient: bool = False
    soft_augment: bool = False

    def validate(self) -> "TrainingConfig":
        if not 0.0 <= self.gamma_q <= 1.0:
            raise ValueError(f"gamma_q must be in [0,1], got {self.gamma_q}")
        if not 0.0 < self.gamma_beta <= 1.0:
            raise ValueError(f"gamma_beta must be in (0,1], got {self.gamma_beta}")
        for name in ("epsilon_start", "epsilon_end"):
            eps = getattr(self, name)
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {eps}")
        if self.target_sync < 1:
            raise ValueError(f"target_sync must be >= 1, got {self.target_sync}")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_size and buffer_capacity must be positive")
        return self

    def epsilon_at(self, episode: int) -> float:
        """Linear anneal over the first epsilon_decay_frac of episodes."""
        horizon = max(1, int(self.episodes * self.epsilon_decay_frac))
        frac = min(1.0, episode / horizon)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)

    def beta_at(self, episode: int) -> float:
        return self.beta0 * self.gamma_beta ** (episode // self.epoch_episodes)


@dataclass
class RngBundle:
    """Named RNG streams so optional components never shift shared draws."""

    explore: np.random.Generator
    candidate: np.random.Generator
    buffer: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngBundle":
        return cls(explore=np.random.default_rng([seed, 10]),
                   candidate=np.random.default_rng([seed, 11]),
                   buffer=np.random.default_rng([seed, 12]))


def episode_rng(seed: int, episode: int) -> np.random.Generator:
    """Environment stream for one episode, identical across variants."""
    return np.random.default_rng([seed, 7, episode])


# ---------------------------------------------------------------------------
# replay buffer


@dataclass
class Transition:
    """One stored step. opp_code / opp_code2 are the opposite-act indices
    (or soft distributions) whose embeddings augmented s and s' at act
    time; they are frozen here and never recomputed at replay."""

    s: np.ndarray
    opp_code: object
    a: int
    r: float
    s2: np.ndarray
    opp_code2: object
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring with FIFO overwrite and uniform sampling."""

    def __init__(self, capacity: int = 500):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items = []
        self._cursor = 0

    def __len__(self):
        return len(self._items)

    def push(self, t: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(t)
        else:
            self._items[self._cursor] = t
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, n: int, rng: np.random.Generator):
        if not self._items:
            raise ValueError("sample from empty buffer")
        idx = rng.integers(0, len(self._items), size=n)
        return [self._items[int(i)] for i in idx]

    def items(self):
        return list(self._items)


def buffer_push(buf: ReplayBuffer, t: Transition) -> None:
    buf.push(t)


def buffer_sample(buf: ReplayBuffer, n: int, rng: np.random.Generator):
    return buf.sample(n, rng)


# ---------------------------------------------------------------------------
# networks


def _embed(emb: T.Tensor, opp_code) -> T.Tensor:
    """Embedding row for a hard index, or the expectation under a
    distribution for the soft-augmentation variant."""
    if isinstance(opp_code, (int, np.integer)):
        return T.pick_row(emb, int(opp_code))
    weights = np.asarray(opp_code, dtype=np.float64)
    out = None
    for i, w in enumerate(weights):
        term = T.scale(T.pick_row(emb, i), float(w))
        out = term if out is None else T.add(out, term)
    return out


class QFunction:
    """Two-layer Q-network over [state ++ opposite-act embedding], with a
    full twin target copy (embedding included)."""

    def __init__(self, state_dim: int, n_actions: int, n_opposite: int,
                 d_emb: int = 16, hidden: int = 256, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.n_opposite = n_opposite
        self.d_emb = d_emb
        self.aug_dim = state_dim + d_emb
        store = nn.ParamStore()
        store.add("emb", nn.glorot(rng, n_opposite, d_emb, (n_opposite, d_emb)))
        store.add("w1", nn.glorot(rng, self.aug_dim, hidden, (hidden, self.aug_dim)))
        store.add("b1", np.zeros(hidden))
        store.add("w2", nn.glorot(rng, hidden, n_actions, (n_actions, hidden)))
        store.add("b2", np.zeros(n_actions))
        self.store = store
        self.target_store = store.clone()

    def forward(self, aug, params: nn.ParamStore = None) -> T.Tensor:
        p = params if params is not None else self.store
        h = nn.dense_forward(aug, p["w1"], p["b1"], "tanh")
        return nn.dense_forward(h, p["w2"], p["b2"])

    def q_values(self, s_raw, opp_code, target: bool = False) -> T.Tensor:
        p = self.target_store if target else self.store
        aug = T.concat([T.as_tensor(s_raw), _embed(p["emb"], opp_code)])
        return self.forward(aug, p)

    def sync_target(self) -> None:
        self.target_store.copy_values_from(self.store)


class OppositeEstimator:
    """Two-layer net with softmax head: (state ++ one-hot own act) ->
    distribution over the opposite agent's next act."""

    def __init__(self, state_dim: int, n_target: int, n_opposite: int,
                 hidden: int = 256, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.state_dim = state_dim
        self.n_target = n_target
        self.n_opposite = n_opposite
        d_in = state_dim + n_target
        store = nn.ParamStore()
        store.add("w1", nn.glorot(rng, d_in, hidden, (hidden, d_in)))
        store.add("b1", np.zeros(hidden))
        store.add("w2", nn.glorot(rng, hidden, n_opposite, (n_opposite, hidden)))
        store.add("b2", np.zeros(n_opposite))
        self.store = store

    def forward(self, s_raw, target_act) -> T.Tensor:
        x = np.concatenate([np.asarray(s_raw, dtype=np.float64),
                            nn.one_hot(int(target_act), self.n_target)])
        h = nn.dense_forward(x, self.store["w1"], self.store["b1"], "tanh")
        return T.softmax(nn.dense_forward(h, self.store["w2"], self.store["b2"]))


# ---------------------------------------------------------------------------
# pipeline primitives


def candidate_distribution(state_vec, q: QFunction, placeholder, tau: float) -> T.Tensor:
    """Softmax over own acts from the placeholder-augmented Q-values."""
    if tau <= 0.0:
        raise ValueError(f"temperature must be positive, got {tau}")
    return T.softmax(T.scale(q.q_values(state_vec, int(placeholder)), 1.0 / tau))


def sample_candidate(state_vec, q: QFunction, placeholder, tau: float, rng,
                     greedy: bool = False):
    """Candidate own-action and its distribution. Training mode samples;
    greedy evaluation takes the argmax (ties to the lowest index)."""
    dist = candidate_distribution(state_vec, q, placeholder, tau)
    p = dist.data
    if greedy:
        return int(np.argmax(p)), dist
    return int(rng.choice(len(p), p=p / p.sum())), dist


def estimate_opposite(state_vec, candidate, est: OppositeEstimator):
    """Predicted opposite reaction to the candidate act."""
    dist = est.forward(state_vec, int(candidate))
    return int(np.argmax(dist.data)), dist


def augment_state(state_vec, opp_code, emb: np.ndarray) -> np.ndarray:
    """[state ++ embedding of the predicted opposite act]."""
    emb = np.asarray(emb, dtype=np.float64)
    if isinstance(opp_code, (int, np.integer)):
        suffix = emb[int(opp_code)]
    else:
        suffix = np.asarray(opp_code, dtype=np.float64) @ emb
    return np.concatenate([np.asarray(state_vec, dtype=np.float64), suffix])


def select_action(aug_vec, q: QFunction, epsilon: float, rng) -> int:
    """Epsilon-greedy over Q(aug_vec, .); argmax ties go to the lowest index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0,1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.forward(aug_vec).data))


# ---------------------------------------------------------------------------
# losses


def bellman_target(r: float, s2_aug, done: bool, q: QFunction, gamma_q: float) -> float:
    """y = r + gamma * max_a' Q'(s', a') from the frozen target copy."""
    if done or gamma_q == 0.0:
        return float(r)
    q2 = q.forward(s2_aug, q.target_store)
    return float(r) + gamma_q * float(np.max(q2.data))


def dqn_loss(batch, q: QFunction, gamma_q: float) -> T.Tensor:
    """Mean squared Bellman error over a batch; targets are constants."""
    if not batch:
        raise ValueError("dqn_loss needs a non-empty batch")
    terms = []
    for t in batch:
        s2_aug = augment_state(t.s2, t.opp_code2, q.target_store["emb"].data)
        y = bellman_target(t.r, s2_aug, t.done, q, gamma_q)
        pred = T.pick(q.q_values(t.s, t.opp_code), t.a)
        diff = T.sub(T.as_tensor(y), pred)
        terms.append(T.mul(diff, diff))
    return T.tmean(T.stack(terms))


def reg_loss(cand_dist, executed, beta: float) -> T.Tensor:
    """beta-weighted cross entropy pulling the candidate distribution
    toward the action actually executed."""
    if beta < 0.0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    n = cand_dist.data.shape[0]
    return T.scale(nn.cross_entropy(nn.one_hot(int(executed), n), cand_dist), beta)


def decay_beta(beta: float, gamma_beta: float) -> float:
    if not 0.0 < gamma_beta <= 1.0:
        raise ValueError(f"gamma_beta must be in (0,1], got {gamma_beta}")
    return beta * gamma_beta


def total_loss(l1, l2, w1: float = 1.0, w2: float = 1.0) -> T.Tensor:
    return T.add(T.scale(T.as_tensor(l1), w1), T.scale(T.as_tensor(l2), w2))


# ---------------------------------------------------------------------------
# the policy object


class OppaPolicy:
    """Q-function, estimator, and the act-time pipeline in one place.

    Every consumer (training loop, evaluation, cross-play, the play
    service) selects actions through `act`, so greedy behavior is
    identical everywhere by construction.
    """

    def __init__(self, state_dim: int, n_target: int, n_opposite: int,
                 placeholder: int, config: TrainingConfig):
        config.validate()
        self.config = config
        self.placeholder = int(placeholder)
        self.q = QFunction(state_dim, n_target, n_opposite,
                           d_emb=config.d_emb, hidden=config.hidden,
                           rng=np.random.default_rng([config.seed, 0]))
        # the estimator gets its own init stream so creating (or skipping)
        # it never changes the Q-network draw
        self.est = OppositeEstimator(state_dim, n_target, n_opposite,
                                     hidden=config.est_hidden,
                                     rng=np.random.default_rng([config.seed, 1]))

    def plan(self, state_vec, rng_candidate, greedy: bool = False):
        """Run the estimation pipeline; returns (opp_code, cand_dist)."""
        cfg = self.config
        if not cfg.use_obe:
            return self.placeholder, None
        cand, cand_dist = sample_candidate(state_vec, self.q, self.placeholder,
                                           cfg.tau, rng_candidate, greedy=greedy)
        opp_pred, opp_dist = estimate_opposite(state_vec, cand, self.est)
        if cfg.soft_augment:
            return opp_dist.data.copy(), cand_dist
        return opp_pred, cand_dist

    def act(self, state_vec, epsilon: float, rng_candidate, rng_explore,
            greedy: bool = False):
        """Full pipeline + epsilon-greedy choice.

        Returns (action, opp_code) where opp_code is whatever augmented
        the state (estimated reaction, or the constant placeholder).
        """
        opp_code, _ = self.plan(state_vec, rng_candidate, greedy=greedy)
        aug = augment_state(state_vec, opp_code, self.q.store["emb"].data)
        a = select_action(aug, self.q, 0.0 if greedy else epsilon, rng_explore)
        return a, opp_code


# ---------------------------------------------------------------------------
# training


def train_iteration(env, policy: OppaPolicy, buf: ReplayBuffer, episode_idx: int,
                    rngs: RngBundle, encode=encode_state) -> dict:
    """One episode of interaction plus one update sweep.

    The transition written for turn t keeps the augmentation code used at
    act time for s_t, and receives s_{t+1}'s code when turn t+1 runs its
    own pipeline (terminal states keep the placeholder; their Q-values
    are never evaluated).
    """
    cfg = policy.config
    epsilon = cfg.epsilon_at(episode_idx)
    beta = cfg.beta_at(episode_idx)

    state, _ = env.reset(episode_rng(cfg.seed, episode_idx))
    s = encode(state)
    pending = None
    reg_pairs = []
    est_triples = []
    actions = []
    ep_return, turns, illegal = 0.0, 0, 0
    done = False
    info = {}
    while not done:
        opp_code, _ = policy.plan(s, rngs.candidate)
        a = select_action(augment_state(s, opp_code, policy.q.store["emb"].data),
                          policy.q, epsilon, rngs.explore)
        if pending is not None:
            pending.opp_code2 = opp_code
            buf.push(pending)
        state, r, done, info = env.step(a)
        s2 = encode(state)
        actions.append(a)
        reg_pairs.append((s, a))
        if info.get("opp_act") is not None:
            est_triples.append((s, a, int(info["opp_act"])))
        pending = Transition(s, opp_code, a, float(r), s2, policy.placeholder, done)
        if done:
            buf.push(pending)
            pending = None
        ep_return += float(r)
        turns += 1
        illegal += int(bool(info.get("illegal")))
        s = s2

    stats = {"episode": episode_idx, "return": ep_return, "turns": turns,
             "epsilon": epsilon, "beta": beta, "illegal": illegal,
             "success": bool(info.get("success", False)), "actions": actions,
             "l1": 0.0, "l2": 0.0, "est_loss": 0.0}

    if len(buf) > 0:
        batch = buf.sample(cfg.batch_size, rngs.buffer)
        l1 = dqn_loss(batch, policy.q, cfg.gamma_q)
        stats["l1"] = l1.item()
        pieces = [T.scale(l1, cfg.w1)]
        if cfg.use_action_reg and reg_pairs:
            reg_terms = [reg_loss(candidate_distribution(sv, policy.q,
                                                         policy.placeholder, cfg.tau),
                                  a, beta)
                         for sv, a in reg_pairs]
            l2 = T.tmean(T.stack(reg_terms))
            stats["l2"] = l2.item()
            if not cfg.reg_stop_gradient:
                pieces.append(T.scale(l2, cfg.w2))
        loss = pieces[0] if len(pieces) == 1 else T.add(pieces[0], pieces[1])
        policy.q.store.zero_grads()
        nn.backward(loss)
        nn.adam_step(policy.q.store, lr=cfg.lr)

    if cfg.use_obe and est_triples:
        terms = [nn.cross_entropy(nn.one_hot(opp, policy.est.n_opposite),
                                  policy.est.forward(sv, a))
                 for sv, a, opp in est_triples]
        est_l = T.tmean(T.stack(terms))
        stats["est_loss"] = est_l.item()
        policy.est.store.zero_grads()
        nn.backward(est_l)
        nn.adam_step(policy.est.store, lr=cfg.lr)

    if (episode_idx + 1) % cfg.target_sync == 0:
        policy.q.sync_target()
    return stats


# ---------------------------------------------------------------------------
# pretraining


def pretrain(est: OppositeEstimator, q: QFunction, corpus, config: TrainingConfig,
             placeholder: int, holdout_frac: float = 0.1) -> dict:
    """Supervised estimator training plus imitation for the Q-pipeline.

    corpus: list of (state_vec, expert_act, opposite_next_act) triples
    from scripted-agent rollouts. The estimator learns the opposite
    reaction; Q learns to rank the expert act first through the same
    candidate/estimate/augment pipeline it will use at play time.
    Terminal acts carry None as the reaction and train only the Q side.
    """
    config.validate()
    if not corpus:
        raise ValueError("pretrain needs a non-empty corpus")
    rng = np.random.default_rng([config.seed, 2])
    order = rng.permutation(len(corpus))
    n_hold = max(1, int(len(corpus) * holdout_frac)) if len(corpus) > 1 else 0
    hold = [corpus[i] for i in order[:n_hold]]
    train = [corpus[i] for i in order[n_hold:]] or list(corpus)

    def minibatches(items, bs):
        idx = rng.permutation(len(items))
        for k in range(0, len(idx), bs):
            yield [items[i] for i in idx[k:k + bs]]

    if config.use_obe:
        for _ in range(config.pretrain_epochs):
            for batch in minibatches(train, config.batch_size):
                terms = [nn.cross_entropy(nn.one_hot(opp, est.n_opposite),
                                          est.forward(s, a))
                         for s, a, opp in batch if opp is not None]
                if not terms:
                    continue
                loss = T.tmean(T.stack(terms))
                est.store.zero_grads()
                nn.backward(loss)
                nn.adam_step(est.store, lr=config.lr)

    for _ in range(config.pretrain_epochs):
        for batch in minibatches(train, config.batch_size):
            terms = []
            for s, a, _ in batch:
                if config.use_obe:
                    cand, cand_dist = sample_candidate(s, q, placeholder,
                                                       config.tau, None, greedy=True)
                    opp_pred, opp_dist = estimate_opposite(s, cand, est)
                    if config.soft_augment:
                        opp_pred = opp_dist.data.copy()
                else:
                    cand_dist = None
                    opp_pred = placeholder
                q_out = q.q_values(s, opp_pred)
                term = nn.cross_entropy(nn.one_hot(a, q.n_actions), T.softmax(q_out))
                if config.use_obe and config.use_action_reg:
                    term = T.add(term, reg_loss(cand_dist, a, config.beta0))
                terms.append(term)
            loss = T.tmean(T.stack(terms))
            q.store.zero_grads()
            nn.backward(loss)
            nn.adam_step(q.store, lr=config.lr)
    q.sync_target()

    def accuracy(items):
        if not items:
            return float("nan")
        est_hits, est_n, q_hits = 0, 0, 0
        for s, a, opp in items:
            if config.use_obe:
                if opp is not None:
                    pred, _ = estimate_opposite(s, a, est)
                    est_hits += int(pred == opp)
                    est_n += 1
                cand, _ = sample_candidate(s, q, placeholder, config.tau,
                                           None, greedy=True)
                opp_pred, opp_dist = estimate_opposite(s, cand, est)
                if config.soft_augment:
                    opp_pred = opp_dist.data.copy()
            else:
                opp_pred = placeholder
            q_hits += int(int(np.argmax(q.q_values(s, opp_pred).data)) == a)
        return (est_hits / est_n if est_n else 0.0), q_hits / len(items)

    est_acc, q_acc = accuracy(hold if hold else train)
    return {"estimator_accuracy": est_acc, "q_imitation_accuracy": q_acc,
            "corpus_size": len(corpus), "holdout_size": len(hold)}


# ---------------------------------------------------------------------------
# REINFORCE baseline


class ReinforcePolicy:
    """Two-layer softmax policy over the plain (unaugmented) state."""

    def __init__(self, state_dim: int, n_actions: int, hidden: int = 256, rng=None):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.n_actions = n_actions
        store = nn.ParamStore()
        store.add("w1", nn.glorot(rng, state_dim, hidden, (hidden, state_dim)))
        store.add("b1", np.zeros(hidden))
        store.add("w2", nn.glorot(rng, hidden, n_actions, (n_actions, hidden)))
        store.add("b2", np.zeros(n_actions))
        self.store = store

    def forward(self, s) -> T.Tensor:
        h = nn.dense_forward(s, self.store["w1"], self.store["b1"], "tanh")
        return T.softmax(nn.dense_forward(h, self.store["w2"], self.store["b2"]))

    def act(self, s, rng, greedy: bool = False) -> int:
        p = self.forward(s).data
        if greedy:
            return int(np.argmax(p))
        return int(rng.choice(self.n_actions, p=p / p.sum()))


def reinforce_update(policy: ReinforcePolicy, episode, gamma_q: float,
                     lr: float) -> float:
    """Monte-Carlo policy gradient with the episode-mean return baseline.

    episode: list of (state_vec, action, reward). Returns the loss value.
    """
    if not episode:
        raise ValueError("reinforce_update needs a non-empty episode")
    returns = []
    g = 0.0
    for _, _, r in reversed(episode):
        g = r + gamma_q * g
        returns.append(g)
    returns.reverse()
    baseline = float(np.mean(returns))
    terms = []
    for (s, a, _), g in zip(episode, returns):
        logp = T.log(T.clamp_min(T.pick(policy.forward(s), a), nn.LOG_FLOOR))
        terms.append(T.scale(logp, -(g - baseline)))
    loss = T.tsum(T.stack(terms))
    policy.store.zero_grads()
    nn.backward(loss)
    nn.adam_step(policy.store, lr=lr)
    return loss.item()
