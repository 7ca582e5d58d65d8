"""Interactive play service: HTTP/JSON sessions where a person negotiates
against a loaded policy. Sessions live in memory behind per-session locks,
expire after idling, and never expose the agent's private values."""

from __future__ import annotations

import copy
import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .domain import DialogueAct, Scenario, encode_state, enumerate_actions
from .envs.negotiation import (IllegalAct, NegotiationGame, nego_new,
                               nego_score, nego_step, pareto_optimal)
from .harness import ExperimentConfig, build_policy, greedy_action

IDLE_SECONDS = 30 * 60
HUMAN, AGENT = "a", "b"
SIDE_NAMES = {HUMAN: "human", AGENT: "agent"}


class ScenarioBody(BaseModel):
    counts: list
    my_values: list
    agent_values: list


class SessionBody(BaseModel):
    seed: int = 0
    scenario: Optional[ScenarioBody] = None
    first_mover: Optional[str] = None  # "human" or "agent"; default coin flip
    checkpoint: str = "default"


class ActBody(BaseModel):
    actor: str = "human"
    kind: str
    args: list = []


@dataclass
class Session:
    id: str
    game: NegotiationGame
    checkpoint: str
    transcript: list = field(default_factory=list)  # (side name, DialogueAct)
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_touch: float = field(default_factory=time.monotonic)


def new_game(config: ExperimentConfig, seed: int = 0, scenario=None,
             first_mover=None):
    """Game plus opening side, reproducible from the seed alone.

    The same construction backs POST /sessions, so a scripted client
    and a direct library loop see identical games for equal seeds.
    """
    env_cfg = config.env_config()
    rng = np.random.default_rng([seed, 13])
    if scenario is None:
        game = nego_new(rng, env_cfg)
    else:
        for cap, count in zip(env_cfg.item_caps, scenario.counts):
            if count > cap:
                raise ValueError(f"scenario counts {scenario.counts} exceed "
                                 f"the configured caps {tuple(env_cfg.item_caps)}")
        game = NegotiationGame(env_cfg, scenario.validate(env_cfg.total_value))
    if first_mover is None:
        first_mover = SIDE_NAMES[HUMAN] if rng.integers(2) == 0 \
            else SIDE_NAMES[AGENT]
    sides = {name: side for side, name in SIDE_NAMES.items()}
    if first_mover not in sides:
        raise ValueError(f"first_mover must be one of {sorted(sides)}")
    game.mover = sides[first_mover]
    return game


def act_json(actor: str, act: DialogueAct) -> dict:
    return {"actor": actor, "kind": act.kind,
            "args": [[k, v] for k, v in act.args]}


def parse_act(body: ActBody) -> DialogueAct:
    try:
        args = tuple((str(k), int(v)) for k, v in body.args)
    except (TypeError, ValueError) as e:
        raise IllegalAct(f"args must be [name, count] pairs: {e}") from e
    return DialogueAct("human", str(body.kind), args)


def legal_for_human(game: NegotiationGame, catalog) -> list:
    """Exactly the catalog acts nego_step would accept right now."""
    if game.done or game.mover != HUMAN:
        return []
    acts = []
    for act in catalog:
        try:
            nego_step(copy.deepcopy(game), act)
        except IllegalAct:
            continue
        acts.append(act)
    return acts


def create_app(config: ExperimentConfig, policy=None,
               idle_seconds: float = IDLE_SECONDS,
               transcript_dir=None) -> FastAPI:
    config.validate()
    if config.env != "negotiation":
        raise ValueError("the play service hosts the negotiation env only")
    env_cfg = config.env_config()
    catalog = enumerate_actions(env_cfg, role="target")
    checkpoints = {"default": policy if policy is not None
                   else build_policy(config)}
    sessions: dict = {}
    registry_lock = threading.Lock()

    app = FastAPI(title="negotiation play service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    def get_session(sid: str) -> Session:
        now = time.monotonic()
        with registry_lock:
            for stale in [k for k, s in sessions.items()
                          if now - s.last_touch > idle_seconds]:
                del sessions[stale]
            sess = sessions.get(sid)
            if sess is None:
                raise HTTPException(404, f"unknown session {sid!r}")
            sess.last_touch = now
            return sess

    def view(sess: Session) -> dict:
        game = sess.game
        standing = None
        if game.standing is not None:
            claims, owner = game.standing
            standing = {"claims": list(claims), "by": SIDE_NAMES[owner]}
        scores = None
        if game.done:
            human, agent = nego_score(game, HUMAN), nego_score(game, AGENT)
            scores = {"human": human, "agent": agent,
                      "pareto": bool(game.status == "agreed"
                                     and pareto_optimal(game.scenario,
                                                        human, agent))}
        return {"id": sess.id,
                "status": game.status,
                "whose_turn": None if game.done else SIDE_NAMES[game.mover],
                "counts": list(game.scenario.counts),
                "my_values": list(game.scenario.values_of(HUMAN)),
                "turns_taken": game.turns_taken,
                "max_turns": env_cfg.max_turns,
                "standing": standing,
                "transcript": [act_json(actor, act)
                               for actor, act in sess.transcript],
                "scores": scores}

    def agent_reply(sess: Session) -> DialogueAct:
        policy = checkpoints[sess.checkpoint]
        idx = greedy_action(policy, encode_state(sess.game.states[AGENT]))
        act = catalog[int(idx)]
        try:
            nego_step(sess.game, act)
        except IllegalAct:
            # mirror the training envs: an off-rules move lands as a greet
            act = DialogueAct("opposite", "greet")
            nego_step(sess.game, act)
        sess.transcript.append((SIDE_NAMES[AGENT], act))
        return act

    def maybe_dump(sess: Session) -> None:
        if transcript_dir is None or not sess.game.done:
            return
        human, agent = nego_score(sess.game, HUMAN), nego_score(sess.game, AGENT)
        row = {"id": sess.id, "status": sess.game.status,
               "counts": list(sess.game.scenario.counts),
               "scores": {"human": human, "agent": agent},
               "transcript": [act_json(actor, act)
                              for actor, act in sess.transcript]}
        path = Path(transcript_dir)
        path.mkdir(parents=True, exist_ok=True)
        with (path / "sessions.jsonl").open("a") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    @app.get("/healthz")
    def healthz():
        with registry_lock:
            return {"status": "ok", "sessions": len(sessions)}

    @app.post("/sessions")
    def create_session(body: SessionBody):
        if body.checkpoint not in checkpoints:
            raise HTTPException(404, f"unknown checkpoint {body.checkpoint!r}")
        scenario = None
        if body.scenario is not None:
            scenario = Scenario(tuple(body.scenario.counts),
                                tuple(body.scenario.my_values),
                                tuple(body.scenario.agent_values))
        try:
            game = new_game(config, seed=body.seed, scenario=scenario,
                            first_mover=body.first_mover)
        except ValueError as e:
            raise HTTPException(422, str(e)) from e
        sess = Session(id=secrets.token_hex(8), game=game,
                       checkpoint=body.checkpoint)
        with sess.lock:
            with registry_lock:
                sessions[sess.id] = sess
            if game.mover == AGENT:
                agent_reply(sess)
            return view(sess)

    @app.post("/sessions/{sid}/acts")
    def post_act(sid: str, body: ActBody):
        sess = get_session(sid)
        with sess.lock:
            if sess.game.done:
                raise HTTPException(
                    409, f"session finished ({sess.game.status})")
            if sess.game.mover != HUMAN:
                raise HTTPException(409, "not your turn")
            # trial-apply on a copy so a rejected act changes nothing
            trial = copy.deepcopy(sess.game)
            try:
                act = parse_act(body)
                nego_step(trial, act)
            except IllegalAct as e:
                raise HTTPException(422, str(e)) from e
            sess.game = trial
            sess.transcript.append((SIDE_NAMES[HUMAN], act))
            reply = None
            if not sess.game.done:
                reply = agent_reply(sess)
            maybe_dump(sess)
            out = view(sess)
            out["agent_reply"] = None if reply is None \
                else act_json(SIDE_NAMES[AGENT], reply)
            return out

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        sess = get_session(sid)
        with sess.lock:
            return view(sess)

    @app.get("/sessions/{sid}/actions")
    def list_actions(sid: str):
        sess = get_session(sid)
        with sess.lock:
            return {"actions": [act_json(SIDE_NAMES[HUMAN], act)
                                for act in legal_for_human(sess.game, catalog)]}

    return app
