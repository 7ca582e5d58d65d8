"""
One bargaining session over the HTTP service
============================================

The play service wraps a policy in a small JSON API so a person (or a
browser UI) can negotiate against it. This walk drives one session
entirely through the endpoints, in process via a test client, playing
the worked three-books/one-hat/one-ball split. The "human" side follows
a simple plan: claim the hat and the ball (worth 10 of 10 to this side),
and accept any standing offer worth at least 7.

Everything visible here is exactly what a remote client sees; in
particular the agent's private values never appear in any response.

A supervised warm start (no RL) is enough for the agent to make and
accept offers; serving a fully trained checkpoint works the same way.
"""

from fastapi.testclient import TestClient

from oppa.harness import ExperimentConfig, run_pretrain
from oppa.service import create_app

config = ExperimentConfig(env="negotiation", state_dim=64,
                          item_caps=(4, 4, 4), max_turns=10,
                          hidden=32, est_hidden=32, d_emb=8,
                          corpus_episodes=300, pretrain_epochs=3)
policy, report = run_pretrain(config)
print(f"warm start: imitates the scripted bargainer on "
      f"{report['q_imitation_accuracy']:.0%} of held-out turns")

http = TestClient(create_app(config, policy=policy))
print("health:", http.get("/healthz").json())

scenario = {"counts": [3, 1, 1], "my_values": [0, 6, 4],
            "agent_values": [1, 4, 3]}
view = http.post("/sessions", json={"scenario": scenario,
                                    "first_mover": "human"}).json()
sid = view["id"]
print(f"\nsession {sid}: counts {view['counts']}, "
      f"my values {view['my_values']}, {view['max_turns']} turns max")

names = ("book", "hat", "ball")


def worth(claims) -> int:
    mine = [c - claim for c, claim in zip(view["counts"], claims)]
    return sum(v * m for v, m in zip(view["my_values"], mine))


while view["status"] == "running":
    standing = view["standing"]
    if standing and standing["by"] == "agent" and worth(standing["claims"]) >= 7:
        body = {"kind": "agree", "args": []}
    else:
        body = {"kind": "propose",
                "args": [["book", 0], ["hat", 1], ["ball", 1]]}
    resp = http.post(f"/sessions/{sid}/acts", json=body)
    if resp.status_code != 200:
        print("rejected:", resp.json()["detail"])
        break
    view = resp.json()
    reply = view["agent_reply"]
    print(f"  me:    {body['kind']} "
          f"{dict((k, v) for k, v in body['args']) if body['args'] else ''}")
    if reply is not None:
        print(f"  agent: {reply['kind']} "
              f"{dict(reply['args']) if reply['args'] else ''}")

print(f"\nfinal status: {view['status']} after {view['turns_taken']} turns")
if view["scores"]:
    s = view["scores"]
    print(f"scores: me {s['human']}, agent {s['agent']}, "
          f"pareto optimal: {s['pareto']}")

done = http.get(f"/sessions/{sid}/actions").json()["actions"]
print(f"legal actions once finished: {done}")
print(f"transcript length: {len(view['transcript'])} acts")
