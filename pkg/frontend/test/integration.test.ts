// End-to-end against the real play service: a scripted browser session
// plays the demo scenario to agreement, the rendered scores match the
// service's own view, the agent's private values never reach the DOM,
// and a double-click turns into exactly one act request on the wire.
//
// The server warms up a supervised policy on boot, so the first hook
// takes about a minute.

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { DEMO_SCENARIO, PlayServiceClient } from "../src/api.js";
import { App } from "../src/app.js";

const PORT = 8731;
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER = `
from oppa.harness import ExperimentConfig, run_pretrain
from oppa.service import create_app
import uvicorn

cfg = ExperimentConfig(env="negotiation", state_dim=64, item_caps=(4, 4, 4),
                       max_turns=10, hidden=32, est_hidden=32, d_emb=8,
                       corpus_episodes=300, pretrain_epochs=3)
policy, _ = run_pretrain(cfg)
uvicorn.run(create_app(cfg, policy=policy), host="127.0.0.1", port=${PORT},
            log_level="warning")
`;

let server: ChildProcess;
let serverLog = "";

async function waitForHealth(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/healthz`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error(`service did not come up: ${serverLog}`);
}

beforeAll(async () => {
  server = spawn("python3", ["-c", SERVER], { stdio: ["ignore", "pipe", "pipe"] });
  server.stdout!.on("data", (chunk) => { serverLog += chunk; });
  server.stderr!.on("data", (chunk) => { serverLog += chunk; });
  await waitForHealth(220_000);
});

afterAll(() => {
  server?.kill();
});

function freshApp(): { app: App; root: HTMLElement } {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const app = new App(new PlayServiceClient(BASE), root);
  return { app, root };
}

function click(root: HTMLElement, id: string): void {
  const el = root.querySelector<HTMLElement>(`#${id}`);
  expect(el, `#${id} should be rendered`).not.toBeNull();
  el!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

async function waitUntil(check: () => boolean, what: string): Promise<void> {
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  throw new Error(`timed out waiting for ${what}`);
}

function assertNoAgentValues(html: string): void {
  expect(html).not.toContain("agent_values");
  // the context table is the only place item values render, and its
  // value column must be the human's numbers from the demo scenario
  const cells = [...html.matchAll(/class="value">(\d+)</g)].map((m) => m[1]);
  if (cells.length > 0) {
    expect(cells).toEqual(["0", "6", "4"]);
  }
}

describe("scripted session against the live service", () => {
  it("plays the demo split to agreement and renders the service scores",
     async () => {
    const { app, root } = freshApp();
    const snapshots: string[] = [];
    const snap = () => snapshots.push(root.innerHTML);

    click(root, "demo");
    await waitUntil(() => !app.state.inFlight && app.state.view !== null,
                    "session to start");
    snap();
    expect(root.querySelectorAll("#context .item-row")).toHaveLength(3);

    // plan: claim the hat and the ball; accept any standing offer
    // worth at least 7 of my 10
    for (let step = 0; step < 12 && app.state.phase === "playing"; step++) {
      const view = app.state.view!;
      if (view.whose_turn !== "human") break;
      const standing = view.standing;
      const keptValue = standing === null ? -1
        : view.counts.reduce((sum, count, i) =>
            sum + (count - standing.claims[i]) * view.my_values[i], 0);
      const before = view.transcript.length;
      if (standing !== null && standing.by === "agent" && keptValue >= 7) {
        click(root, "act-agree");
      } else {
        while (Number(root.querySelector("#count-1")!.textContent) < 1) {
          click(root, "inc-1");
        }
        while (Number(root.querySelector("#count-2")!.textContent) < 1) {
          click(root, "inc-2");
        }
        click(root, "act-propose");
      }
      await waitUntil(
        () => !app.state.inFlight
          && (app.state.phase !== "playing"
              || app.state.view!.transcript.length > before),
        "the move to land");
      snap();
    }

    expect(app.state.phase).toBe("finished");
    expect(app.state.view!.status).toBe("agreed");

    // rendered scores must be the service's own numbers
    const direct = await new PlayServiceClient(BASE).getSession(app.state.view!.id);
    expect(direct.scores).not.toBeNull();
    expect(root.querySelector("#score-human")!.textContent)
      .toBe(String(direct.scores!.human));
    expect(root.querySelector("#score-agent")!.textContent)
      .toBe(String(direct.scores!.agent));
    expect(app.state.view!.scores).toEqual(direct.scores);

    // the demo split has a known best outcome for this plan
    expect(direct.scores!.human).toBe(10);
    expect(direct.scores!.agent).toBe(3);
    expect(direct.scores!.pareto).toBe(true);

    snap();
    for (const html of snapshots) assertNoAgentValues(html);

    // finished sessions list no legal actions either
    const actions = await new PlayServiceClient(BASE)
      .getActions(app.state.view!.id);
    expect(actions).toEqual([]);
    expect(root.querySelectorAll("#legal li")).toHaveLength(0);
  });

  it("legal actions rendered mid-session equal the service list", async () => {
    const { app, root } = freshApp();
    await app.start({ scenario: DEMO_SCENARIO, first_mover: "human" });
    const listed = await new PlayServiceClient(BASE)
      .getActions(app.state.view!.id);
    const rendered = [...root.querySelectorAll("#legal li")].map((li) => ({
      kind: li.getAttribute("data-kind"),
      args: JSON.parse(li.getAttribute("data-args")!),
    }));
    expect(rendered).toEqual(listed.map(({ kind, args }) => ({ kind, args })));
    expect(rendered.length).toBeGreaterThan(0);
  });

  it("a double-click puts exactly one act on the wire", async () => {
    const counted = globalThis.fetch;
    let actPosts = 0;
    globalThis.fetch = async (input: any, init?: any) => {
      if (String(input).endsWith("/acts") && init?.method === "POST") {
        actPosts += 1;
      }
      return counted(input, init);
    };
    try {
      const { app, root } = freshApp();
      await app.start({ scenario: DEMO_SCENARIO, first_mover: "human" });
      expect(app.state.view!.whose_turn).toBe("human");

      click(root, "act-greet");
      click(root, "act-greet");
      await waitUntil(() => !app.state.inFlight
        && app.state.view!.transcript.length >= 2, "the greet to land");
      expect(actPosts).toBe(1);

      if (app.state.phase === "playing") {
        click(root, "act-greet");
        await waitUntil(() => !app.state.inFlight, "the second greet");
        expect(actPosts).toBe(2);
      }
    } finally {
      globalThis.fetch = counted;
    }
  });
});
