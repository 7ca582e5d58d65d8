// Controller and renderer against a stubbed service: the DOM is a pure
// function of the last response, legal actions mirror the service list,
// steppers clamp, rejections render verbatim, and an in-flight request
// both disables inputs and absorbs the second click of a double-click.

import { beforeEach, describe, expect, it } from "vitest";

import { ActJson, ApiError, DEMO_SCENARIO, PlayApi, SessionView } from "../src/api.js";
import { App } from "../src/app.js";
import { clampDraft, emptyState, render } from "../src/ui.js";

function view(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "s1",
    status: "running",
    whose_turn: "human",
    counts: [3, 1, 1],
    my_values: [0, 6, 4],
    turns_taken: 0,
    max_turns: 10,
    standing: null,
    transcript: [],
    scores: null,
    ...overrides,
  };
}

const LEGAL: ActJson[] = [
  { actor: "human", kind: "propose", args: [["book", 0], ["hat", 1], ["ball", 1]] },
  { actor: "human", kind: "agree", args: [] },
  { actor: "human", kind: "greet", args: [] },
];

class StubApi implements PlayApi {
  views: SessionView[] = [];
  actions: ActJson[] = LEGAL;
  submitted: { kind: string; args: [string, number][] }[] = [];
  started: unknown[] = [];
  failWith: Error | null = null;
  gate: Promise<void> | null = null;

  async health() {
    return { status: "ok", sessions: 0 };
  }

  async startSession(body: unknown): Promise<SessionView> {
    this.started.push(body);
    if (this.failWith) throw this.failWith;
    return this.views.shift()!;
  }

  async submitAct(_id: string, kind: string,
                  args: [string, number][]): Promise<SessionView> {
    this.submitted.push({ kind, args });
    if (this.gate) await this.gate;
    if (this.failWith) throw this.failWith;
    return this.views.shift()!;
  }

  async getSession(): Promise<SessionView> {
    return this.views.shift()!;
  }

  async getActions(): Promise<ActJson[]> {
    return this.actions;
  }
}

let root: HTMLElement;
let api: StubApi;
let app: App;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  api = new StubApi();
  app = new App(api, root);
});

function click(id: string): void {
  const el = root.querySelector<HTMLElement>(`#${id}`);
  expect(el, `#${id} should be rendered`).not.toBeNull();
  el!.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

describe("session start", () => {
  it("renders the context panel before any move", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    const rows = root.querySelectorAll("#context .item-row");
    expect(rows).toHaveLength(3);
    const texts = [...rows].map((r) => r.textContent!.replace(/\s+/g, " ").trim());
    expect(texts).toEqual(["book 3 0", "hat 1 6", "ball 1 4"]);
  });

  it("demo button starts a session with the demo scenario", async () => {
    api.views = [view()];
    click("demo");
    await Promise.resolve();
    expect(api.started).toEqual([{ scenario: DEMO_SCENARIO }]);
  });

  it("shows a banner when the service is unreachable", async () => {
    api.failWith = new TypeError("fetch failed");
    await app.start({ seed: 0 });
    expect(app.state.phase).toBe("error");
    expect(root.querySelector("#banner")!.textContent).toContain("service unreachable");
    expect(root.querySelector("#start")).not.toBeNull();
  });

  it("never renders agent values in any state", async () => {
    api.views = [view()];
    await app.start({ scenario: DEMO_SCENARIO });
    const playing = root.innerHTML;
    api.views = [view({ status: "agreed", whose_turn: null,
                        scores: { human: 10, agent: 3, pareto: true } })];
    await app.submit("agree", []);
    const finished = root.innerHTML;
    for (const html of [playing, finished]) {
      expect(html).not.toContain("agent_values");
      expect(html).not.toMatch(/worth to (the )?agent/);
    }
    // one value column only: the human's
    expect(playing.match(/worth to me/g)).toHaveLength(1);
  });
});

describe("legal actions", () => {
  it("mirrors the service list exactly", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    const items = [...root.querySelectorAll("#legal li")];
    const rendered = items.map((li) => ({
      kind: li.getAttribute("data-kind"),
      args: JSON.parse(li.getAttribute("data-args")!),
    }));
    expect(rendered).toEqual(LEGAL.map(({ kind, args }) => ({ kind, args })));
  });

  it("disables control buttons the service does not list", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    expect(root.querySelector<HTMLButtonElement>("#act-agree")!.disabled).toBe(false);
    expect(root.querySelector<HTMLButtonElement>("#act-disagree")!.disabled).toBe(true);
    expect(root.querySelector<HTMLButtonElement>("#act-end")!.disabled).toBe(true);
  });
});

describe("proposal steppers", () => {
  it("clamps between zero and the item count", () => {
    expect(clampDraft([5, -2, 1.6], [3, 1, 1])).toEqual([3, 0, 1]);
  });

  it("clicking the steppers cannot leave the valid range", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    for (let i = 0; i < 6; i++) click("inc-1");
    expect(root.querySelector("#count-1")!.textContent).toBe("1");
    for (let i = 0; i < 6; i++) click("dec-1");
    expect(root.querySelector("#count-1")!.textContent).toBe("0");
  });

  it("propose submits the drafted claims", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    click("inc-1");
    click("inc-2");
    api.views = [view({ turns_taken: 2 })];
    click("act-propose");
    await Promise.resolve();
    expect(api.submitted).toEqual([
      { kind: "propose", args: [["book", 0], ["hat", 1], ["ball", 1]] },
    ]);
  });
});

describe("submitting acts", () => {
  it("appends my act and the agent reply from the response", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    const played: ActJson[] = [
      { actor: "human", kind: "propose", args: [["book", 0], ["hat", 1], ["ball", 1]] },
      { actor: "agent", kind: "greet", args: [] },
    ];
    api.views = [view({ transcript: played, turns_taken: 2 })];
    await app.submit("propose", [["book", 0], ["hat", 1], ["ball", 1]]);
    const lines = [...root.querySelectorAll("#transcript li")]
      .map((li) => li.textContent);
    expect(lines).toEqual(["human: propose book=0 hat=1 ball=1", "agent: greet"]);
  });

  it("renders a rule rejection verbatim and keeps the session", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    api.failWith = new ApiError(422, "cannot claim 3 of book, only 1 available");
    await app.submit("propose", [["book", 3], ["hat", 0], ["ball", 0]]);
    expect(root.querySelector("#rejection")!.textContent!.trim())
      .toBe("cannot claim 3 of book, only 1 available");
    expect(app.state.phase).toBe("playing");
    expect(root.querySelector("#controls")).not.toBeNull();
  });

  it("shows the score card when the session finishes", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    api.views = [view({ status: "agreed", whose_turn: null, turns_taken: 2,
                        scores: { human: 10, agent: 3, pareto: true } })];
    await app.submit("agree", []);
    expect(root.querySelector("#score-human")!.textContent).toBe("10");
    expect(root.querySelector("#score-agent")!.textContent).toBe("3");
    expect(root.querySelector("#score-pareto")!.textContent).toContain("no split could improve");
    expect(root.querySelector("#controls")).toBeNull();
  });
});

describe("request discipline", () => {
  it("a double-click submits exactly one act", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    let release!: () => void;
    api.gate = new Promise((resolve) => { release = resolve; });
    api.views = [view({ turns_taken: 2 })];
    click("act-agree");
    click("act-agree");
    release();
    await Promise.resolve();
    await Promise.resolve();
    expect(api.submitted).toHaveLength(1);
  });

  it("disables every input while a request is in flight", async () => {
    api.views = [view()];
    await app.start({ seed: 0 });
    let release!: () => void;
    api.gate = new Promise((resolve) => { release = resolve; });
    api.views = [view({ turns_taken: 2 })];
    click("act-greet");
    const buttons = [...root.querySelectorAll<HTMLButtonElement>("#controls button")];
    expect(buttons.length).toBeGreaterThan(0);
    expect(buttons.every((b) => b.disabled)).toBe(true);
    release();
  });
});

describe("rendering", () => {
  it("is a pure function of the state", () => {
    const playing = { ...emptyState(), phase: "playing" as const,
                      view: view(), actions: LEGAL };
    render(root, playing);
    const first = root.innerHTML;
    render(root, playing);
    expect(root.innerHTML).toBe(first);
    render(root, emptyState());
    render(root, playing);
    expect(root.innerHTML).toBe(first);
  });
});
