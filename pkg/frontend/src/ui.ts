// Rendering is a pure function of (last service response, proposal
// draft, request-in-flight flag). No game rules live here: the legal
// list is the service's own, rejections render verbatim, and the only
// client-side arithmetic is clamping the proposal steppers.

import { ActJson, SessionView } from "./api.js";

export const ITEM_NAMES = ["book", "hat", "ball"];

export type Phase = "idle" | "playing" | "finished" | "error";

export interface UiState {
  phase: Phase;
  view: SessionView | null;
  actions: ActJson[];
  draft: number[];
  banner: string | null;
  rejection: string | null;
  inFlight: boolean;
}

export function emptyState(): UiState {
  return { phase: "idle", view: null, actions: [], draft: [0, 0, 0],
           banner: null, rejection: null, inFlight: false };
}

// the one allowed piece of input logic: keep claims inside 0..count
export function clampDraft(draft: number[], counts: number[]): number[] {
  return counts.map((cap, i) =>
    Math.min(cap, Math.max(0, Math.round(draft[i] ?? 0))));
}

export function formatAct(act: ActJson): string {
  const args = act.args.map(([k, v]) => `${k}=${v}`).join(" ");
  return args ? `${act.actor}: ${act.kind} ${args}` : `${act.actor}: ${act.kind}`;
}

function esc(text: unknown): string {
  return String(text)
    .replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;").replace(/'/g, "&#39;");
}

function contextPanel(view: SessionView): string {
  const rows = ITEM_NAMES.map((name, i) => `
    <tr class="item-row" data-item="${name}">
      <td>${name}</td>
      <td class="count">${view.counts[i]}</td>
      <td class="value">${view.my_values[i]}</td>
    </tr>`).join("");
  return `
  <table id="context">
    <thead><tr><th>item</th><th>count</th><th>worth to me</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

function statusLine(state: UiState): string {
  const view = state.view!;
  const turn = view.whose_turn === null
    ? "over" : view.whose_turn === "human" ? "your move" : "agent is moving";
  return `
  <p id="status">
    ${esc(view.status)} | turn ${view.turns_taken} of ${view.max_turns} | ${turn}
  </p>`;
}

function transcript(view: SessionView): string {
  const rows = view.transcript
    .map((act) => `<li>${esc(formatAct(act))}</li>`).join("");
  return `<ol id="transcript">${rows}</ol>`;
}

function standing(view: SessionView): string {
  if (!view.standing) return "";
  const claims = view.standing.claims
    .map((c, i) => `${ITEM_NAMES[i]}=${c}`).join(" ");
  return `<p id="standing">standing proposal by ${esc(view.standing.by)}:
    they take ${esc(claims)}</p>`;
}

function steppers(state: UiState): string {
  const view = state.view!;
  const off = state.inFlight || view.whose_turn !== "human";
  const dis = off ? "disabled" : "";
  const rows = ITEM_NAMES.map((name, i) => `
    <div class="stepper" data-item="${name}">
      <span>${name}</span>
      <button id="dec-${i}" ${dis}>-</button>
      <span id="count-${i}" class="draft">${state.draft[i]}</span>
      <button id="inc-${i}" ${dis}>+</button>
      <span class="cap">of ${view.counts[i]}</span>
    </div>`).join("");

  const legalKinds = new Set(state.actions.map((a) => a.kind));
  const control = (kind: string) => {
    const enabled = !off && legalKinds.has(kind);
    return `<button id="act-${kind}" ${enabled ? "" : "disabled"}>${kind}</button>`;
  };
  return `
  <div id="controls">
    <div id="proposal">${rows}${control("propose")}</div>
    ${control("agree")}${control("disagree")}${control("end")}${control("greet")}
  </div>`;
}

function legalList(state: UiState): string {
  const rows = state.actions.map((act) => `
    <li data-kind="${esc(act.kind)}"
        data-args='${esc(JSON.stringify(act.args))}'>${esc(formatAct(act))}</li>`)
    .join("");
  return `<ul id="legal">${rows}</ul>`;
}

function scorecard(view: SessionView): string {
  if (!view.scores) return "";
  const s = view.scores;
  return `
  <div id="scorecard">
    <p>final: you scored <span id="score-human">${s.human}</span>,
       the agent scored <span id="score-agent">${s.agent}</span></p>
    <p id="score-pareto">${s.pareto
      ? "no split could improve one side without hurting the other"
      : "a better split existed for at least one side"}</p>
  </div>`;
}

export function render(root: HTMLElement, state: UiState): void {
  const parts: string[] = [];
  if (state.banner) {
    parts.push(`<div id="banner">${esc(state.banner)}</div>`);
  }
  if (state.phase === "idle" || state.phase === "error") {
    parts.push(`
    <div id="setup">
      <label>seed <input id="seed" type="number" value="0"></label>
      <button id="start">start a random split</button>
      <button id="demo">play the demo split</button>
    </div>`);
  }
  if (state.view) {
    parts.push(contextPanel(state.view));
    parts.push(statusLine(state));
    parts.push(transcript(state.view));
    parts.push(standing(state.view));
    if (state.rejection) {
      parts.push(`<p id="rejection">${esc(state.rejection)}</p>`);
    }
    if (state.phase === "playing") {
      parts.push(steppers(state));
    }
    parts.push(legalList(state));
    if (state.phase === "finished") {
      parts.push(scorecard(state.view));
    }
  }
  root.innerHTML = parts.join("\n");
}
