// Controller: one active session per tab, every mutation goes through
// submitAct, and an in-flight request both disables the inputs and
// swallows repeat clicks so a double-click submits exactly one act.

import { ApiError, DEMO_SCENARIO, PlayApi, SessionView,
         StartBody } from "./api.js";
import { ITEM_NAMES, UiState, clampDraft, emptyState, render } from "./ui.js";

export class App {
  state: UiState = emptyState();

  constructor(private api: PlayApi, private root: HTMLElement) {
    root.addEventListener("click", (event) => this.onClick(event));
    this.render();
  }

  render(): void {
    render(this.root, this.state);
  }

  private onClick(event: Event): void {
    const id = (event.target as HTMLElement)?.id;
    if (!id) return;
    if (id === "start") void this.start({ seed: this.seedInput() });
    else if (id === "demo") void this.start({ scenario: DEMO_SCENARIO });
    else if (id.startsWith("inc-")) this.bump(Number(id.slice(4)), +1);
    else if (id.startsWith("dec-")) this.bump(Number(id.slice(4)), -1);
    else if (id === "act-propose") void this.submit("propose", this.draftArgs());
    else if (id.startsWith("act-")) void this.submit(id.slice(4), []);
  }

  private seedInput(): number {
    const input = this.root.querySelector<HTMLInputElement>("#seed");
    return input ? Number(input.value) || 0 : 0;
  }

  private draftArgs(): [string, number][] {
    return ITEM_NAMES.map((name, i) => [name, this.state.draft[i]]);
  }

  bump(index: number, delta: number): void {
    if (!this.state.view) return;
    const draft = [...this.state.draft];
    draft[index] += delta;
    this.state.draft = clampDraft(draft, this.state.view.counts);
    this.render();
  }

  private async refresh(view: SessionView): Promise<void> {
    this.state.view = view;
    this.state.phase = view.status === "running" ? "playing" : "finished";
    this.state.actions = view.status === "running"
      ? await this.api.getActions(view.id) : [];
  }

  async start(body: StartBody): Promise<void> {
    if (this.state.inFlight || this.state.phase === "playing") return;
    this.state = { ...emptyState(), inFlight: true, phase: "idle" };
    this.render();
    try {
      await this.refresh(await this.api.startSession(body));
      if (this.state.view) {
        this.state.draft = clampDraft(this.state.draft, this.state.view.counts);
      }
    } catch (error) {
      this.state.phase = "error";
      this.state.banner = error instanceof ApiError
        ? error.detail : `service unreachable: ${String(error)}`;
    } finally {
      this.state.inFlight = false;
      this.render();
    }
  }

  async submit(kind: string, args: [string, number][]): Promise<void> {
    if (this.state.inFlight || this.state.phase !== "playing") return;
    if (!this.state.view) return;
    this.state.inFlight = true;
    this.render();
    try {
      await this.refresh(await this.api.submitAct(this.state.view.id, kind, args));
      this.state.rejection = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        // rule violation: session unchanged, show the reason verbatim
        this.state.rejection = error.detail;
      } else {
        this.state.phase = "error";
        this.state.banner = error instanceof ApiError
          ? error.detail : `service unreachable: ${String(error)}`;
      }
    } finally {
      this.state.inFlight = false;
      this.render();
    }
  }
}
