// Typed mirror of the play service's public JSON plus a small fetch
// client. Nothing here interprets game rules; the service is the single
// source of truth and its error details are surfaced verbatim.

export interface ActJson {
  actor: string;
  kind: string;
  args: [string, number][];
}

export interface Standing {
  claims: number[];
  by: string;
}

export interface Scores {
  human: number;
  agent: number;
  pareto: boolean;
}

export interface SessionView {
  id: string;
  status: string;
  whose_turn: string | null;
  counts: number[];
  my_values: number[];
  turns_taken: number;
  max_turns: number;
  standing: Standing | null;
  transcript: ActJson[];
  scores: Scores | null;
  agent_reply?: ActJson | null;
}

export interface ScenarioIn {
  counts: number[];
  my_values: number[];
  agent_values: number[];
}

export interface StartBody {
  seed?: number;
  scenario?: ScenarioIn;
  first_mover?: "human" | "agent";
}

// the worked three-books/one-hat/one-ball split from the docs
export const DEMO_SCENARIO: ScenarioIn = {
  counts: [3, 1, 1],
  my_values: [0, 6, 4],
  agent_values: [1, 4, 3],
};

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface PlayApi {
  health(): Promise<{ status: string; sessions: number }>;
  startSession(body: StartBody): Promise<SessionView>;
  submitAct(id: string, kind: string,
            args: [string, number][]): Promise<SessionView>;
  getSession(id: string): Promise<SessionView>;
  getActions(id: string): Promise<ActJson[]>;
}

export class PlayServiceClient implements PlayApi {
  constructor(public baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const resp = await fetch(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const detail = typeof body?.detail === "string"
        ? body.detail : JSON.stringify(body?.detail ?? body);
      throw new ApiError(resp.status, detail);
    }
    return body;
  }

  private post(path: string, body: unknown): Promise<any> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request("/healthz");
  }

  startSession(body: StartBody): Promise<SessionView> {
    return this.post("/sessions", body);
  }

  submitAct(id: string, kind: string,
            args: [string, number][]): Promise<SessionView> {
    return this.post(`/sessions/${id}/acts`, { kind, args });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  async getActions(id: string): Promise<ActJson[]> {
    const body = await this.request(`/sessions/${id}/actions`);
    return body.actions;
  }
}
