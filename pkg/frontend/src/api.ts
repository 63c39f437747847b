// Thin typed client over the session service HTTP endpoints.

import type {
  ActionBody,
  CreateSessionResponse,
  EventsResponse,
  ViewResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
    public retriable = false,
  ) {
    super(message);
  }
}

async function check(res: Response): Promise<any> {
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    const detail = body?.detail;
    const msg =
      typeof detail === "string" ? detail : (detail?.error ?? res.statusText);
    throw new ApiError(msg, res.status, Boolean(detail?.retriable));
  }
  return body;
}

export class Client {
  constructor(private base: string = "") {}

  async createSession(body: {
    task: string;
    seed?: number;
    roles?: Record<string, string>;
    agent_seed?: number;
  }): Promise<CreateSessionResponse> {
    const res = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return check(res);
  }

  async view(sessionId: string, token: string): Promise<ViewResponse> {
    const res = await fetch(
      `${this.base}/sessions/${sessionId}/view?token=${encodeURIComponent(token)}`,
    );
    return check(res);
  }

  async events(
    sessionId: string,
    token: string,
    since: number,
  ): Promise<EventsResponse> {
    const res = await fetch(
      `${this.base}/sessions/${sessionId}/events?token=${encodeURIComponent(token)}&since=${since}`,
    );
    return check(res);
  }

  async act(sessionId: string, token: string, action: ActionBody) {
    const res = await fetch(`${this.base}/sessions/${sessionId}/actions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token, ...action }),
    });
    return check(res);
  }

  async search(sessionId: string, token: string, query: string) {
    const res = await fetch(`${this.base}/sessions/${sessionId}/search`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token, query }),
    });
    return check(res);
  }

  async log(sessionId: string, token: string): Promise<string> {
    const res = await fetch(
      `${this.base}/sessions/${sessionId}/log?token=${encodeURIComponent(token)}`,
    );
    if (!res.ok) throw new ApiError(res.statusText, res.status);
    return res.text();
  }
}
