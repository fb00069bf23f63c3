// HTTP client for the session service plus a small server-sent-events
// reader. Everything the console does to a session goes through this
// module; there is no other channel to the engine.

import type {
  Act,
  Assessment,
  Induction,
  SessionEvent,
  SessionInfo,
  Thresholds,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: unknown,
  ) {
    super(`${code} (HTTP ${status})`);
  }
}

async function jsonOrThrow(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    const code = body && body.error ? body.error : "http_error";
    throw new ServiceError(resp.status, code, body ? body.detail : null);
  }
  return body;
}

export class ServiceClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async createSession(options: Record<string, unknown> = {}): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ policy: "builtin", ...options }),
    });
    return (await jsonOrThrow(resp)).session_id;
  }

  async getSession(sessionId: string): Promise<SessionInfo> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}`);
    return jsonOrThrow(resp);
  }

  async postObservation(
    sessionId: string,
    level: number,
    induction: Induction | null,
  ): Promise<Assessment> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/observations`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ level, induction, source: "wizard" }),
    });
    return jsonOrThrow(resp);
  }

  async nextAct(sessionId: string): Promise<Act | null> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/next-act`);
    return jsonOrThrow(resp);
  }

  async overrideAct(sessionId: string, actType: string): Promise<Act> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/acts`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ act_type: actType }),
    });
    return jsonOrThrow(resp);
  }

  async transcript(sessionId: string): Promise<SessionEvent[]> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/transcript`);
    return jsonOrThrow(resp);
  }

  thresholds(info: SessionInfo): Thresholds {
    return info.thresholds;
  }
}

export interface SseMessage {
  id: number | null;
  event: string;
  data: string;
}

/**
 * Parse an SSE byte stream into messages. Comment lines (": keep-alive")
 * are dropped; a blank line terminates a frame.
 */
export async function* parseSseStream(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<SseMessage> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  let current: SseMessage = { id: null, event: "message", data: "" };
  let sawField = false;
  try {
    while (true) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).replace(/\r$/, "");
        buffer = buffer.slice(newline + 1);
        if (line === "") {
          if (sawField) yield current;
          current = { id: null, event: "message", data: "" };
          sawField = false;
        } else if (line.startsWith(":")) {
          // comment / keep-alive
        } else if (line.startsWith("id: ")) {
          current.id = parseInt(line.slice(4), 10);
          sawField = true;
        } else if (line.startsWith("event: ")) {
          current.event = line.slice(7);
          sawField = true;
        } else if (line.startsWith("data: ")) {
          current.data += line.slice(6);
          sawField = true;
        }
      }
    }
  } finally {
    reader.releaseLock();
  }
}

export interface FeedHandlers {
  onEvent: (event: SessionEvent, id: number) => void;
  onStatus?: (status: "live" | "reconnecting" | "stopped") => void;
}

/**
 * Live event feed with automatic reconnect. Resumes from the last seen
 * event id, so a network blip loses no events and duplicates none.
 */
export class EventFeed {
  lastEventId = 0;
  private controller: AbortController | null = null;
  private running = false;

  constructor(
    private client: ServiceClient,
    private sessionId: string,
    private handlers: FeedHandlers,
    private reconnectDelayMs = 250,
  ) {}

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.loop();
  }

  stop(): void {
    this.running = false;
    this.controller?.abort();
    this.handlers.onStatus?.("stopped");
  }

  /** Fetch any backlog in one shot (stream closes once caught up). */
  async catchUp(): Promise<void> {
    const url =
      `${this.client.baseUrl}/sessions/${this.sessionId}/events` +
      `?follow=false&after=${this.lastEventId}`;
    const resp = await fetch(url);
    if (!resp.ok || !resp.body) {
      throw new ServiceError(resp.status, "stream_failed", null);
    }
    await this.consume(resp.body);
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    for await (const message of parseSseStream(body)) {
      if (message.event !== "session-event") continue;
      const event = JSON.parse(message.data) as SessionEvent;
      if (message.id !== null) this.lastEventId = message.id;
      this.handlers.onEvent(event, this.lastEventId);
    }
  }

  private async loop(): Promise<void> {
    while (this.running) {
      this.controller = new AbortController();
      try {
        const url =
          `${this.client.baseUrl}/sessions/${this.sessionId}/events` +
          `?after=${this.lastEventId}`;
        const resp = await fetch(url, { signal: this.controller.signal });
        if (!resp.ok || !resp.body) {
          throw new ServiceError(resp.status, "stream_failed", null);
        }
        this.handlers.onStatus?.("live");
        await this.consume(resp.body);
      } catch (err) {
        if (!this.running) return;
        this.handlers.onStatus?.("reconnecting");
        await new Promise((r) => setTimeout(r, this.reconnectDelayMs));
      }
    }
  }
}
