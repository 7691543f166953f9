/**
 * Service client: consumes the snapshot push stream, falls back to polling
 * when the stream drops, and tracks data staleness for the indicator.
 */

import { Command, CommandAck, Snapshot } from "./types.js";

export const STALE_AFTER_MS = 2000;

/** Incremental parser for server-sent-event payload lines. */
export function parseSseChunk(buffer: string): { events: string[]; rest: string } {
  const events: string[] = [];
  const parts = buffer.split("\n\n");
  const rest = parts.pop() ?? "";
  for (const part of parts) {
    for (const line of part.split("\n")) {
      if (line.startsWith("data: ")) events.push(line.slice(6));
    }
  }
  return { events, rest };
}

export function isStale(lastDataAtMs: number | null, nowMs: number): boolean {
  return lastDataAtMs === null || nowMs - lastDataAtMs > STALE_AFTER_MS;
}

export interface ClientCallbacks {
  onSnapshot(snapshot: Snapshot): void;
  onTransport(mode: "stream" | "poll"): void;
}

export class ServiceClient {
  private lastDataAtMs: number | null = null;
  private stopped = false;

  constructor(
    private readonly baseUrl: string,
    private readonly callbacks: ClientCallbacks,
  ) {}

  stale(nowMs: number = Date.now()): boolean {
    return isStale(this.lastDataAtMs, nowMs);
  }

  start(): void {
    void this.streamLoop();
  }

  stop(): void {
    this.stopped = true;
  }

  async sendCommand(command: Command): Promise<CommandAck> {
    const res = await fetch(`${this.baseUrl}/api/command`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(command),
    });
    return (await res.json()) as CommandAck;
  }

  private deliver(raw: string): void {
    try {
      const snapshot = JSON.parse(raw) as Snapshot;
      this.lastDataAtMs = Date.now();
      this.callbacks.onSnapshot(snapshot);
    } catch {
      // a torn frame is ignored; staleness will surface a persistent problem
    }
  }

  private async streamLoop(): Promise<void> {
    while (!this.stopped) {
      try {
        this.callbacks.onTransport("stream");
        const res = await fetch(`${this.baseUrl}/api/stream`);
        if (!res.ok || !res.body) throw new Error(`stream ${res.status}`);
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done || this.stopped) break;
          buffer += decoder.decode(value, { stream: true });
          const { events, rest } = parseSseChunk(buffer);
          buffer = rest;
          for (const event of events) this.deliver(event);
        }
      } catch {
        // fall through to polling
      }
      if (this.stopped) return;
      await this.pollLoop();
    }
  }

  /** Poll until the stream looks worth retrying (a few successes). */
  private async pollLoop(): Promise<void> {
    this.callbacks.onTransport("poll");
    for (let i = 0; i < 5 && !this.stopped; i++) {
      try {
        const res = await fetch(`${this.baseUrl}/api/snapshot`);
        if (res.ok) this.deliver(await res.text());
      } catch {
        // staleness indicator covers it
      }
      await new Promise((resolve) => setTimeout(resolve, 500));
    }
  }
}
