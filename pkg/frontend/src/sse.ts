// Server-sent-events reader built on fetch streaming instead of
// EventSource so resume-by-last-id is explicit and the parser is testable
// off-browser. The server emits one event record per message:
//
//     id: <event id>
//     data: <json record>
//
// Disconnects resume from the last id seen, with exponential backoff.

import { EventRecord } from "./types.js";

export interface SseMessage {
  id: string | null;
  data: string;
}

export interface ChunkResult {
  messages: SseMessage[];
  rest: string;
}

// Incremental parse: feed the concatenation of (previous rest + new text);
// complete messages are separated by a blank line.
export function parseSseChunk(buffer: string): ChunkResult {
  const messages: SseMessage[] = [];
  const parts = buffer.split("\n\n");
  const rest = parts.pop() ?? "";
  for (const block of parts) {
    if (!block.trim()) continue;
    let id: string | null = null;
    const data: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith("id:")) id = line.slice(3).trim();
      else if (line.startsWith("data:")) data.push(line.slice(5).trim());
    }
    if (data.length) messages.push({ id, data: data.join("\n") });
  }
  return { messages, rest };
}

export interface StreamOptions {
  since?: string | null;
  onRecord: (record: EventRecord, id: string | null) => void;
  onStatus?: (status: "open" | "retrying" | "closed") => void;
  fetcher?: typeof fetch;
  maxBackoffMs?: number;
}

export class EventStream {
  lastId: string | null;
  private stopped = false;
  private backoff = 500;

  constructor(
    private url: string,
    private opts: StreamOptions,
  ) {
    this.lastId = opts.since ?? null;
  }

  private resumeUrl(): string {
    if (!this.lastId) return this.url;
    const sep = this.url.includes("?") ? "&" : "?";
    return `${this.url}${sep}since=${encodeURIComponent(this.lastId)}`;
  }

  async start(): Promise<void> {
    const fetcher = this.opts.fetcher ?? fetch;
    const maxBackoff = this.opts.maxBackoffMs ?? 15000;
    while (!this.stopped) {
      try {
        const res = await fetcher(this.resumeUrl(), {
          headers: { Accept: "text/event-stream" },
        });
        if (!res.ok || !res.body) throw new Error(`stream failed: ${res.status}`);
        this.opts.onStatus?.("open");
        this.backoff = 500;
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (this.stopped) {
            await reader.cancel().catch(() => undefined);
            break;
          }
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          const { messages, rest } = parseSseChunk(buffer);
          buffer = rest;
          for (const msg of messages) {
            if (msg.id) this.lastId = msg.id;
            this.opts.onRecord(JSON.parse(msg.data) as EventRecord, msg.id);
          }
        }
      } catch {
        // fall through to retry
      }
      if (this.stopped) break;
      this.opts.onStatus?.("retrying");
      await new Promise((r) => setTimeout(r, this.backoff));
      this.backoff = Math.min(this.backoff * 2, maxBackoff);
    }
    this.opts.onStatus?.("closed");
  }

  stop(): void {
    this.stopped = true;
  }
}
