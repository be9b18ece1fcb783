import { describe, expect, it } from "vitest";

import { EventStream, parseSseChunk } from "../src/sse.js";
import { EventRecord } from "../src/types.js";

function message(id: string, type = "warmth"): string {
  const rec = {
    id,
    base: null,
    type,
    value: 1,
    actor: "engine",
    cause: [],
    model: null,
    ts: 0,
  };
  return `id: ${id}\ndata: ${JSON.stringify(rec)}\n\n`;
}

describe("parseSseChunk", () => {
  it("parses complete messages and keeps the partial tail", () => {
    const buffer = message("aaa") + message("bbb") + "id: ccc\ndata: {";
    const { messages, rest } = parseSseChunk(buffer);
    expect(messages.map((m) => m.id)).toEqual(["aaa", "bbb"]);
    expect(rest).toBe("id: ccc\ndata: {");
  });

  it("handles messages split across chunk boundaries", () => {
    const full = message("xyz");
    const first = parseSseChunk(full.slice(0, 20));
    expect(first.messages).toEqual([]);
    const second = parseSseChunk(first.rest + full.slice(20));
    expect(second.messages.map((m) => m.id)).toEqual(["xyz"]);
    expect(second.rest).toBe("");
  });

  it("ignores blank blocks", () => {
    expect(parseSseChunk("\n\n\n\n").messages).toEqual([]);
  });
});

function streamResponse(chunks: string[]): Response {
  const encoder = new TextEncoder();
  const body = new ReadableStream<Uint8Array>({
    start(controller) {
      for (const chunk of chunks) controller.enqueue(encoder.encode(chunk));
      controller.close();
    },
  });
  return new Response(body, { status: 200 });
}

describe("EventStream", () => {
  it("delivers records, tracks lastId, and resumes with since=", async () => {
    const urls: string[] = [];
    const received: EventRecord[] = [];
    let connection = 0;
    const fetcher: typeof fetch = async (input) => {
      urls.push(String(input));
      connection += 1;
      if (connection === 1) return streamResponse([message("e1"), message("e2")]);
      return streamResponse([message("e3")]);
    };
    const stream = new EventStream("http://x/api/events", {
      onRecord: (rec) => {
        received.push(rec);
        if (received.length === 3) stream.stop();
      },
      fetcher,
      maxBackoffMs: 1,
    });
    await stream.start();
    expect(received.map((r) => r.id)).toEqual(["e1", "e2", "e3"]);
    expect(stream.lastId).toBe("e3");
    expect(urls[0]).toBe("http://x/api/events");
    expect(urls[1]).toBe("http://x/api/events?since=e2");
  });

  it("retries after a failed connection", async () => {
    let connection = 0;
    const stream = new EventStream("http://x/api/events", {
      onRecord: () => stream.stop(),
      fetcher: async () => {
        connection += 1;
        if (connection === 1) return new Response("nope", { status: 500 });
        return streamResponse([message("ok")]);
      },
      maxBackoffMs: 1,
    });
    await stream.start();
    expect(connection).toBe(2);
    expect(stream.lastId).toBe("ok");
  });
});
