import { describe, expect, it } from "vitest";

import { DiscoverResult } from "../src/api.js";
import { UiSession } from "../src/session.js";
import {
  MockService,
  emptyDisconnected,
  sampleDiscover,
  sampleReport,
  sampleUpload,
} from "./mock.js";

function service(): MockService {
  const mock = new MockService();
  mock.on("POST", "/logs", () => sampleUpload());
  mock.on("POST", "/discover", () => sampleDiscover());
  mock.on("GET", "/disconnected", () => emptyDisconnected());
  return mock;
}

async function uploaded(mock: MockService): Promise<UiSession> {
  const session = new UiSession(mock.client());
  await session.upload("log.xes", new Uint8Array([60, 108]));
  return session;
}

describe("session", () => {
  it("stores upload stats from the response", async () => {
    const session = await uploaded(service());
    expect(session.log).toEqual({
      id: "cafecafecafecafe",
      stats: { events: 11, activities: 4, traces: 2, variants: 2 },
    });
  });

  it("refuses to run before an upload", async () => {
    const session = new UiSession(service().client());
    await expect(session.run()).rejects.toThrow(/upload a log/);
  });

  it("sends the panel's exact body and adopts the response", async () => {
    const mock = service();
    const session = await uploaded(mock);
    session.choosePreset("2.0/b0.3t0.7r0.6");
    await session.run();

    const discoverRequest = mock.requests.find((r) => r.url.includes("/discover"));
    expect(discoverRequest?.body).toBe(
      '{"algorithm":"alphappp","config":{"d":{"value":2,"mode":"relative"},' +
        '"n":0,"b":0.3,"t":0.7,"r":0.6,"problem_threshold":1}}',
    );
    expect(session.lastNetId).toBe("feedfeedfeedfeed");
    expect(session.lastReport?.funnel.places).toBe(5);
    expect(session.pnmlUrl()).toBe("http://mock/nets/feedfeedfeedfeed.pnml");
  });

  it("appends history entries and never rewrites them", async () => {
    const session = await uploaded(service());
    await session.run();
    const first = session.history[0]!;
    session.editField("r", 0.9);
    await session.run();
    expect(session.history).toHaveLength(2);
    expect(session.history[0]).toBe(first); // append-only
    expect(session.history[1]!.preset).toBe("custom");
    expect(session.history.every((h) => typeof h.places === "number")).toBe(true);
  });

  it("reports staleness when settings moved after the run", async () => {
    const session = await uploaded(service());
    await session.run();
    expect(session.isStale()).toBe(false);
    session.editField("b", 0.1);
    expect(session.isStale()).toBe(true);
    session.editField("b", 0.5); // back to the ran settings
    expect(session.isStale()).toBe(false);
  });

  it("keeps a single request in flight, latest settings winning", async () => {
    const mock = new MockService();
    mock.on("POST", "/logs", () => sampleUpload());
    mock.on("GET", "/disconnected", () => emptyDisconnected());

    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const bodies: string[] = [];
    const slowImpl = async (url: string, init?: RequestInit): Promise<Response> => {
      if (url.includes("/discover")) {
        bodies.push(String(init?.body));
        if (bodies.length === 1) await gate; // hold the first request open
        return new Response(JSON.stringify(sampleDiscover()), { status: 200 });
      }
      if (url.includes("/disconnected")) {
        return new Response(JSON.stringify(emptyDisconnected()), { status: 200 });
      }
      return new Response(JSON.stringify(sampleUpload()), { status: 200 });
    };
    const session = new UiSession(new (await import("../src/api.js")).ApiClient("http://mock", slowImpl));
    await session.upload("log.xes", new Uint8Array([60]));

    const p1 = session.run();
    session.editField("r", 0.9);
    const p2 = session.run(); // queued
    session.editField("r", 0.7);
    const p3 = session.run(); // replaces the queued settings
    release!();
    await Promise.all([p1, p2, p3]);

    expect(bodies).toHaveLength(2); // first + latest queued, middle skipped
    expect(bodies[1]).toContain('"r":0.7');
    expect(session.history).toHaveLength(2);
  });

  it("classical runs record the net's place count instead of a funnel", async () => {
    const mock = new MockService();
    mock.on("POST", "/logs", () => sampleUpload());
    mock.on("POST", "/discover", () => sampleDiscover(null));
    mock.on("GET", "/disconnected", () => emptyDisconnected());
    const session = await uploaded(mock);
    session.chooseAlgorithm("alpha");
    await session.run();
    expect(session.lastReport).toBeNull();
    expect(session.history[0]!.places).toBe(3); // places array length from the payload
  });

  it("remove-disconnected swaps in the reduced net from the service", async () => {
    const mock = service();
    const reduced: DiscoverResult["net"] = {
      places: sampleDiscover().net.places,
      transitions: sampleDiscover().net.transitions.slice(0, 1),
      arcs: [],
    };
    mock.on("POST", "/remove-disconnected", () => ({
      net_id: "0123456789abcdef",
      net: reduced,
      dot: "digraph { reduced }",
      removed: ["b", null],
    }));
    const session = await uploaded(mock);
    await session.run();
    const before = session.lastNet!.transitions.length;
    const result = await session.removeDisconnected(2);
    expect(result.removed).toHaveLength(2);
    expect(session.lastNet!.transitions.length).toBe(before - 2);
    expect(session.lastNetId).toBe("0123456789abcdef");
    expect(session.lastDot).toContain("reduced");
  });

  it("surfaces service error details", async () => {
    const mock = new MockService();
    mock.on("POST", "/logs", () => sampleUpload());
    mock.on("POST", "/discover", () => ({ detail: "invalid discovery config: b" }), 400);
    const session = await uploaded(mock);
    await expect(session.run()).rejects.toThrow(/invalid discovery config/);
  });
});
