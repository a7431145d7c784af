import { describe, expect, it } from "vitest";

import { activeServices, deriveTopology } from "../src/topology.js";
import { EXTERNALS_DOWN_FAULT, STATE_L0, STATE_L2 } from "./fixtures.js";

describe("activeServices", () => {
  it("matches the full configuration's service set", () => {
    expect(activeServices(STATE_L2.config)).toEqual(
      new Set([
        "client",
        "webui",
        "local_cache_db",
        "persistence_ext",
        "local_cache_img",
        "image_ext",
        "auth",
        "recommender",
      ]),
    );
  });

  it("matches the barebone configuration's service set", () => {
    expect(activeServices(STATE_L0.config)).toEqual(
      new Set(["client", "webui", "local_static_db", "local_static_img"]),
    );
  });
});

describe("deriveTopology", () => {
  it("renders all external nodes active under the full configuration", () => {
    const view = deriveTopology(STATE_L2);
    const status = new Map(view.nodes.map((n) => [n.service, n.status]));
    expect(status.get("persistence_ext")).toBe("up");
    expect(status.get("image_ext")).toBe("up");
    expect(status.get("auth")).toBe("up");
    expect(status.get("recommender")).toBe("up");
    expect(status.get("local_static_db")).toBe("inactive");
    expect(status.get("local_static_img")).toBe("inactive");
  });

  it("active-edge set mirrors the configuration exactly", () => {
    const view = deriveTopology(STATE_L2);
    const edges = view.edges.map((e) => `${e.from}>${e.to}`).sort();
    expect(edges).toEqual(
      [
        "client>webui",
        "webui>local_cache_db",
        "webui>local_cache_img",
        "webui>auth",
        "webui>recommender",
        "local_cache_db>persistence_ext",
        "local_cache_img>image_ext",
      ].sort(),
    );
    const bareboneEdges = deriveTopology(STATE_L0).edges.map((e) => `${e.from}>${e.to}`).sort();
    expect(bareboneEdges).toEqual(
      ["client>webui", "webui>local_static_db", "webui>local_static_img"].sort(),
    );
  });

  it("marks faulted services down", () => {
    const state = { ...STATE_L2, active_faults: EXTERNALS_DOWN_FAULT };
    const status = new Map(deriveTopology(state).nodes.map((n) => [n.service, n.status]));
    expect(status.get("persistence_ext")).toBe("down");
    expect(status.get("image_ext")).toBe("down");
    expect(status.get("auth")).toBe("down");
    expect(status.get("webui")).toBe("up");
  });

  it("shows breaker and maintenance badges as degradation", () => {
    const state = {
      ...STATE_L2,
      webui_mode: "maintenance",
      breakers: {
        auth: {
          state: "open",
          consecutive_failures: 5,
          opened_at: 20_093,
          failure_threshold: 5,
          cooldown_ms: 5000,
        },
      },
    };
    const view = deriveTopology(state);
    const webui = view.nodes.find((n) => n.service === "webui");
    const auth = view.nodes.find((n) => n.service === "auth");
    expect(webui?.badges).toContain("maintenance");
    expect(webui?.status).toBe("degraded");
    expect(auth?.badges).toContain("breaker:open");
    expect(auth?.status).toBe("degraded");
  });
});
