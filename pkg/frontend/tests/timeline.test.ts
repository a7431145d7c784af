import { describe, expect, it } from "vitest";

import { TimelineModel, configChips, describeRecord } from "../src/timeline.js";
import type { LogRecord } from "../src/types.js";
import { L0, L2 } from "./fixtures.js";

function record(t: number, kind: string, detail: Record<string, unknown>): LogRecord {
  return { t, kind, from: "controller:0", to: "controller:0", detail };
}

describe("configChips", () => {
  it("lists only changed dimensions in fixed order", () => {
    expect(configChips(L2, L0)).toEqual([
      { dimension: "image", from: "external_full", to: "local_static" },
      { dimension: "persistence", from: "external", to: "local_static" },
      { dimension: "auth", from: "standard", to: "absent" },
      { dimension: "recommender", from: "full", to: "disabled" },
    ]);
    expect(configChips(L2, L2)).toEqual([]);
  });
});

describe("timeline over a provider-outage run", () => {
  it("renders the L2 -> L0 -> L2 trajectory", () => {
    const model = new TimelineModel();
    const sequence: LogRecord[] = [
      record(0, "config_changed", { config: L2 }),
      record(10_000, "fault_injected", { fault_id: 1, kind: "down", targets: ["auth:0"] }),
      record(13_000, "condition", { kind: "external_outage", detected_at: 13_000 }),
      record(13_000, "plan", { id: 1, steps: [{ kind: "start_service" }], trigger: [] }),
      record(14_400, "config_changed", { config: L0 }),
      record(22_000, "redeploy_complete", { endpoints: ["persistence_ext:1", "image_ext:1", "auth:1"] }),
      record(24_000, "probe_success", { targets: ["persistence_ext:1"] }),
      record(24_000, "condition", { kind: "provider_restored", detected_at: 24_000 }),
      record(24_000, "plan", { id: 2, steps: [], trigger: [] }),
      record(23_800 + 200, "plan_executed", { plan_id: 2 }),
      record(24_000, "config_changed", { config: L2 }),
    ];
    for (const r of sequence) model.push(r);

    const trajectory = model.configTrajectory();
    const persistenceMoves = trajectory
      .filter((c) => c.dimension === "persistence")
      .map((c) => `${c.from}>${c.to}`);
    expect(persistenceMoves).toEqual(["external>local_static", "local_static>external"]);

    const texts = model.entries.map((e) => e.text);
    expect(texts.some((t) => t.includes("external_outage"))).toBe(true);
    expect(texts.some((t) => t.includes("redeploy complete"))).toBe(true);
    expect(texts.some((t) => t.includes("provider_restored"))).toBe(true);
  });

  it("renders a benign-surge narrative in arrival order", () => {
    const model = new TimelineModel();
    model.push(record(0, "config_changed", { config: L2 }));
    model.push(record(11_000, "condition", { kind: "qos_violation", endpoint: "recommender" }));
    model.push(record(11_000, "plan", { id: 1, steps: [{ kind: "set_mode" }] }));
    model.push(
      record(11_000, "config_changed", { config: { ...L2, recommender: "low_power" } }),
    );
    const entries = model.entries;
    expect(entries.map((e) => e.kind)).toEqual(["config_changed", "condition", "plan", "config_changed"]);
    const last = entries[entries.length - 1]!;
    expect(last.chips).toEqual([
      { dimension: "recommender", from: "full", to: "low_power" },
    ]);
  });
});

describe("timeline hygiene", () => {
  it("ignores transport noise", () => {
    expect(describeRecord(record(5, "request", { id: 1 }), null)).toBeNull();
    expect(describeRecord(record(5, "response", { id: 1 }), null)).toBeNull();
    expect(describeRecord(record(5, "metrics", {}), null)).toBeNull();
  });

  it("caps retained entries and keeps the newest", () => {
    const model = new TimelineModel(100);
    for (let i = 0; i < 2000; i++) {
      model.push(record(i, "condition", { kind: "traffic_surge", traffic_class: "benign" }));
    }
    expect(model.entries.length).toBe(100);
    expect(model.entries[model.entries.length - 1]!.t).toBe(1999);
  });

  it("is an empty list for an empty run", () => {
    expect(new TimelineModel().entries).toEqual([]);
  });
});
