/**
 * Adaptation timeline: turns control-plane event records into a readable
 * narrative. Configuration changes render as before/after chips per
 * changed dimension; high-volume transport records are not timeline
 * material and yield null.
 */
import type { ConfigJson, LogRecord } from "./types.js";

export interface ConfigChip {
  dimension: string;
  from: string;
  to: string;
}

export interface TimelineEntry {
  t: number;
  kind: string;
  text: string;
  chips: ConfigChip[];
}

export const TIMELINE_KINDS = [
  "config_changed",
  "condition",
  "plan",
  "step",
  "plan_executed",
  "plan_report",
  "fault_injected",
  "fault_cleared",
  "advisory",
  "incident_opened",
  "incident_closed",
  "breaker",
  "breakers_deployed",
  "breakers_removed",
  "probe_success",
  "redeploy_complete",
  "mode_set",
  "service_started",
  "service_stopped",
  "route_switched",
] as const;

export function configChips(prev: ConfigJson | null, next: ConfigJson): ConfigChip[] {
  if (prev === null) {
    return [];
  }
  const dims: (keyof ConfigJson)[] = ["image", "persistence", "auth", "recommender"];
  return dims
    .filter((d) => prev[d] !== next[d])
    .map((d) => ({ dimension: d, from: prev[d], to: next[d] }));
}

export function describeRecord(
  record: LogRecord,
  prevConfig: ConfigJson | null,
): TimelineEntry | null {
  const d = record.detail;
  switch (record.kind) {
    case "config_changed": {
      const next = d["config"] as ConfigJson;
      const chips = configChips(prevConfig, next);
      const text =
        chips.length === 0
          ? "configuration set"
          : `configuration changed (${chips.length} dimension${chips.length > 1 ? "s" : ""})`;
      return { t: record.t, kind: record.kind, text, chips };
    }
    case "condition": {
      const kind = d["kind"] as string;
      const extra =
        (d["endpoint"] as string | undefined) ??
        (d["traffic_class"] as string | undefined) ??
        (d["request"] ? JSON.stringify(d["request"]) : undefined);
      return {
        t: record.t,
        kind: record.kind,
        text: `condition detected: ${kind}${extra ? ` (${extra})` : ""}`,
        chips: [],
      };
    }
    case "plan": {
      const steps = (d["steps"] as unknown[] | undefined)?.length ?? 0;
      return {
        t: record.t,
        kind: record.kind,
        text: `plan #${d["id"]} adopted (${steps} step${steps === 1 ? "" : "s"})`,
        chips: [],
      };
    }
    case "step": {
      const parts = [d["kind"], d["service"], d["route"], d["mode"]]
        .filter((x) => x !== undefined && x !== null)
        .join(" ");
      return { t: record.t, kind: record.kind, text: `step: ${parts}`, chips: [] };
    }
    case "plan_executed":
      return {
        t: record.t,
        kind: record.kind,
        text: `plan #${d["plan_id"]} executed`,
        chips: [],
      };
    case "plan_report": {
      const downtime = d["downtime_ms"] as Record<string, number> | undefined;
      const text = downtime
        ? `plan #${d["plan_id"]} report: downtime ${Object.entries(downtime)
            .map(([k, v]) => `${k}=${v}ms`)
            .join(", ")}`
        : `plan #${d["plan_id"]} report`;
      return { t: record.t, kind: record.kind, text, chips: [] };
    }
    case "fault_injected":
      return {
        t: record.t,
        kind: record.kind,
        text: `fault injected #${d["fault_id"]}: ${d["kind"]} ${(d["targets"] as string[] | undefined)?.join(", ") ?? ""}`,
        chips: [],
      };
    case "fault_cleared":
      return { t: record.t, kind: record.kind, text: `fault cleared #${d["fault_id"]}`, chips: [] };
    case "advisory":
      return { t: record.t, kind: record.kind, text: `provider advisory: ${d["kind"]}`, chips: [] };
    case "incident_opened":
      return { t: record.t, kind: record.kind, text: `incident opened: ${d["kind"]}`, chips: [] };
    case "incident_closed":
      return { t: record.t, kind: record.kind, text: `incident closed: ${d["kind"]}`, chips: [] };
    case "breaker":
      return {
        t: record.t,
        kind: record.kind,
        text: `breaker ${d["route"]}: ${d["from"]} -> ${d["to"]}`,
        chips: [],
      };
    case "breakers_deployed":
      return { t: record.t, kind: record.kind, text: "circuit breakers deployed", chips: [] };
    case "breakers_removed":
      return { t: record.t, kind: record.kind, text: "circuit breakers removed", chips: [] };
    case "probe_success":
      return {
        t: record.t,
        kind: record.kind,
        text: `recovery probe succeeded: ${(d["targets"] as string[] | undefined)?.join(", ") ?? ""}`,
        chips: [],
      };
    case "redeploy_complete":
      return {
        t: record.t,
        kind: record.kind,
        text: `redeploy complete: ${(d["endpoints"] as string[] | undefined)?.join(", ") ?? ""}`,
        chips: [],
      };
    case "mode_set":
      return { t: record.t, kind: record.kind, text: `mode set: ${d["service"]} -> ${d["mode"]}`, chips: [] };
    case "service_started":
      return {
        t: record.t,
        kind: record.kind,
        text: `service started: ${d["endpoint"]}${d["restart"] ? " (restart)" : ""}`,
        chips: [],
      };
    case "service_stopped":
      return { t: record.t, kind: record.kind, text: `service stopped: ${d["endpoint"]}`, chips: [] };
    case "route_switched":
      return {
        t: record.t,
        kind: record.kind,
        text: `route ${d["route"]} -> ${d["target"] ?? "none"}`,
        chips: [],
      };
    default:
      return null;
  }
}

/** Bounded, newest-last timeline fed from the event stream. */
export class TimelineModel {
  entries: TimelineEntry[] = [];
  private lastConfig: ConfigJson | null = null;

  constructor(private readonly capacity = 500) {}

  push(record: LogRecord): TimelineEntry | null {
    const entry = describeRecord(record, this.lastConfig);
    if (record.kind === "config_changed") {
      this.lastConfig = record.detail["config"] as ConfigJson;
    }
    if (entry === null) {
      return null;
    }
    this.entries.push(entry);
    if (this.entries.length > this.capacity) {
      this.entries.splice(0, this.entries.length - this.capacity);
    }
    return entry;
  }

  /** All before/after chips seen, in order: the configuration trajectory. */
  configTrajectory(): ConfigChip[] {
    return this.entries.filter((e) => e.kind === "config_changed").flatMap((e) => e.chips);
  }
}
