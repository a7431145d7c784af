/** Wire shapes of the control-plane API. */

export interface ConfigJson {
  image: string;
  persistence: string;
  auth: string;
  recommender: string;
}

export type Dimension = keyof ConfigJson;

export interface BreakerSnapshot {
  state: string;
  consecutive_failures: number;
  opened_at: number | null;
  failure_threshold: number;
  cooldown_ms: number;
}

export interface FaultJson {
  kind: string;
  targets?: string[];
  factor?: number;
  group_a?: string[];
  group_b?: string[];
}

export interface StateSnapshot {
  sim_time_ms: number;
  config: ConfigJson;
  webui_mode: string;
  breakers: Record<string, BreakerSnapshot>;
  routes: Record<string, string | null>;
  instances: string[];
  active_faults: Record<string, FaultJson>;
  pace?: { mode: string; factor: number };
  executing_plan?: unknown;
  incident?: { kind: string; since: number } | null;
}

export interface ServiceMetrics {
  requests: number;
  timeouts: number;
  timeout_ratio: number;
  breaker_rejections: number;
  p50_ms: number | null;
  p95_ms: number | null;
  distinct_sessions: number;
}

export interface MetricsSnapshot {
  now: number;
  window_ms?: number;
  arrival_rate?: number;
  baseline_rate?: number | null;
  services: Record<string, ServiceMetrics>;
}

export interface LogRecord {
  t: number;
  kind: string;
  from: string;
  to: string;
  detail: Record<string, unknown>;
}

export interface ReconfigureResponse {
  target: ConfigJson;
  plan_id: number;
}

export interface ScenarioListing {
  scenarios: string[];
}
