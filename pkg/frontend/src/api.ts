/**
 * Control-plane client: JSON fetch wrappers plus the event subscription.
 * The SSE subscription reconnects with backoff; while it is down the
 * caller's polling keeps the view fresh, so losing the stream degrades to
 * 1s-latency updates instead of a dead console.
 */
import type {
  ConfigJson,
  FaultJson,
  LogRecord,
  MetricsSnapshot,
  ReconfigureResponse,
  ScenarioListing,
  StateSnapshot,
} from "./types.js";
import { TIMELINE_KINDS } from "./timeline.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(body)}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = response.status === 204 ? null : await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  getConfig(): Promise<ConfigJson> {
    return request(`${this.base}/api/config`);
  }

  getState(): Promise<StateSnapshot> {
    return request(`${this.base}/api/state`);
  }

  getMetrics(): Promise<MetricsSnapshot> {
    return request(`${this.base}/api/metrics`);
  }

  listScenarios(): Promise<ScenarioListing> {
    return request(`${this.base}/api/scenarios`);
  }

  reconfigure(body: Record<string, string>): Promise<ReconfigureResponse> {
    return request(`${this.base}/api/reconfigure`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  injectFault(spec: FaultJson): Promise<{ id: number }> {
    return request(`${this.base}/api/faults`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
  }

  clearFault(id: number | string): Promise<{ cleared: number }> {
    return request(`${this.base}/api/faults/${id}`, { method: "DELETE" });
  }

  setPace(mode: string, factor = 1.0): Promise<{ mode: string }> {
    return request(`${this.base}/api/sim/pace`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ mode, factor }),
    });
  }

  runScenario(name: string, seed?: number): Promise<unknown> {
    return request(`${this.base}/api/scenarios/${name}/run`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seed === undefined ? {} : { seed }),
    });
  }
}

export type StreamStatus = "connected" | "reconnecting";

export interface EventSubscription {
  close(): void;
}

export function subscribeEvents(
  base: string,
  onRecord: (record: LogRecord) => void,
  onStatus: (status: StreamStatus) => void,
  onHello?: (snapshot: StateSnapshot) => void,
): EventSubscription {
  let source: EventSource | null = null;
  let closed = false;
  let backoffMs = 1000;

  const connect = () => {
    if (closed) return;
    source = new EventSource(`${base}/api/events`);
    source.addEventListener("hello", (event) => {
      backoffMs = 1000;
      onStatus("connected");
      if (onHello) {
        onHello(JSON.parse((event as MessageEvent).data) as StateSnapshot);
      }
    });
    for (const kind of TIMELINE_KINDS) {
      source.addEventListener(kind, (event) => {
        onRecord(JSON.parse((event as MessageEvent).data) as LogRecord);
      });
    }
    source.onerror = () => {
      onStatus("reconnecting");
      source?.close();
      source = null;
      if (!closed) {
        setTimeout(connect, backoffMs);
        backoffMs = Math.min(backoffMs * 2, 15_000);
      }
    };
  };

  connect();
  return {
    close() {
      closed = true;
      source?.close();
    },
  };
}
