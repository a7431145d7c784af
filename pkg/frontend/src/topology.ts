/**
 * Topology derivation: pure mapping from a state snapshot to the node and
 * edge view. The active-edge set is derived from the snapshot's
 * configuration alone, so the rendered picture always matches /api/state.
 */
import type { ConfigJson, StateSnapshot } from "./types.js";

export type NodeStatus = "up" | "down" | "degraded" | "inactive";

export interface TopologyNode {
  service: string;
  status: NodeStatus;
  badges: string[];
  instances: string[];
}

export interface TopologyEdge {
  from: string;
  to: string;
  route: string;
}

export interface TopologyView {
  nodes: TopologyNode[];
  edges: TopologyEdge[];
}

export const SERVICE_ORDER = [
  "client",
  "webui",
  "local_static_db",
  "local_cache_db",
  "persistence_ext",
  "local_static_img",
  "local_cache_img",
  "image_ext",
  "auth",
  "recommender",
] as const;

/** Services a valid configuration keeps in the request path. */
export function activeServices(config: ConfigJson): Set<string> {
  const active = new Set<string>(["client", "webui"]);
  if (config.persistence === "local_static") {
    active.add("local_static_db");
  } else {
    active.add("local_cache_db");
    active.add("persistence_ext");
  }
  if (config.image === "local_static") {
    active.add("local_static_img");
  } else {
    active.add("local_cache_img");
    active.add("image_ext");
  }
  if (config.auth !== "absent") {
    active.add("auth");
  }
  if (config.recommender !== "disabled") {
    active.add("recommender");
  }
  return active;
}

function downServices(state: StateSnapshot): Set<string> {
  const down = new Set<string>();
  for (const fault of Object.values(state.active_faults)) {
    if (fault.kind !== "down") continue;
    for (const target of fault.targets ?? []) {
      down.add(target.split(":")[0] ?? target);
    }
  }
  return down;
}

const ROUTE_SERVICES: Record<string, string> = {
  db: "db",
  img: "img",
  auth: "auth",
  rec: "rec",
};

export function deriveTopology(state: StateSnapshot): TopologyView {
  const active = activeServices(state.config);
  const down = downServices(state);
  const routeTargets = new Map<string, string>();
  for (const [route, endpoint] of Object.entries(state.routes)) {
    if (endpoint !== null) {
      routeTargets.set(route, endpoint.split(":")[0] ?? endpoint);
    }
  }
  const breakerByService = new Map<string, string>();
  for (const [route, breaker] of Object.entries(state.breakers)) {
    const service = routeTargets.get(route);
    if (service) breakerByService.set(service, breaker.state);
  }

  const nodes: TopologyNode[] = SERVICE_ORDER.map((service) => {
    const badges: string[] = [];
    let status: NodeStatus = active.has(service) ? "up" : "inactive";
    if (down.has(service)) {
      status = "down";
    }
    const breakerState = breakerByService.get(service);
    if (breakerState) {
      badges.push(`breaker:${breakerState}`);
      if (breakerState !== "closed" && status === "up") {
        status = "degraded";
      }
    }
    if (service === "webui" && state.webui_mode === "maintenance") {
      badges.push("maintenance");
      status = status === "up" ? "degraded" : status;
    }
    return {
      service,
      status,
      badges,
      instances: state.instances.filter((e) => e.startsWith(`${service}:`)),
    };
  });

  const edges: TopologyEdge[] = [{ from: "client", to: "webui", route: "client" }];
  for (const route of ["db", "img", "auth", "rec"]) {
    const target = routeTargets.get(route);
    if (target && active.has(target)) {
      edges.push({ from: "webui", to: target, route });
    }
  }
  if (state.config.persistence !== "local_static") {
    edges.push({ from: "local_cache_db", to: "persistence_ext", route: "db-upstream" });
  }
  if (state.config.image !== "local_static") {
    edges.push({ from: "local_cache_img", to: "image_ext", route: "img-upstream" });
  }
  return { nodes, edges };
}
