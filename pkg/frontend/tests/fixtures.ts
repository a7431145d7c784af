/** Fixtures captured verbatim from a live control plane (seed 42). */
import type { ConfigJson, StateSnapshot } from "../src/types.js";

export const L2: ConfigJson = {
  image: "external_full",
  persistence: "external",
  auth: "standard",
  recommender: "full",
};

export const L0: ConfigJson = {
  image: "local_static",
  persistence: "local_static",
  auth: "absent",
  recommender: "disabled",
};

export const STATE_L2: StateSnapshot = {
  sim_time_ms: 0,
  config: L2,
  webui_mode: "normal",
  breakers: {},
  routes: {
    auth: "auth:0",
    db: "local_cache_db:0",
    img: "local_cache_img:0",
    rec: "recommender:0",
  },
  instances: [
    "auth:0",
    "image_ext:0",
    "local_cache_db:0",
    "local_cache_img:0",
    "persistence_ext:0",
    "recommender:0",
    "webui:0",
  ],
  active_faults: {},
  pace: { mode: "paused", factor: 1.0 },
  executing_plan: null,
  incident: null,
};

export const STATE_L0: StateSnapshot = {
  sim_time_ms: 0,
  config: L0,
  webui_mode: "normal",
  breakers: {},
  routes: { auth: null, db: "local_static_db:0", img: "local_static_img:0", rec: null },
  instances: ["local_static_db:0", "local_static_img:0", "webui:0"],
  active_faults: {},
  pace: { mode: "paused", factor: 1.0 },
  executing_plan: null,
  incident: null,
};

export const EXTERNALS_DOWN_FAULT = {
  "1": { kind: "down", targets: ["auth:0", "image_ext:0", "persistence_ext:0"] },
};

/** POST /api/reconfigure {"recommender":"full"} from L0, as returned live. */
export const RECONFIGURE_FULL_FROM_L0 = {
  target: {
    image: "local_static",
    persistence: "external",
    auth: "standard",
    recommender: "full",
  },
  plan_id: 1,
};
