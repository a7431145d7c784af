/**
 * Reconfiguration form model. Only explicitly chosen dimensions go into
 * the request body (partial requests are the point); the outcome view
 * flags every dimension the planner had to fill in beyond the operator's
 * request, taken verbatim from the API's returned target.
 */
import type { ConfigJson, Dimension, ReconfigureResponse } from "./types.js";

export const UNCHANGED = "(leave unchanged)";

export const DIMENSION_VALUES: Record<Dimension, string[]> = {
  image: ["local_static", "external_lite", "external_full"],
  persistence: ["local_static", "external"],
  auth: ["absent", "standard", "restrictive"],
  recommender: ["disabled", "low_power", "full"],
};

export const DIMENSIONS = Object.keys(DIMENSION_VALUES) as Dimension[];

export type Selections = Partial<Record<Dimension, string>>;

/** Drop unchanged/blank selections; what remains is the partial request. */
export function buildRequestBody(selections: Selections): Record<string, string> {
  const body: Record<string, string> = {};
  for (const dimension of DIMENSIONS) {
    const value = selections[dimension];
    if (value !== undefined && value !== "" && value !== UNCHANGED) {
      body[dimension] = value;
    }
  }
  return body;
}

export interface OutcomeView {
  target: ConfigJson;
  planId: number;
  requested: Dimension[];
  plannerFilled: Dimension[];
  changed: Dimension[];
  noChange: boolean;
}

export function describeOutcome(
  current: ConfigJson,
  requestedBody: Record<string, string>,
  response: ReconfigureResponse,
): OutcomeView {
  const requested = DIMENSIONS.filter((d) => d in requestedBody);
  const changed = DIMENSIONS.filter((d) => response.target[d] !== current[d]);
  const plannerFilled = changed.filter((d) => !requested.includes(d));
  return {
    target: response.target,
    planId: response.plan_id,
    requested,
    plannerFilled,
    changed,
    noChange: changed.length === 0,
  };
}
