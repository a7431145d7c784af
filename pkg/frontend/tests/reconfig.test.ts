import { describe, expect, it } from "vitest";

import { UNCHANGED, buildRequestBody, describeOutcome } from "../src/reconfig.js";
import { L0, RECONFIGURE_FULL_FROM_L0 } from "./fixtures.js";

describe("buildRequestBody", () => {
  it("submits only explicitly chosen dimensions", () => {
    const body = buildRequestBody({
      image: UNCHANGED,
      persistence: UNCHANGED,
      auth: UNCHANGED,
      recommender: "full",
    });
    expect(body).toEqual({ recommender: "full" });
  });

  it("is empty when nothing is chosen", () => {
    expect(buildRequestBody({})).toEqual({});
    expect(
      buildRequestBody({ image: UNCHANGED, persistence: UNCHANGED, auth: UNCHANGED, recommender: UNCHANGED }),
    ).toEqual({});
  });
});

describe("describeOutcome", () => {
  it("flags planner-filled dimensions beyond the operator's request", () => {
    const body = { recommender: "full" };
    const outcome = describeOutcome(L0, body, RECONFIGURE_FULL_FROM_L0);
    expect(outcome.target).toEqual(RECONFIGURE_FULL_FROM_L0.target);
    expect(outcome.requested).toEqual(["recommender"]);
    expect(outcome.plannerFilled).toEqual(["persistence", "auth"]);
    expect(outcome.changed).toEqual(["persistence", "auth", "recommender"]);
    expect(outcome.noChange).toBe(false);
  });

  it("reports no-change for an identity completion", () => {
    const outcome = describeOutcome(L0, {}, { target: L0, plan_id: 7 });
    expect(outcome.noChange).toBe(true);
    expect(outcome.plannerFilled).toEqual([]);
  });

  it("never re-derives the target client-side", () => {
    // The outcome view echoes exactly what the API returned, even when the
    // operator requested something that is already current.
    const outcome = describeOutcome(
      L0,
      { image: "local_static" },
      { target: L0, plan_id: 9 },
    );
    expect(outcome.target).toEqual(L0);
    expect(outcome.requested).toEqual(["image"]);
    expect(outcome.noChange).toBe(true);
  });
});
