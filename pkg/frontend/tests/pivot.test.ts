// Pivot behaviour against a fake stateless service: identical requests get
// identical responses, so pivoting away and back must reproduce the original
// list byte-for-byte.  Also covers the zero-support refusal and the
// stale-response guard.

import { describe, expect, it } from "vitest";
import { Predicate, RecommendResponse, ServiceClient } from "../src/api.js";
import { ExplorerState, SENTINEL } from "../src/state.js";
import planted from "./fixtures/planted_recommend.json";

const original = planted as unknown as RecommendResponse;
const pivotTarget = original.recommendations[0];

function pivotedResponse(): RecommendResponse {
  // what the service would answer once the first recommendation becomes the
  // reference: same shape, different reference and list
  return {
    ...original,
    reference: { ...original.reference, predicate: pivotTarget.predicate },
    recommendations: original.recommendations.slice(1),
  };
}

interface FakeOptions {
  zeroSupportPmf?: boolean;
  recommendDelayMs?: (body: RecommendRequestBody) => number;
}

interface RecommendRequestBody {
  group_by: string;
  reference?: Predicate;
  delta?: number;
  eps_v?: number;
}

function fakeService(opts: FakeOptions = {}) {
  const seenBodies: RecommendRequestBody[] = [];
  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    if (url.includes("/pmf")) {
      if (opts.zeroSupportPmf) {
        return new Response(
          JSON.stringify({
            error: "tarone_zero_support",
            message: "zero-support predicate excluded (Tarone)",
          }),
          { status: 422 },
        );
      }
      return new Response(JSON.stringify({ support: pivotTarget.support }), { status: 200 });
    }
    const body = JSON.parse(String(init?.body)) as RecommendRequestBody;
    seenBodies.push(body);
    // stateless: the response depends only on the request body
    const atSentinel = (body.reference?.and ?? []).length === 0;
    const payload = atSentinel ? original : pivotedResponse();
    const delay = opts.recommendDelayMs?.(body) ?? 0;
    if (delay) await new Promise((r) => setTimeout(r, delay));
    return new Response(JSON.stringify(payload), { status: 200 });
  }) as typeof fetch;
  return { client: new ServiceClient("http://fake", fetchImpl), seenBodies };
}

describe("pivot round trip", () => {
  it("pivot then back reproduces the original recommendation list", async () => {
    const { client } = fakeService();
    const state = new ExplorerState(client, "ds-1", "X0");
    await state.refresh();
    const before = JSON.stringify(state.current);

    await state.pivotTo(pivotTarget);
    expect(state.current!.reference.predicate).toEqual(pivotTarget.predicate);
    expect(state.current!.recommendations).toHaveLength(original.recommendations.length - 1);
    expect(state.canGoBack).toBe(true);

    await state.back();
    expect(JSON.stringify(state.current)).toBe(before);
    expect(state.reference).toEqual(SENTINEL);
    expect(state.canGoBack).toBe(false);
  });

  it("delta and eps_v carry over across pivots", async () => {
    const { client, seenBodies } = fakeService();
    const state = new ExplorerState(client, "ds-1", "X0", { delta: 0.01, epsV: 0.2 });
    await state.refresh();
    await state.pivotTo(pivotTarget);
    await state.back();
    expect(seenBodies).toHaveLength(3);
    for (const body of seenBodies) {
      expect(body.delta).toBe(0.01);
      expect(body.eps_v).toBe(0.2);
    }
  });

  it("zero-support pivot is refused with a notice and keeps the view", async () => {
    const { client, seenBodies } = fakeService({ zeroSupportPmf: true });
    const state = new ExplorerState(client, "ds-1", "X0");
    await state.refresh();
    const before = state.current;

    await state.pivotTo(pivotTarget);
    expect(state.notice).toContain("Tarone");
    expect(state.current).toBe(before);
    expect(state.reference).toEqual(SENTINEL);
    expect(state.canGoBack).toBe(false);
    expect(seenBodies).toHaveLength(1); // no second recommend request was made
  });

  it("a stale slow response never overwrites a newer one", async () => {
    const { client } = fakeService({
      // first request (sentinel reference) is slow, the pivoted one is fast
      recommendDelayMs: (body) => ((body.reference?.and ?? []).length === 0 ? 30 : 0),
    });
    const state = new ExplorerState(client, "ds-1", "X0");
    const slow = state.refresh();
    state.reference = pivotTarget.predicate;
    await state.refresh();
    await slow;
    expect(state.current!.reference.predicate).toEqual(pivotTarget.predicate);
  });
});
