// View state for the explorer.  The reference predicate, the group-by column
// and the per-request knobs (delta, eps_v, one_sample) live here; every change
// re-issues a recommend request against the stateless service.  Responses are
// tagged with a token so a slow reply for an old view can never clobber the
// current one.

import {
  ApiError,
  Predicate,
  RecommendRequest,
  RecommendResponse,
  Recommendation,
  ServiceClient,
} from "./api.js";

export const SENTINEL: Predicate = { and: [] };

export interface ViewOptions {
  delta?: number;
  epsV?: number;
  oneSample?: boolean;
}

export class ExplorerState {
  current: RecommendResponse | null = null;
  notice: string | null = null;
  reference: Predicate = SENTINEL;
  private history: Predicate[] = [];
  private token = 0;

  constructor(
    private readonly client: ServiceClient,
    readonly datasetId: string,
    readonly groupBy: string,
    readonly options: ViewOptions = {},
    private readonly onChange: () => void = () => {},
  ) {}

  private buildRequest(reference: Predicate): RecommendRequest {
    const req: RecommendRequest = { group_by: this.groupBy, reference };
    if (this.options.delta !== undefined) req.delta = this.options.delta;
    if (this.options.epsV !== undefined) req.eps_v = this.options.epsV;
    if (this.options.oneSample !== undefined) req.one_sample = this.options.oneSample;
    return req;
  }

  /** Re-issue the recommend request for the current reference. */
  async refresh(): Promise<void> {
    const mine = ++this.token;
    const response = await this.client.recommend(this.datasetId, this.buildRequest(this.reference));
    if (mine !== this.token) return; // a newer request superseded this one
    this.current = response;
    this.onChange();
  }

  /**
   * Make a recommended candidate the new reference.  The per-request knobs
   * carry over unchanged.  A pivot target the service rejects as zero-support
   * is refused with a notice and the current view is kept.
   */
  async pivotTo(rec: Recommendation): Promise<void> {
    this.notice = null;
    try {
      await this.client.pmf(this.datasetId, this.groupBy, rec.predicate);
    } catch (err) {
      if (err instanceof ApiError && err.code === "tarone_zero_support") {
        this.notice = `Cannot pivot: ${err.message}`;
        this.onChange();
        return;
      }
      throw err;
    }
    this.history.push(this.reference);
    this.reference = rec.predicate;
    await this.refresh();
  }

  get canGoBack(): boolean {
    return this.history.length > 0;
  }

  /** Return to the previous reference; the service recomputes the same list. */
  async back(): Promise<void> {
    const prev = this.history.pop();
    if (prev === undefined) return;
    this.notice = null;
    this.reference = prev;
    await this.refresh();
  }
}
