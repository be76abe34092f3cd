// HTML renderers for the comparison pane and the recommendation list.
// Bars always show probabilities (the service only ever sends pmfs, never
// counts) and the safe/not-safe badge is copied verbatim from the service
// response -- the UI draws it but does not decide it.

import { Pmf, Predicate, Recommendation, ReferenceView } from "./api.js";

const BAR_SCALE = 220; // px for probability 1.0

export function formatPredicate(pred: Predicate): string {
  if (pred.and.length === 0) return "TRUE";
  return pred.and
    .map((d) => d.or.map((c) => `${d.feature} ${c.op} ${c.value}`).join(" or "))
    .join(" and ");
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderBadge(safe: boolean): string {
  const cls = safe ? "badge safe" : "badge unsafe";
  const label = safe ? "SAFE" : "NOT SAFE";
  return `<span class="${cls}" data-safe="${safe}">${label}</span>`;
}

function barPair(value: number, refProb: number, candProb: number, band: number): string {
  const refPx = Math.round(refProb * BAR_SCALE);
  const candPx = Math.round(candProb * BAR_SCALE);
  // the uncertainty band straddles the reference bar tip: eps_ref + eps_cand wide
  const bandPx = Math.round(Math.min(band, 1) * BAR_SCALE);
  const bandLeft = Math.max(refPx - bandPx, 0);
  return `
    <div class="bar-row">
      <span class="bar-label">${esc(String(value))}</span>
      <div class="bar-track">
        <div class="bar ref" style="width:${refPx}px" title="${refProb.toFixed(4)}"></div>
        <div class="band" style="left:${bandLeft}px;width:${Math.min(refPx + bandPx, BAR_SCALE) - bandLeft}px"></div>
      </div>
      <div class="bar-track">
        <div class="bar cand" style="width:${candPx}px" title="${candProb.toFixed(4)}"></div>
      </div>
    </div>`;
}

/**
 * Paired bar chart: reference pmf vs candidate pmf over the shared support,
 * with the summed deviation bound drawn as a band around the reference bars
 * and the service's verdict as a badge.
 */
export function renderComparison(reference: ReferenceView, rec: Recommendation): string {
  const band = rec.epsilon_ref + rec.epsilon_cand;
  const rows = reference.pmf.support_values
    .map((v, i) => barPair(v, reference.pmf.probs[i], rec.pmf.probs[i], band))
    .join("");
  return `
  <div class="comparison" data-distance="${rec.distance}">
    <div class="comparison-head">
      <code>${esc(formatPredicate(rec.predicate))}</code> vs
      <code>${esc(formatPredicate(reference.predicate))}</code>
      ${renderBadge(rec.safe)}
    </div>
    <div class="comparison-meta">
      distance ${rec.distance.toFixed(4)},
      band ±${band.toFixed(4)},
      support ${rec.support}
    </div>
    ${rows}
  </div>`;
}

export function renderReferenceOnly(reference: ReferenceView): string {
  const rows = reference.pmf.support_values
    .map((v, i) => {
      const px = Math.round(reference.pmf.probs[i] * BAR_SCALE);
      return `
    <div class="bar-row">
      <span class="bar-label">${esc(String(v))}</span>
      <div class="bar-track">
        <div class="bar ref" style="width:${px}px" title="${reference.pmf.probs[i].toFixed(4)}"></div>
      </div>
    </div>`;
    })
    .join("");
  return `<div class="comparison"><div class="comparison-head">
    <code>${esc(formatPredicate(reference.predicate))}</code></div>${rows}</div>`;
}

export function renderRecommendationList(recs: Recommendation[]): string {
  if (recs.length === 0) {
    return `<p class="empty">No safe recommendations for this view.</p>`;
  }
  const items = recs
    .map(
      (rec, i) => `
    <li class="rec" data-index="${i}">
      <code>${esc(formatPredicate(rec.predicate))}</code>
      ${renderBadge(rec.safe)}
      <span class="interest">interest ${rec.interest.toFixed(4)}</span>
      <button class="pivot" data-index="${i}">pivot</button>
    </li>`,
    )
    .join("");
  return `<ol class="rec-list">${items}</ol>`;
}

export function extractBadges(html: string): boolean[] {
  // parse the data-safe attributes back out; used by tests and by the
  // badge-consistency assertion below
  const out: boolean[] = [];
  const re = /data-safe="(true|false)"/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(html)) !== null) out.push(m[1] === "true");
  return out;
}

export function probabilitiesSumToOne(pmf: Pmf): boolean {
  const total = pmf.probs.reduce((a, b) => a + b, 0);
  return Math.abs(total - 1) < 1e-9;
}
