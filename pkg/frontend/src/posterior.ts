/** Live posterior panel: per-source and combined sector-size estimates. */

import type { EstimateResponse, SourceEstimate } from "./types.js";

export function formatCount(value: number): string {
  return Math.round(value).toLocaleString("en-US");
}

export function formatInterval(ci: [number, number]): string {
  return `${formatCount(ci[0])}–${formatCount(ci[1])}`;
}

export function sourceLine(est: SourceEstimate): string {
  const rate = est.alpha + est.beta - 2 > 0
    ? ` (TP ${est.alpha - 1} / FP ${est.beta - 1})`
    : " (no labels yet)";
  return (
    `${est.source}: ${formatCount(est.median)} of ${formatCount(est.n_candidates)}` +
    ` flagged, 95% CI ${formatInterval(est.ci95)}${rate}`
  );
}

export function renderPosteriorPanel(estimate: EstimateResponse): string {
  const perSource = estimate.per_source
    .map((s) => `<li>${sourceLine(s)}</li>`)
    .join("");
  return (
    `<div class="posterior">` +
    `<p class="combined">Estimated unlicensed providers: ` +
    `<strong>${formatCount(estimate.combined.median)}</strong> ` +
    `(95% CI ${formatInterval(estimate.combined.ci95)})</p>` +
    `<ul>${perSource}</ul>` +
    `<p class="mc">${estimate.combined.n_mc.toLocaleString("en-US")} Monte Carlo draws,` +
    ` seed ${estimate.combined.seed}</p>` +
    `</div>`
  );
}
