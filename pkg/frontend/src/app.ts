/** Console wiring: review queue, ego render, feature table, score keys 1-5,
 * collapsible codebook and the live posterior panel. */

import { ApiClient } from "./client.js";
import { countRenderedNodes, renderEgoSvg } from "./ego.js";
import { renderFeatureTable } from "./featuretable.js";
import { renderPosteriorPanel } from "./posterior.js";
import { reconcile } from "./reconcile.js";
import type { DirectorPayload } from "./types.js";

interface ConsoleState {
  coderId: string;
  source: string;
  current: DirectorPayload | null;
  myScore: number | null;
}

const client = new ApiClient();
const state: ConsoleState = {
  coderId: "",
  source: "NN",
  current: null,
  myScore: null,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function renderProvenance(payload: DirectorPayload): string {
  const p = payload.provenance;
  const parts = [
    `neighbor support ${p.knn.support}${p.knn.flagged ? " (flagged)" : ""}`,
  ];
  if (p.logit.probability !== null) {
    parts.push(
      `model probability ${p.logit.probability.toFixed(3)}` +
        `${p.logit.flagged_new ? " (new flag)" : ""}`,
    );
  }
  if (p.licensed !== null) {
    parts.push(`licensed via ${p.licensed}`);
  }
  if (payload.offshore.director) {
    parts.push("director appears in offshore leaks");
  }
  if (payload.offshore.companies.length > 0) {
    parts.push(`${payload.offshore.companies.length} companies in offshore leaks`);
  }
  return parts.join(" · ");
}

async function loadNext(): Promise<void> {
  const queue = await client.queue(state.source, state.coderId);
  el("remaining").textContent = `${queue.remaining} to review`;
  if (queue.director_id === null) {
    state.current = null;
    el("director-name").textContent = "Queue finished";
    el("ego").innerHTML = "";
    el("features").innerHTML = "";
    el("provenance").textContent = "";
    return;
  }
  const payload = await client.director(queue.director_id);
  state.current = payload;
  state.myScore = null;
  el("director-name").textContent = `${payload.name} (${payload.director_id})`;
  const svg = renderEgoSvg(payload);
  if (countRenderedNodes(svg) !== payload.nodes.length) {
    throw new Error("ego render dropped nodes");
  }
  el("ego").innerHTML = svg;
  if (payload.features_raw !== null && payload.features_robust !== null) {
    el("features").innerHTML = renderFeatureTable(
      payload.features_raw,
      payload.features_robust,
    );
  } else {
    el("features").textContent = "No feature row for this director.";
  }
  el("provenance").textContent = renderProvenance(payload);
}

async function refreshEstimate(): Promise<void> {
  const estimate = await client.estimate();
  el("posterior").innerHTML = renderPosteriorPanel(estimate);
}

async function submitScore(score: number): Promise<void> {
  if (state.current === null || state.coderId === "") {
    return;
  }
  const resp = await client.submitLabel(
    state.current.director_id,
    state.coderId,
    score,
  );
  state.myScore = score;
  // Preview matches the server rule: a single score leaves the label Pending.
  const preview = reconcile(score, null);
  el("last-label").textContent =
    resp.label === preview
      ? `Recorded score ${score}; waiting for the second coder.`
      : `Recorded score ${score}; reconciled label: ${resp.label}`;
  await refreshEstimate();
  await loadNext();
}

export function start(): void {
  const coderInput = el("coder-id") as HTMLInputElement;
  const sourceSelect = el("source") as HTMLSelectElement;

  el("start").addEventListener("click", () => {
    state.coderId = coderInput.value.trim();
    state.source = sourceSelect.value;
    if (state.coderId !== "") {
      void loadNext();
      void refreshEstimate();
    }
  });

  document.addEventListener("keydown", (event) => {
    if (document.activeElement === coderInput) {
      return;
    }
    const score = Number.parseInt(event.key, 10);
    if (score >= 1 && score <= 5) {
      void submitScore(score);
    }
  });

  for (const button of Array.from(document.querySelectorAll("[data-score]"))) {
    button.addEventListener("click", () => {
      const score = Number((button as HTMLElement).dataset.score);
      void submitScore(score);
    });
  }

  el("codebook-toggle").addEventListener("click", async () => {
    const panel = el("codebook");
    if (panel.hidden) {
      if (panel.textContent === "") {
        panel.textContent = await client.codebook();
      }
      panel.hidden = false;
    } else {
      panel.hidden = true;
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("start") !== null) {
  start();
}
