// Scorecard panel: itemized components, YES/NO checklist badges, and an
// arithmetic total line that must agree with the server's numbers.

import { el } from "./dom.js";
import type { Breakdown } from "./types.js";

/** Total as the sum of displayed (rounded) components; parity-checked
 * against the server's total_display before rendering. */
export function displayedTotal(breakdown: Breakdown): number {
  return breakdown.components.reduce((acc, c) => acc + c.display, 0);
}

export function arithmeticLine(breakdown: Breakdown): string {
  const terms = breakdown.components
    .map((c) => (c.display >= 0 ? `+${c.display}` : `${c.display}`))
    .join("");
  return `${terms}=${displayedTotal(breakdown)}`;
}

export function renderScorecard(breakdown: Breakdown): HTMLElement {
  if (displayedTotal(breakdown) !== breakdown.total_display) {
    throw new Error("scorecard total does not match its components");
  }
  const panel = el("div", { class: "scorecard" });
  if (breakdown.conflicts?.length) {
    panel.append(el("h4", {}, ["Conflicting meetings"]));
    for (const c of breakdown.conflicts) {
      panel.append(
        el("div", { class: "conflict" }, [`(${c.importance}) | ${c.times}`]),
      );
    }
  }
  const list = el("div", { class: "components" });
  for (const c of breakdown.components) {
    if (c.kind === "checklist") continue;
    const row = el("div", { class: `component ${c.kind}` }, [
      el("span", { class: "score" }, [`(score: ${c.display})`]),
      " ",
      el("span", { class: "label" }, [c.label]),
    ]);
    for (const d of c.detail) row.append(el("div", { class: "detail" }, [d]));
    list.append(row);
  }
  panel.append(list);
  const checklist = breakdown.components.filter((c) => c.kind === "checklist");
  if (checklist.length) {
    panel.append(el("h4", {}, ["Overall Checklist"]));
    for (const c of checklist) {
      const badge = el(
        "span",
        { class: `badge ${c.satisfied ? "yes" : "no"}` },
        [c.satisfied ? "YES" : "NO"],
      );
      panel.append(
        el("div", { class: "checklist-row" }, [
          badge,
          ` (score: ${c.display}) ${c.label}`,
        ]),
      );
    }
  }
  panel.append(
    el("div", { class: "total" }, [`TOTAL SCORE: ${arithmeticLine(breakdown)}`]),
  );
  return panel;
}

export function renderFinalBanner(score: number | undefined, status: string): HTMLElement {
  const text =
    status === "accepted" && score !== undefined
      ? `Final score: ${score}`
      : `Session ended: ${status}`;
  return el("div", { class: "final-banner", "data-final-score": String(score ?? "") }, [
    text,
  ]);
}
