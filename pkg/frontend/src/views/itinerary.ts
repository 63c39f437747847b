// Itinerary planning views. The assistant gets a map of site pins on an
// abstract canvas, a detail panel, a client-side filter box over the visible
// inventory, and a k-slot itinerary board with auto-computed travel
// distances. The user side is just the preference list; proposals arrive as
// scorecards. Slots may be left empty: they post as NULL.

import { clear, el } from "../dom.js";
import type { ItineraryAssistantView, Proposal, SiteDoc } from "../types.js";

export function distanceMiles(
  a: SiteDoc,
  b: SiteDoc,
  milesPerUnit: number,
): number {
  const dx = a.loc[0] - b.loc[0];
  const dy = a.loc[1] - b.loc[1];
  return Math.hypot(dx, dy) * milesPerUnit;
}

export function fmtMiles(miles: number): string {
  const tenths = Math.round(miles * 10);
  return tenths % 10 === 0 ? String(tenths / 10) : (tenths / 10).toFixed(1);
}

export class ItineraryBoard {
  readonly slots: (string | null)[];
  readonly root: HTMLElement;
  private milesPerUnit: number;

  constructor(
    private view: ItineraryAssistantView & { miles_per_unit?: number },
    private onChange: (board: ItineraryBoard) => void = () => {},
  ) {
    this.slots = new Array(view.k).fill(null);
    this.milesPerUnit = view.miles_per_unit ?? 69;
    this.root = el("div", { class: "itinerary-board" });
    this.render();
  }

  site(name: string): SiteDoc | undefined {
    return this.view.sites.find((s) => s.name === name);
  }

  /** Put a site into the first empty slot (or a specific one). */
  assign(name: string, slot?: number): void {
    if (this.slots.includes(name)) return; // non-NULL entries stay distinct
    const target = slot ?? this.slots.indexOf(null);
    if (target < 0 || target >= this.slots.length) return;
    this.slots[target] = name;
    this.render();
    this.onChange(this);
  }

  clearSlot(slot: number): void {
    this.slots[slot] = null;
    this.render();
    this.onChange(this);
  }

  legs(): { from: string; to: string; miles: number }[] {
    const out: { from: string; to: string; miles: number }[] = [];
    for (let i = 1; i < this.slots.length; i++) {
      const a = this.slots[i - 1];
      const b = this.slots[i];
      if (a && b) {
        out.push({
          from: a,
          to: b,
          miles: distanceMiles(this.site(a)!, this.site(b)!, this.milesPerUnit),
        });
      }
    }
    return out;
  }

  proposal(): Proposal {
    return { kind: "itinerary", sites: [...this.slots] };
  }

  private render(): void {
    clear(this.root);
    const list = el("ol", { class: "slots" });
    this.slots.forEach((name, i) => {
      const item = el("li", { class: "slot", "data-slot": String(i) }, [
        name ?? "NULL",
      ]);
      if (name) {
        const remove = el("button", { class: "remove" }, ["x"]);
        remove.addEventListener("click", () => this.clearSlot(i));
        item.append(" ", remove);
      }
      list.append(item);
    });
    this.root.append(list);
    const legs = el("div", { class: "legs" });
    for (const leg of this.legs()) {
      legs.append(
        el("div", { class: "leg" }, [
          `${leg.from} -> ${leg.to}: ${fmtMiles(leg.miles)}mi`,
        ]),
      );
    }
    this.root.append(legs);
  }
}

export function renderSiteMap(
  view: ItineraryAssistantView,
  onPick: (site: SiteDoc) => void,
): HTMLElement {
  const root = el("div", { class: "site-map-wrap" });
  const filter = el("input", {
    class: "site-filter",
    placeholder: "filter sites (name, category, feature)",
  });
  const detail = el("div", { class: "site-detail" });
  const canvas = el("div", { class: "site-map" });

  const xs = view.sites.map((s) => s.loc[0]);
  const ys = view.sites.map((s) => s.loc[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const fx = (x: number) => (x1 === x0 ? 50 : ((x - x0) / (x1 - x0)) * 100);
  const fy = (y: number) => (y1 === y0 ? 50 : ((y - y0) / (y1 - y0)) * 100);

  const pins: HTMLElement[] = view.sites.map((site) => {
    const pin = el(
      "button",
      {
        class: `pin ${site.category}`,
        "data-name": site.name,
        style: `left:${fx(site.loc[0]).toFixed(1)}%;top:${(100 - fy(site.loc[1])).toFixed(1)}%`,
        title: site.name,
      },
      [site.name],
    );
    pin.addEventListener("click", () => {
      clear(detail);
      detail.append(el("h4", {}, [`${site.name} (${site.category}, $${site.price})`]));
      for (const [k, v] of Object.entries(site.features)) {
        detail.append(el("div", { class: "feature" }, [`${k}: ${v}`]));
      }
      const add = el("button", { class: "add-to-itinerary" }, ["Add to itinerary"]);
      add.addEventListener("click", () => onPick(site));
      detail.append(add);
    });
    return pin;
  });
  pins.forEach((p) => canvas.append(p));

  filter.addEventListener("input", () => {
    const needle = filter.value.toLowerCase();
    view.sites.forEach((site, i) => {
      const hay = `${site.name} ${site.category} ${Object.entries(site.features)
        .map(([k, v]) => `${k} ${v}`)
        .join(" ")}`.toLowerCase();
      pins[i].style.display = !needle || hay.includes(needle) ? "" : "none";
    });
  });

  root.append(filter, canvas, detail);
  return root;
}
