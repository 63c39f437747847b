// Mediation views: a three-day calendar with event blocks plus the flight
// list. Users see importances on their own events and pick nothing (no
// proposal controls); the assistant sees both users' work calendars and
// flight lists and selects one flight per user.

import { clear, el } from "../dom.js";
import type {
  CalendarEntry,
  FlightDoc,
  MediationAssistantView,
  MediationUserView,
  Proposal,
} from "../types.js";

export function renderCalendar(
  entries: CalendarEntry[],
  title: string,
): HTMLElement {
  const root = el("div", { class: "calendar" }, [el("h4", {}, [title])]);
  for (const e of entries) {
    const label =
      e.importance !== undefined ? `(${e.importance}) | ${e.times}` : e.times;
    root.append(el("div", { class: "event" }, [label]));
  }
  return root;
}

export function renderFlightList(
  flights: FlightDoc[],
  onPick?: (f: FlightDoc) => void,
): HTMLElement {
  const root = el("table", { class: "flights" });
  root.append(
    el("tr", {}, ["id", "carrier", "price", "times"].map((h) => el("th", {}, [h]))),
  );
  for (const f of flights) {
    const row = el("tr", { class: "flight", "data-flight": String(f.id) }, [
      el("td", {}, [String(f.id)]),
      el("td", {}, [f.carrier]),
      el("td", {}, [String(f.price)]),
      el("td", {}, [f.times]),
    ]);
    if (onPick) {
      row.classList.add("pickable");
      row.addEventListener("click", () => onPick(f));
    }
    root.append(row);
  }
  return root;
}

export function renderUserPanel(view: MediationUserView): HTMLElement {
  // user role: flights and calendars only; no proposal controls exist here
  return el("div", { class: "mediation-user" }, [
    renderFlightList(view.flights),
    renderCalendar(view.personal_calendar, "Private calendar"),
    renderCalendar(view.shared_calendar, "Shared calendar (visible to assistant)"),
  ]);
}

export class FlightPicker {
  readonly picks: Record<string, number | undefined> = {};
  readonly root: HTMLElement;

  constructor(
    private view: MediationAssistantView,
    private onChange: (picker: FlightPicker) => void = () => {},
  ) {
    this.root = el("div", { class: "mediation-assistant" });
    this.render();
  }

  pick(user: string, flightId: number): void {
    this.picks[user] = flightId;
    this.refresh();
    this.onChange(this);
  }

  /** Proposal for whichever users have a pick; may be partial. */
  proposal(): Proposal {
    const flights: Record<string, number> = {};
    for (const [user, id] of Object.entries(this.picks)) {
      if (id !== undefined) flights[user] = id;
    }
    return { kind: "mediation", flights };
  }

  complete(): boolean {
    return this.view.users.every((_, i) => this.picks[`user-${i}`] !== undefined);
  }

  private render(): void {
    clear(this.root);
    this.view.users.forEach((u, i) => {
      const user = `user-${i}`;
      const panel = el("div", { class: "user-panel", "data-user": user }, [
        el("h3", {}, [`User ${i}`]),
        renderFlightList(u.flights, (f) => this.pick(user, f.id)),
        renderCalendar(u.work_calendar, "Work calendar"),
      ]);
      this.root.append(panel);
    });
    this.refresh();
  }

  private refresh(): void {
    this.root.querySelectorAll(".user-panel").forEach((panel) => {
      const user = (panel as HTMLElement).dataset.user!;
      panel.querySelectorAll(".flight").forEach((row) => {
        const id = Number((row as HTMLElement).dataset.flight);
        row.classList.toggle("picked", this.picks[user] === id);
      });
    });
  }
}
