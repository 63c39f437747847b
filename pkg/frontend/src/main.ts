// App wiring: join a session with a ticket, keep the view model in sync via
// polling, and mount the task-specific panels. mountSession() resolves when
// the session leaves the live state, which is also what the end-to-end tests
// await.

import { ApiError, Client } from "./api.js";
import { clearAndMount, renderChat, renderStatus } from "./chat.js";
import { clear, el } from "./dom.js";
import { renderFinalBanner, renderScorecard } from "./scorecard.js";
import { FrameSync, pollLoop } from "./sync.js";
import type { ActionBody, ActionKind } from "./types.js";
import { SessionViewModel } from "./viewmodel.js";
import { MatchingBoard } from "./views/matching.js";
import { ItineraryBoard, renderSiteMap } from "./views/itinerary.js";
import { FlightPicker, renderUserPanel } from "./views/mediation.js";

export interface MountOptions {
  pollIntervalMs?: number;
  sleeper?: (ms: number) => Promise<void>;
  onRender?: (vm: SessionViewModel) => void;
}

export async function mountSession(
  host: HTMLElement,
  client: Client,
  sessionId: string,
  token: string,
  opts: MountOptions = {},
): Promise<SessionViewModel> {
  const view = await client.view(sessionId, token);
  const vm = new SessionViewModel(view.role, view);
  vm.connection = "live";

  let legal: ActionKind[] = view.legal;
  let yourTurn = view.your_turn;

  // proposal builders persist across re-renders
  let matchingBoard: MatchingBoard | null = null;
  let itineraryBoard: ItineraryBoard | null = null;
  let siteMap: HTMLElement | null = null;
  let flightPicker: FlightPicker | null = null;
  if (view.view.task === "matching") {
    matchingBoard = new MatchingBoard(view.view, () => render());
  } else if (view.view.task === "itinerary" && view.view.role === "assistant") {
    const board = new ItineraryBoard(view.view, () => render());
    itineraryBoard = board;
    siteMap = renderSiteMap(view.view, (site) => board.assign(site.name));
  } else if (view.view.task === "mediation" && "users" in view.view) {
    flightPicker = new FlightPicker(view.view, () => render());
  }

  const send = async (action: ActionBody): Promise<void> => {
    try {
      await client.act(sessionId, token, action);
    } catch (err) {
      if (err instanceof ApiError && err.retriable) {
        renderError(err.message);
        return;
      }
      throw err;
    }
    const res = await client.events(sessionId, token, sync.lastSeq);
    sync.push(res.frames);
    yourTurn = res.your_turn;
    await refreshLegal();
    render();
  };

  const buildProposal = (): ActionBody | null => {
    if (matchingBoard?.complete()) {
      return { kind: "propose", proposal: matchingBoard.proposal() };
    }
    if (itineraryBoard) {
      return { kind: "propose", proposal: itineraryBoard.proposal() };
    }
    if (flightPicker) {
      return { kind: "propose", proposal: flightPicker.proposal() };
    }
    return null;
  };

  const refreshLegal = async (): Promise<void> => {
    if (vm.status !== "live") {
      legal = [];
      return;
    }
    const fresh = await client.view(sessionId, token);
    legal = fresh.legal;
    yourTurn = fresh.your_turn;
  };

  const renderError = (message: string): void => {
    const note = el("div", { class: "error" }, [message]);
    host.querySelector(".chat")?.append(note);
  };

  const render = (): void => {
    const panels: HTMLElement[] = [renderStatus(vm)];
    const v = view.view;
    if (v.task === "matching" && matchingBoard) {
      panels.push(matchingBoard.root);
    } else if (v.task === "itinerary") {
      if (v.role === "user") {
        const prefs = el("div", { class: "preferences" },
          v.preferences.map((p) => el("div", { class: "pref" }, [p])));
        panels.push(prefs);
      } else if (siteMap && itineraryBoard) {
        panels.push(siteMap, itineraryBoard.root);
      }
    } else if (v.task === "mediation") {
      if (v.role === "assistant" && flightPicker) {
        panels.push(flightPicker.root);
      } else if (v.role !== "assistant") {
        panels.push(renderUserPanel(v as never));
      }
    }
    if (vm.scorecard) panels.push(renderScorecard(vm.scorecard));
    const respondable: ActionKind[] =
      vm.status === "live" && yourTurn ? legal : [];
    panels.push(
      renderChat(vm, respondable, {
        send,
        buildProposal,
        recipients:
          v.task === "mediation" && v.role === "assistant"
            ? ["user-0", "user-1"]
            : undefined,
      }),
    );
    if (vm.status !== "live") {
      panels.push(renderFinalBanner(vm.finalScore, vm.status));
    }
    clearAndMount(host, ...panels);
    opts.onRender?.(vm);
  };

  const sync = new FrameSync((frame) => {
    vm.apply(frame);
    render();
  });

  render();
  const status = await pollLoop(
    async (since) => {
      const res = await client.events(sessionId, token, since);
      yourTurn = res.your_turn;
      if (res.status === "live" && res.your_turn) await refreshLegal();
      return res;
    },
    sync,
    { intervalMs: opts.pollIntervalMs ?? 250, sleeper: opts.sleeper },
  );
  vm.status = status as SessionViewModel["status"];
  vm.connection = "closed";
  await refreshLegal();
  render();
  return vm;
}

function param(name: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? "";
}

export async function bootstrap(): Promise<void> {
  const host = document.getElementById("app");
  if (!host) return;
  const sessionId = param("session");
  const token = param("token");
  if (!sessionId || !token) {
    clear(host);
    host.append(
      el("div", { class: "join-help" }, [
        "Append ?session=<id>&token=<ticket> to join a session. ",
        "Create one with POST /sessions.",
      ]),
    );
    return;
  }
  await mountSession(host, new Client(""), sessionId, token);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void bootstrap();
}
