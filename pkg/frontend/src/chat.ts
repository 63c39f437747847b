// Chat column: transcript, composer, accept/reject controls when a proposal
// is pending, and the propose button for roles that may propose.

import { clear, el } from "./dom.js";
import type { SessionViewModel } from "./viewmodel.js";
import type { ActionBody, ActionKind } from "./types.js";

export interface ChatCallbacks {
  send: (action: ActionBody) => Promise<void>;
  buildProposal?: () => ActionBody | null;
  recipients?: string[]; // mediation assistant must address a user
}

export function renderChat(
  vm: SessionViewModel,
  legal: ActionKind[],
  cb: ChatCallbacks,
): HTMLElement {
  const root = el("div", { class: "chat" });
  const log = el("div", { class: "transcript" });
  for (const line of vm.transcript) {
    log.append(
      el("div", { class: `line ${line.kind}` }, [
        el("span", { class: "sender" }, [line.sender]),
        `: [${line.kind}] ${line.text}`,
      ]),
    );
  }
  root.append(log);

  if (vm.status !== "live") {
    return root;
  }

  if (legal.includes("accept")) {
    const accept = el("button", { class: "accept" }, ["Accept"]);
    const reject = el("button", { class: "reject" }, ["Reject"]);
    accept.addEventListener("click", () => void cb.send({ kind: "accept" }));
    reject.addEventListener("click", () => void cb.send({ kind: "reject" }));
    root.append(el("div", { class: "respond" }, [accept, reject]));
    return root; // a pending proposal admits only accept / reject
  }

  const input = el("input", { class: "composer", placeholder: "message" });
  const send = el("button", { class: "send" }, ["Send"]);
  let recipientPick: HTMLSelectElement | null = null;
  if (cb.recipients?.length) {
    recipientPick = el("select", { class: "recipient" });
    for (const r of cb.recipients) {
      recipientPick.append(el("option", { value: r }, [r]));
    }
    root.append(recipientPick);
  }
  send.addEventListener("click", () => {
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    void cb.send({
      kind: "message",
      text,
      recipient: recipientPick ? recipientPick.value : null,
    });
  });
  root.append(input, send);

  if (legal.includes("propose") && cb.buildProposal) {
    const proposeBtn = el("button", { class: "propose" }, ["Propose"]);
    proposeBtn.addEventListener("click", () => {
      const action = cb.buildProposal!();
      if (action) void cb.send(action);
    });
    root.append(proposeBtn);
  }
  return root;
}

export function renderStatus(vm: SessionViewModel): HTMLElement {
  return el("div", { class: `status ${vm.connection}` }, [
    `status: ${vm.status} (${vm.connection})`,
  ]);
}

export function clearAndMount(host: HTMLElement, ...nodes: HTMLElement[]): void {
  clear(host);
  for (const n of nodes) host.append(n);
}
