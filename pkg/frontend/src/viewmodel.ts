// Session view-model: folds role-filtered frames into renderable state.
// Everything here is derived from frames and the role view; there is no
// other source of truth client-side.

import { assertNoHiddenState } from "./guard.js";
import type { Breakdown, Frame, Proposal, ViewResponse } from "./types.js";

export interface ChatLine {
  sender: string;
  kind: string;
  text: string;
}

export class SessionViewModel {
  readonly transcript: ChatLine[] = [];
  pendingProposal: { sender: string; payload: Proposal; rendered: string } | null =
    null;
  scorecard: Breakdown | null = null;
  finalScore: number | undefined;
  status: "live" | "accepted" | "capped" = "live";
  connection: "connecting" | "live" | "closed" = "connecting";

  constructor(
    public readonly role: string,
    public readonly view: ViewResponse,
  ) {
    assertNoHiddenState(role, view);
  }

  apply(frame: Frame): void {
    assertNoHiddenState(this.role, frame);
    switch (frame.type) {
      case "chat":
        this.transcript.push({
          sender: frame.sender ?? "?",
          kind: frame.kind ?? "message",
          text: frame.text ?? "",
        });
        break;
      case "proposal":
        this.pendingProposal = {
          sender: frame.sender ?? "?",
          payload: frame.payload!,
          rendered: frame.rendered ?? "",
        };
        this.transcript.push({
          sender: frame.sender ?? "?",
          kind: "propose",
          text: frame.rendered ?? "",
        });
        if (frame.text) {
          this.transcript.push({
            sender: frame.sender ?? "?",
            kind: "message",
            text: frame.text,
          });
        }
        break;
      case "response":
        this.transcript.push({
          sender: frame.sender ?? "?",
          kind: frame.kind ?? "response",
          text: "",
        });
        if (frame.kind === "reject") this.pendingProposal = null;
        break;
      case "feedback":
        this.scorecard = frame.breakdown ?? null;
        break;
      case "termination":
        this.status = (frame.status as SessionViewModel["status"]) ?? "accepted";
        this.finalScore = frame.final_score;
        this.pendingProposal = null;
        break;
    }
  }
}
