// Wire types for the session service. The UI consumes only these shapes;
// nothing outside them is ever read (enforced at runtime by guard.ts).

export type Task = "matching" | "itinerary" | "mediation";

export type ActionKind = "message" | "think" | "propose" | "accept" | "reject";

export interface Ticket {
  sessionId: string;
  token: string;
}

export interface CreateSessionResponse {
  session_id: string;
  task: Task;
  seed: number;
  actors: string[];
  tickets: Record<string, string>;
}

export interface ViewResponse {
  role: string;
  task: Task;
  status: "live" | "accepted" | "capped";
  observation: string;
  view: TaskView;
  your_turn: boolean;
  legal: ActionKind[];
}

export interface MatchingView {
  task: "matching";
  role: string;
  k: number;
  reviewers: string[];
  papers: string[];
  cells: [number, number, number][];
  display: { scaled: boolean };
}

export interface SiteDoc {
  name: string;
  category: string;
  loc: [number, number];
  price: number;
  features: Record<string, boolean | number | string>;
}

export interface ItineraryUserView {
  task: "itinerary";
  role: "user";
  k: number;
  preferences: string[];
}

export interface ItineraryAssistantView {
  task: "itinerary";
  role: "assistant";
  k: number;
  sites: SiteDoc[];
}

export interface FlightDoc {
  id: number;
  carrier: string;
  price: number;
  times: string;
}

export interface CalendarEntry {
  id: number;
  importance?: number;
  times: string;
}

export interface MediationUserView {
  task: "mediation";
  role: string;
  flights: FlightDoc[];
  personal_calendar: CalendarEntry[];
  shared_calendar: CalendarEntry[];
}

export interface MediationAssistantView {
  task: "mediation";
  role: "assistant";
  users: { flights: FlightDoc[]; work_calendar: CalendarEntry[] }[];
}

export type TaskView =
  | MatchingView
  | ItineraryUserView
  | ItineraryAssistantView
  | MediationUserView
  | MediationAssistantView;

export interface BreakdownComponent {
  label: string;
  value: number;
  kind: string;
  satisfied: boolean | null;
  detail: string[];
  display: number;
}

export interface Breakdown {
  task: Task;
  components: BreakdownComponent[];
  total: number;
  total_display: number;
  conflicts?: { importance: number; times: string }[];
}

export type Proposal =
  | { kind: "matching"; reviewer_for_paper: number[] }
  | { kind: "itinerary"; sites: (string | null)[] }
  | { kind: "mediation"; flights: Record<string, number> };

export interface Frame {
  seq: number;
  type: "chat" | "proposal" | "response" | "feedback" | "termination";
  sender?: string;
  recipient?: string | null;
  kind?: string;
  text?: string;
  payload?: Proposal;
  rendered?: string;
  breakdown?: Breakdown;
  status?: string;
  final_score?: number;
}

export interface EventsResponse {
  frames: Frame[];
  status: "live" | "accepted" | "capped";
  your_turn: boolean;
}

export interface ActionBody {
  kind: ActionKind;
  text?: string;
  recipient?: string | null;
  proposal?: Proposal;
}
