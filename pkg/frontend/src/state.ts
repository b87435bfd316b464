// Pure view-model. The rendered view is a function of the API responses
// alone, so rebuilding it from GET /v1/sessions/{id} after a reload yields
// exactly the same state as applying the ask responses one by one.

import type {
  AskResponse,
  CgEntryDto,
  DocCard,
  PassageRef,
  SessionTranscript,
} from "./api.js";

export type Role = "user" | "system" | "error";

export interface Message {
  role: Role;
  text: string;
  passages?: PassageRef[];
}

export interface UiSessionView {
  sessionId: string;
  doc: DocCard | null;
  messages: Message[];
  cgPanel: CgEntryDto[];
}

export type Transition = "added" | "now-selected" | "now-retained" | "unchanged";

export function emptyView(sessionId: string, doc: DocCard | null = null): UiSessionView {
  return { sessionId, doc, messages: [], cgPanel: [] };
}

export function applyAsk(
  view: UiSessionView,
  question: string,
  response: AskResponse,
): UiSessionView {
  return {
    ...view,
    messages: [
      ...view.messages,
      { role: "user", text: question },
      { role: "system", text: response.answer, passages: response.passages },
    ],
    // mirror the latest response exactly; never recompute statuses locally
    cgPanel: response.cg.entries.map((entry) => ({ ...entry })),
  };
}

export function applyAskError(
  view: UiSessionView,
  question: string,
  message: string,
): UiSessionView {
  return {
    ...view,
    messages: [
      ...view.messages,
      { role: "user", text: question },
      { role: "error", text: message },
    ],
  };
}

export function viewFromTranscript(transcript: SessionTranscript): UiSessionView {
  let view = emptyView(transcript.session_id, transcript.doc);
  for (const turn of transcript.turns) {
    view = applyAsk(view, turn.question, {
      answer: turn.answer,
      cg: { entries: turn.cg_full },
      mu: turn.mu,
      passages: turn.passages,
    });
  }
  return view;
}

/** Per-entry change between two panel states, for the render-time animations. */
export function transitions(
  previous: CgEntryDto[],
  next: CgEntryDto[],
): Map<string, Transition> {
  const before = new Map(previous.map((e) => [e.surface, e.status]));
  const result = new Map<string, Transition>();
  for (const entry of next) {
    const old = before.get(entry.surface);
    if (old === undefined) {
      result.set(entry.surface, "added");
    } else if (old === entry.status) {
      result.set(entry.surface, "unchanged");
    } else {
      result.set(entry.surface, entry.status === "selected" ? "now-selected" : "now-retained");
    }
  }
  return result;
}

export function selectedCount(view: UiSessionView): number {
  return view.cgPanel.filter((e) => e.status === "selected").length;
}
