import { describe, expect, it } from "vitest";

import type { AskResponse, SessionTranscript } from "../src/api.js";
import {
  applyAsk,
  applyAskError,
  emptyView,
  selectedCount,
  transitions,
  viewFromTranscript,
} from "../src/state.js";

const firstAsk: AskResponse = {
  answer: "about thirty thousand",
  cg: {
    entries: [
      { origin_turn: 0, status: "selected", surface: "the average starting salary" },
      { origin_turn: 0, status: "selected", surface: "a physician assistant" },
      { origin_turn: 0, status: "selected", surface: "the UK" },
    ],
  },
  mu: 0.5,
  passages: [{ passage_id: "salary-p0", rank: 1, s_ret_norm: 1.0 }],
};

const secondAsk: AskResponse = {
  answer: "about ninety five thousand",
  cg: {
    entries: [
      { origin_turn: 0, status: "selected", surface: "the average starting salary" },
      { origin_turn: 0, status: "selected", surface: "a physician assistant" },
      { origin_turn: 0, status: "retained", surface: "the UK" },
      { origin_turn: 1, status: "selected", surface: "the US" },
    ],
  },
  mu: 0.5,
  passages: [{ passage_id: "salary-p1", rank: 1, s_ret_norm: 1.0 }],
};

describe("applyAsk", () => {
  it("appends a user and a system bubble per turn", () => {
    let view = emptyView("s1");
    view = applyAsk(view, "first question?", firstAsk);
    view = applyAsk(view, "second question?", secondAsk);
    expect(view.messages.map((m) => m.role)).toEqual(["user", "system", "user", "system"]);
    expect(view.messages[1].text).toBe("about thirty thousand");
    expect(view.messages[1].passages?.[0].passage_id).toBe("salary-p0");
  });

  it("mirrors the latest response exactly and never recomputes statuses", () => {
    let view = emptyView("s1");
    view = applyAsk(view, "q1", firstAsk);
    expect(selectedCount(view)).toBe(3);
    view = applyAsk(view, "q2", secondAsk);
    expect(view.cgPanel).toEqual(secondAsk.cg.entries);
    expect(selectedCount(view)).toBe(3);
    const uk = view.cgPanel.find((e) => e.surface === "the UK");
    expect(uk?.status).toBe("retained");
    expect(uk?.origin_turn).toBe(0);
  });

  it("does not mutate the previous view", () => {
    const before = applyAsk(emptyView("s1"), "q1", firstAsk);
    const frozenLength = before.messages.length;
    applyAsk(before, "q2", secondAsk);
    expect(before.messages.length).toBe(frozenLength);
    expect(before.cgPanel).toEqual(firstAsk.cg.entries);
  });
});

describe("applyAskError", () => {
  it("keeps the session usable after an inline error bubble", () => {
    let view = emptyView("s1");
    view = applyAskError(view, "q1", "model backend failed");
    expect(view.messages.map((m) => m.role)).toEqual(["user", "error"]);
    view = applyAsk(view, "q2", firstAsk);
    expect(view.cgPanel.length).toBe(3);
  });
});

describe("viewFromTranscript", () => {
  it("reproduces the incrementally built view exactly", () => {
    let incremental = emptyView("s1", null);
    incremental = applyAsk(incremental, "q1", firstAsk);
    incremental = applyAsk(incremental, "q2", secondAsk);

    const transcript: SessionTranscript = {
      created_at: 1,
      doc: null,
      last_active: 2,
      session_id: "s1",
      turns: [
        {
          answer: firstAsk.answer,
          cg_full: firstAsk.cg.entries,
          cg_selected: firstAsk.cg.entries.filter((e) => e.status === "selected"),
          mu: 0.5,
          passages: firstAsk.passages,
          question: "q1",
        },
        {
          answer: secondAsk.answer,
          cg_full: secondAsk.cg.entries,
          cg_selected: secondAsk.cg.entries.filter((e) => e.status === "selected"),
          mu: 0.5,
          passages: secondAsk.passages,
          question: "q2",
        },
      ],
    };
    expect(viewFromTranscript(transcript)).toEqual(incremental);
  });

  it("carries the doc card through", () => {
    const transcript: SessionTranscript = {
      created_at: 0,
      doc: { first_sentence: "Albert Camus was a writer.", title: "Albert Camus" },
      last_active: 0,
      session_id: "s2",
      turns: [],
    };
    expect(viewFromTranscript(transcript).doc?.title).toBe("Albert Camus");
  });
});

describe("transitions", () => {
  it("classifies added, flipped and unchanged entries", () => {
    const moves = transitions(firstAsk.cg.entries, secondAsk.cg.entries);
    expect(moves.get("the US")).toBe("added");
    expect(moves.get("the UK")).toBe("now-retained");
    expect(moves.get("the average starting salary")).toBe("unchanged");
  });

  it("marks re-selected entries", () => {
    const before = [{ origin_turn: 0, status: "retained" as const, surface: "x" }];
    const after = [{ origin_turn: 0, status: "selected" as const, surface: "x" }];
    expect(transitions(before, after).get("x")).toBe("now-selected");
  });
});
