// DOM rendering: rebuilds both panes from the view on every update.

import type { CgEntryDto } from "./api.js";
import type { Transition, UiSessionView } from "./state.js";

export interface RenderTargets {
  messages: HTMLElement;
  cgPanel: HTMLElement;
  docCard: HTMLElement;
}

function messageBubble(role: string, text: string, passages?: { passage_id: string; rank: number }[]): HTMLElement {
  const bubble = document.createElement("div");
  bubble.className = `bubble bubble-${role}`;
  const body = document.createElement("p");
  body.textContent = text || "(no answer found)";
  bubble.appendChild(body);
  if (passages && passages.length > 0) {
    const provenance = document.createElement("span");
    provenance.className = "provenance";
    provenance.textContent = `top passage: ${passages[0].passage_id}`;
    bubble.appendChild(provenance);
  }
  return bubble;
}

function cgRow(entry: CgEntryDto, transition: Transition): HTMLElement {
  const row = document.createElement("li");
  row.className = `cg-entry cg-${entry.status} cg-transition-${transition}`;
  const badge = document.createElement("span");
  badge.className = "cg-badge";
  badge.textContent = `t${entry.origin_turn}`;
  badge.title = `entered the common ground at turn ${entry.origin_turn}`;
  const surface = document.createElement("span");
  surface.className = "cg-surface";
  surface.textContent = entry.surface;
  row.append(badge, surface);
  return row;
}

export function render(
  view: UiSessionView,
  targets: RenderTargets,
  panelTransitions: Map<string, Transition>,
): void {
  targets.docCard.replaceChildren();
  if (view.doc) {
    const title = document.createElement("strong");
    title.textContent = view.doc.title;
    const sentence = document.createElement("span");
    sentence.textContent = view.doc.first_sentence;
    targets.docCard.append(title, sentence);
    targets.docCard.classList.remove("hidden");
  } else {
    targets.docCard.classList.add("hidden");
  }

  targets.messages.replaceChildren(
    ...view.messages.map((m) => messageBubble(m.role, m.text, m.passages)),
  );
  targets.messages.scrollTop = targets.messages.scrollHeight;

  targets.cgPanel.replaceChildren(
    ...view.cgPanel.map((entry) =>
      cgRow(entry, panelTransitions.get(entry.surface) ?? "unchanged"),
    ),
  );
}

export function showBanner(element: HTMLElement, message: string | null): void {
  if (message === null) {
    element.classList.add("hidden");
    element.replaceChildren();
    return;
  }
  element.classList.remove("hidden");
  const text = document.createElement("span");
  text.textContent = message;
  element.replaceChildren(text);
}
