import { ApiError, SessionApi } from "./api.js";
import { render, showBanner, type RenderTargets } from "./render.js";
import {
  applyAsk,
  applyAskError,
  emptyView,
  transitions,
  viewFromTranscript,
  type Transition,
  type UiSessionView,
} from "./state.js";

const api = new SessionApi("");

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const targets: RenderTargets = {
  messages: element("messages"),
  cgPanel: element("cg-panel"),
  docCard: element("doc-card"),
};
const banner = element("banner");
const startForm = element<HTMLFormElement>("start-form");
const startButton = element<HTMLButtonElement>("start-button");
const docTitle = element<HTMLInputElement>("doc-title");
const docSentence = element<HTMLInputElement>("doc-sentence");
const askForm = element<HTMLFormElement>("ask-form");
const askInput = element<HTMLInputElement>("ask-input");
const askButton = element<HTMLButtonElement>("ask-button");
const chatSection = element("chat");

let view: UiSessionView | null = null;
let askQueue: Promise<void> = Promise.resolve();

function update(next: UiSessionView, panelTransitions?: Map<string, Transition>): void {
  const moves = panelTransitions ?? transitions(view?.cgPanel ?? [], next.cgPanel);
  view = next;
  render(view, targets, moves);
  location.hash = view.sessionId;
}

function setAskEnabled(): void {
  askButton.disabled = askInput.value.trim() === "" || view === null;
}

async function startSession(): Promise<void> {
  startButton.disabled = true; // one click, one session
  showBanner(banner, null);
  const doc =
    docTitle.value.trim() !== "" || docSentence.value.trim() !== ""
      ? { title: docTitle.value.trim(), first_sentence: docSentence.value.trim() }
      : null;
  try {
    const created = await api.createSession(doc);
    update(emptyView(created.session_id, doc));
    startForm.classList.add("hidden");
    chatSection.classList.remove("hidden");
    askInput.focus();
  } catch (error) {
    showBanner(banner, `could not start a session: ${describe(error)} (check the service and retry)`);
    startButton.disabled = false;
  }
  setAskEnabled();
}

function describe(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

function enqueueAsk(question: string): void {
  // rapid sends queue behind one another; order is preserved and only one
  // request is ever in flight for this session
  askQueue = askQueue.then(() => performAsk(question));
}

async function performAsk(question: string): Promise<void> {
  if (view === null) return;
  try {
    const response = await api.ask(view.sessionId, question);
    update(applyAsk(view, question, response));
  } catch (error) {
    if (error instanceof ApiError && error.status === 0) {
      showBanner(banner, `service unreachable: retry when it is back`);
    }
    update(applyAskError(view, question, describe(error)));
  }
}

async function restoreFromHash(): Promise<boolean> {
  const sessionId = location.hash.replace(/^#/, "");
  if (!sessionId) return false;
  try {
    const transcript = await api.getSession(sessionId);
    update(viewFromTranscript(transcript), new Map());
    startForm.classList.add("hidden");
    chatSection.classList.remove("hidden");
    return true;
  } catch {
    location.hash = "";
    return false;
  }
}

startForm.addEventListener("submit", (event) => {
  event.preventDefault();
  void startSession();
});

askForm.addEventListener("submit", (event) => {
  event.preventDefault();
  const question = askInput.value.trim();
  if (question === "" || view === null) return;
  askInput.value = "";
  setAskEnabled();
  enqueueAsk(question);
});

askInput.addEventListener("input", setAskEnabled);

void restoreFromHash();
setAskEnabled();
