// Page wiring: load the model, render the selected item, drive a session.

import { WorkbenchApi } from "./api.js";
import { decodeModel, UiModel } from "./model.js";
import { appendTranscript, renderChart, renderDiagram, renderSchema } from "./render.js";
import { SessionDriver } from "./session.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

export function initApp(root: Document = document, baseUrl = ""): void {
  const api = new WorkbenchApi(baseUrl);
  const picker = el<HTMLSelectElement>("picker");
  const canvas = el<HTMLDivElement>("canvas");
  const transcript = el<HTMLDivElement>("transcript");
  const inputBox = el<HTMLInputElement>("line-input");
  const sendButton = el<HTMLButtonElement>("send");
  const startButton = el<HTMLButtonElement>("start");
  const statusBadge = el<HTMLSpanElement>("status");
  const errorBar = el<HTMLDivElement>("error");
  const eventsPane = el<HTMLDivElement>("bus-events");

  let model: UiModel | null = null;

  const driver = new SessionDriver(api, {
    onEvents: (events, status) => appendTranscript(transcript, events, status),
    onNode: (node) => {
      redraw(node);
      transcript.scrollTop = transcript.scrollHeight;
    },
    onStatus: (status) => {
      statusBadge.textContent = status;
      statusBadge.dataset.status = status;
      const stopped = status !== "RUNNING";
      inputBox.disabled = stopped;
      sendButton.disabled = stopped;
      if (stopped) sessionStorage.removeItem("walkthrough-session");
      else sessionStorage.setItem("walkthrough-session", driver.sessionId);
    },
    onError: (message) => {
      errorBar.textContent = message;
      errorBar.hidden = false;
    },
  });

  function selected(): { kind: string; name: string } {
    const [kind, name] = picker.value.split(":", 2);
    return { kind, name };
  }

  function redraw(highlightNode = driver.currentNode): void {
    if (!model) return;
    const { kind, name } = selected();
    canvas.replaceChildren();
    if (kind === "diagram") {
      const diagram = model.diagrams.find((d) => d.name === name);
      if (diagram) canvas.appendChild(renderDiagram(diagram, highlightNode));
    } else if (kind === "data") {
      const schema = model.schemas.find((s) => s.name === name);
      if (schema) canvas.appendChild(renderSchema(schema));
    } else if (kind === "chart") {
      const chart = model.charts.find((c) => c.name === name);
      if (chart) canvas.appendChild(renderChart(chart));
    }
  }

  async function loadModel(): Promise<void> {
    try {
      model = decodeModel(await api.getModel());
      picker.replaceChildren();
      const groups: [string, string[]][] = [
        ["diagram", model.diagrams.map((d) => d.name)],
        ["data", model.schemas.map((s) => s.name)],
        ["chart", model.charts.map((c) => c.name)],
      ];
      for (const [kind, names] of groups) {
        for (const name of names) {
          const option = document.createElement("option");
          option.value = `${kind}:${name}`;
          option.textContent = `${kind} ${name}`;
          picker.appendChild(option);
        }
      }
      el<HTMLSpanElement>("model-name").textContent =
        `${model.sourceName} @ r${model.revision}`;
      redraw();
    } catch (err) {
      errorBar.textContent = err instanceof Error ? err.message : String(err);
      errorBar.hidden = false;
    }
  }

  async function startSession(): Promise<void> {
    const { kind, name } = selected();
    if (kind !== "diagram") {
      errorBar.textContent = "select a diagram to walk through";
      errorBar.hidden = false;
      return;
    }
    errorBar.hidden = true;
    transcript.replaceChildren();
    try {
      await driver.start(name);
      inputBox.focus();
    } catch (err) {
      errorBar.textContent = err instanceof Error ? err.message : String(err);
      errorBar.hidden = false;
    }
  }

  async function sendLine(): Promise<void> {
    const line = inputBox.value;
    inputBox.value = "";
    await driver.send(line);
  }

  picker.addEventListener("change", () => redraw());
  startButton.addEventListener("click", () => void startSession());
  sendButton.addEventListener("click", () => void sendLine());
  inputBox.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") void sendLine();
  });

  if (typeof EventSource !== "undefined") {
    const source = new EventSource(api.eventStreamUrl());
    source.onmessage = (msg) => {
      const div = document.createElement("div");
      div.textContent = msg.data;
      eventsPane.appendChild(div);
      eventsPane.scrollTop = eventsPane.scrollHeight;
    };
  }

  void loadModel().then(() => {
    const previous = sessionStorage.getItem("walkthrough-session");
    if (previous) {
      driver.resume(previous).catch(() => sessionStorage.removeItem("walkthrough-session"));
    }
  });
}

if (typeof window !== "undefined" && document.getElementById("picker")) {
  initApp();
}
