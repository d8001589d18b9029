// Drives one live prototype session through the API: open, feed lines,
// surface new events. One request in flight at a time; the UI layer decides
// how to render the callbacks.

import type { ApiEvent, WorkbenchApi } from "./api.js";

export interface SessionView {
  onEvents(events: ApiEvent[], status: string): void;
  onNode(node: string): void;
  onStatus(status: string): void;
  onError(message: string): void;
}

export class SessionDriver {
  sessionId = "";
  status = "";
  currentNode = "";
  private busy = false;

  constructor(private api: WorkbenchApi, private view: SessionView) {}

  get running(): boolean {
    return this.status === "RUNNING";
  }

  private track(events: ApiEvent[], status: string): void {
    for (const event of events) {
      if (event.kind === "OUTPUT") this.currentNode = event.node;
    }
    this.status = status;
    this.view.onEvents(events, status);
    this.view.onNode(this.currentNode);
    this.view.onStatus(status);
  }

  async start(root: string, rev?: number): Promise<void> {
    const opened = await this.api.startSession(root, rev);
    this.sessionId = opened.id;
    this.currentNode = "";
    this.track(opened.events, opened.status);
  }

  async send(line: string): Promise<void> {
    if (!this.sessionId || !this.running || this.busy) return;
    this.busy = true;
    try {
      const result = await this.api.sendInput(this.sessionId, line);
      this.track(result.events, result.status);
    } catch (err) {
      this.view.onError(err instanceof Error ? err.message : String(err));
    } finally {
      this.busy = false;
    }
  }

  // restore a session (e.g. after a page reload) from its server-side state
  async resume(sessionId: string): Promise<void> {
    const state = await this.api.getSession(sessionId);
    this.sessionId = state.id;
    this.currentNode = state.current_node;
    this.track(state.transcript, state.status);
  }
}
