// Optional: the same golden walkthrough against a real running workbench.
// Enable with e.g.
//   pictoforge serve --port 7468 &   (store must contain login.use at rev 1)
//   WORKBENCH_URL=http://127.0.0.1:7468 npx vitest run tests/live.test.ts

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { WorkbenchApi } from "../src/api.js";
import { decodeModel } from "../src/model.js";
import { SessionDriver } from "../src/session.js";
import type { ApiEvent } from "../src/api.js";
import { transcriptLine } from "../src/render.js";

const base = process.env.WORKBENCH_URL;
const golden = readFileSync(join(process.cwd(), "tests/fixtures/login.transcript"), "utf-8");

describe.skipIf(!base)("against a live workbench", () => {
  it("replays the golden login dialogue over real HTTP", async () => {
    const api = new WorkbenchApi(base!);
    const model = decodeModel(await api.getModel(1));
    expect(model.diagrams.map((d) => d.name)).toContain("login");

    const lines: string[] = [];
    let status = "";
    const driver = new SessionDriver(api, {
      onEvents: (events: ApiEvent[], _status: string) => {
        for (const ev of events) {
          const line = transcriptLine(ev);
          if (line !== null) lines.push(line);
        }
      },
      onNode: () => {},
      onStatus: (s: string) => (status = s),
      onError: (message: string) => {
        throw new Error(message);
      },
    });
    await driver.start("login", 1);
    for (const line of ["ada", "secret", "y", "quit"]) {
      await driver.send(line);
    }
    expect(status).toBe("FINISHED");
    expect(lines.join("\n") + `\n! ${status}\n`).toBe(golden);
  });
});
