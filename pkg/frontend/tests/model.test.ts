import { describe, expect, it } from "vitest";

import type { ModelDocument, TableDump } from "../src/api.js";
import { decodeModel } from "../src/model.js";
import exchanges from "./fixtures/login_exchange.json";

const doc = exchanges[0].response as unknown as ModelDocument;

describe("decodeModel on a recorded interchange document", () => {
  it("reconstructs both diagrams with their structure", () => {
    const model = decodeModel(doc);
    expect(model.sourceName).toBe("login.use");
    expect(model.diagrams.map((d) => d.name)).toEqual(["login", "confirm"]);
    const login = model.diagrams[0];
    expect(login.entry).toBe("welcome");
    expect(login.exits).toEqual(new Set(["done"]));
    expect(login.nodes).toHaveLength(4);
    expect(login.arcs).toHaveLength(5);
    const callArc = login.arcs.find((a) => a.callee !== "");
    expect(callArc).toBeDefined();
    expect(callArc!.callee).toBe("confirm");
    expect(callArc!.toNode).toBe("menu");
  });

  it("node and arc counts agree with the raw table records", () => {
    const model = decodeModel(doc);
    const nodeTable = doc.tables.NODE as TableDump;
    const arcTable = doc.tables.ARC as TableDump;
    const diagramOf = (t: TableDump, rec: (string | number)[]) =>
      String(rec[t.fields.indexOf("diagram")]);
    for (const d of model.diagrams) {
      expect(d.nodes.length).toBe(
        nodeTable.records.filter((r) => diagramOf(nodeTable, r) === d.name).length,
      );
      expect(d.arcs.length).toBe(
        arcTable.records.filter((r) => diagramOf(arcTable, r) === d.name).length,
      );
    }
  });

  it("keeps pattern text verbatim including the otherwise marker", () => {
    const login = decodeModel(doc).diagrams[0];
    const patterns = login.arcs.map((a) => a.pattern);
    expect(patterns).toContain("quit");
    expect(patterns).toContain("otherwise");
  });
});
