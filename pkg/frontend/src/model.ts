// Decode the interchange document (flat table records) into view structures.
// Purely presentational: no validation or semantics, that is the server's job.

import type { ModelDocument, TableDump } from "./api.js";

export interface UiArc {
  from: string;
  toNode: string; // plain target, or the return node of a call
  pattern: string; // verbatim label text; "otherwise" for the catch-all
  guard: string; // "" when unguarded
  action: string; // "" when none
  callee: string; // "" for plain arcs
  declIndex: number;
}

export interface UiDiagram {
  name: string;
  entry: string;
  exits: Set<string>;
  nodes: { name: string; output: string }[];
  arcs: UiArc[];
}

export interface UiEntity {
  name: string;
  attributes: { name: string; type: string; isKey: boolean }[];
}

export interface UiSchema {
  name: string;
  entities: UiEntity[];
  relations: { name: string; left: string; leftCard: string; right: string; rightCard: string }[];
}

export interface UiModule {
  name: string;
  isRoot: boolean;
  invocations: { callee: string; couples: string[] }[];
}

export interface UiChart {
  name: string;
  modules: UiModule[];
}

export interface UiModel {
  sourceName: string;
  revision: number;
  diagrams: UiDiagram[];
  schemas: UiSchema[];
  charts: UiChart[];
}

type Row = Record<string, string | number>;

function rows(table: TableDump | undefined): Row[] {
  if (!table) return [];
  return table.records.map((rec) => {
    const row: Row = {};
    table.fields.forEach((f, i) => (row[f] = rec[i]));
    return row;
  });
}

function str(row: Row, field: string): string {
  return String(row[field] ?? "");
}

function num(row: Row, field: string): number {
  return Number(row[field] ?? 0);
}

function symbolRows(all: Row[], kind: string, owner: string): Row[] {
  return all
    .filter((r) => str(r, "kind") === kind && str(r, "owner") === owner)
    .sort((a, b) => num(a, "ordinal") - num(b, "ordinal"));
}

export function decodeModel(doc: ModelDocument): UiModel {
  const symbols = rows(doc.tables.SYMBOL);
  const nodeRows = rows(doc.tables.NODE);
  const arcRows = rows(doc.tables.ARC);

  const diagrams: UiDiagram[] = rows(doc.tables.DIAGRAM).map((d) => {
    const name = str(d, "name");
    const nodes = nodeRows
      .filter((n) => str(n, "diagram") === name)
      .map((n) => ({ name: str(n, "name"), output: str(n, "output") }));
    const arcs = arcRows
      .filter((a) => str(a, "diagram") === name)
      .sort((a, b) => num(a, "decl_index") - num(b, "decl_index"))
      .map((a) => {
        const isCall = str(a, "target_kind") === "CALL";
        const guard = str(a, "guard_op")
          ? `${str(a, "guard_var")} ${str(a, "guard_op") === "EQ" ? "==" : "!="} "${str(a, "guard_value")}"`
          : "";
        return {
          from: str(a, "from_node"),
          toNode: isCall ? str(a, "return_to") : str(a, "target"),
          pattern: str(a, "pattern_kind") === "OTHERWISE" ? "otherwise" : str(a, "pattern"),
          guard,
          action: str(a, "action"),
          callee: isCall ? str(a, "target") : "",
          declIndex: num(a, "decl_index"),
        };
      });
    return {
      name,
      entry: str(d, "entry"),
      exits: new Set(str(d, "exits").split(",").filter(Boolean)),
      nodes,
      arcs,
    };
  });

  const entityRows = rows(doc.tables.ENTITY);
  const relationRows = rows(doc.tables.RELATION);
  const schemas: UiSchema[] = symbolRows(symbols, "SCHEMA", "").map((s) => {
    const name = str(s, "name");
    return {
      name,
      entities: entityRows
        .filter((e) => str(e, "schema") === name)
        .map((e) => ({
          name: str(e, "name"),
          attributes: symbolRows(symbols, "ATTRIBUTE", `${name}.${str(e, "name")}`).map((a) => {
            const detail = str(a, "detail").split(" ");
            return { name: str(a, "name"), type: detail[0] ?? "", isKey: detail[1] === "key" };
          }),
        })),
      relations: relationRows
        .filter((r) => str(r, "schema") === name)
        .map((r) => ({
          name: str(r, "name"),
          left: str(r, "left_entity"),
          leftCard: str(r, "left_card"),
          right: str(r, "right_entity"),
          rightCard: str(r, "right_card"),
        })),
    };
  });

  const moduleRows = rows(doc.tables.MODULE);
  const charts: UiChart[] = symbolRows(symbols, "CHART", "").map((c) => {
    const name = str(c, "name");
    return {
      name,
      modules: moduleRows
        .filter((m) => str(m, "chart") === name)
        .map((m) => {
          const mname = str(m, "name");
          return {
            name: mname,
            isRoot: num(m, "is_root") === 1,
            invocations: symbolRows(symbols, "INVOCATION", `${name}.${mname}`).map((inv, i) => ({
              callee: str(inv, "name"),
              couples: symbolRows(symbols, "COUPLE", `${name}.${mname}.${i}`).map((co) =>
                str(co, "name"),
              ),
            })),
          };
        }),
    };
  });

  return {
    sourceName: doc.revision.source_name,
    revision: doc.revision.number,
    diagrams,
    schemas,
    charts,
  };
}
