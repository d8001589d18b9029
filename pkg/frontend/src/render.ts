// DOM builders: SVG graphs for dialogue diagrams, tables for data schemas,
// trees for structure charts, and the transcript pane. No semantics here;
// everything shown comes verbatim from API payloads.

import type { ApiEvent } from "./api.js";
import { layoutDiagram, NODE_HEIGHT, NODE_WIDTH, RenderedGraph } from "./layout.js";
import type { UiChart, UiDiagram, UiSchema } from "./model.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

export function renderDiagram(diagram: UiDiagram, highlightNode = ""): SVGSVGElement {
  const graph: RenderedGraph = layoutDiagram(diagram);
  const svg = svgEl("svg", {
    width: String(graph.width),
    height: String(graph.height),
    viewBox: `0 0 ${graph.width} ${graph.height}`,
    class: "diagram",
    role: "img",
  });
  const defs = svgEl("defs");
  const marker = svgEl("marker", {
    id: "arrow",
    viewBox: "0 0 10 10",
    refX: "10",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#555" }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  const byName = new Map(graph.nodes.map((n) => [n.name, n]));
  for (const edge of graph.edges) {
    const from = byName.get(edge.from)!;
    const to = byName.get(edge.to)!;
    const group = svgEl("g", { class: `arc${edge.isCall ? " call" : ""}`, "data-arc": String(edge.declIndex) });
    let labelX: number;
    let labelY: number;
    if (edge.from === edge.to) {
      const cx = from.x + NODE_WIDTH / 2;
      const cy = from.y;
      group.appendChild(
        svgEl("path", {
          d: `M ${cx - 18} ${cy} C ${cx - 30} ${cy - 38}, ${cx + 30} ${cy - 38}, ${cx + 18} ${cy}`,
          fill: "none",
          stroke: "#555",
          "marker-end": "url(#arrow)",
        }),
      );
      labelX = cx;
      labelY = cy - 32;
    } else {
      const x1 = from.x + NODE_WIDTH;
      const y1 = from.y + NODE_HEIGHT / 2;
      const x2 = to.x;
      const y2 = to.y + NODE_HEIGHT / 2;
      group.appendChild(
        svgEl("line", {
          x1: String(x1),
          y1: String(y1),
          x2: String(x2),
          y2: String(y2),
          stroke: "#555",
          "marker-end": "url(#arrow)",
        }),
      );
      labelX = (x1 + x2) / 2;
      labelY = (y1 + y2) / 2 - 6;
    }
    const text = svgEl("text", {
      x: String(labelX),
      y: String(labelY),
      class: "arc-label",
      "text-anchor": "middle",
    });
    text.textContent = edge.label;
    group.appendChild(text);
    svg.appendChild(group);
  }

  for (const node of graph.nodes) {
    const classes = ["node"];
    if (node.isEntry) classes.push("entry");
    if (node.isExit) classes.push("exit");
    if (node.name === highlightNode) classes.push("current");
    const group = svgEl("g", { class: classes.join(" "), "data-node": node.name });
    group.appendChild(
      svgEl("rect", {
        x: String(node.x),
        y: String(node.y),
        width: String(NODE_WIDTH),
        height: String(NODE_HEIGHT),
        rx: "8",
      }),
    );
    const label = svgEl("text", {
      x: String(node.x + NODE_WIDTH / 2),
      y: String(node.y + NODE_HEIGHT / 2 + 4),
      "text-anchor": "middle",
      class: "node-label",
    });
    label.textContent = node.name;
    group.appendChild(label);
    const title = svgEl("title");
    title.textContent = node.output;
    group.appendChild(title);
    svg.appendChild(group);
  }
  return svg;
}

export function renderSchema(schema: UiSchema): HTMLElement {
  const container = document.createElement("div");
  container.className = "schema";
  for (const entity of schema.entities) {
    const table = document.createElement("table");
    table.className = "entity";
    table.dataset.entity = entity.name;
    const caption = document.createElement("caption");
    caption.textContent = entity.name;
    table.appendChild(caption);
    const head = document.createElement("tr");
    for (const col of ["attribute", "type", "key"]) {
      const th = document.createElement("th");
      th.textContent = col;
      head.appendChild(th);
    }
    table.appendChild(head);
    for (const attr of entity.attributes) {
      const row = document.createElement("tr");
      for (const value of [attr.name, attr.type, attr.isKey ? "yes" : ""]) {
        const cell = document.createElement("td");
        cell.textContent = value;
        row.appendChild(cell);
      }
      table.appendChild(row);
    }
    container.appendChild(table);
  }
  if (schema.relations.length) {
    const list = document.createElement("ul");
    list.className = "relations";
    for (const rel of schema.relations) {
      const item = document.createElement("li");
      item.textContent = `${rel.name}: ${rel.left} ${rel.leftCard} — ${rel.right} ${rel.rightCard}`;
      list.appendChild(item);
    }
    container.appendChild(list);
  }
  return container;
}

export function renderChart(chart: UiChart): HTMLElement {
  const container = document.createElement("div");
  container.className = "chart";
  const byName = new Map(chart.modules.map((m) => [m.name, m]));
  const rendered = new Set<string>();

  function moduleItem(name: string): HTMLElement {
    const item = document.createElement("li");
    item.dataset.module = name;
    const label = document.createElement("span");
    label.textContent = name;
    item.appendChild(label);
    const mod = byName.get(name);
    if (mod && !rendered.has(name)) {
      rendered.add(name);
      if (mod.invocations.length) {
        const children = document.createElement("ul");
        for (const inv of mod.invocations) {
          const child = moduleItem(inv.callee);
          if (inv.couples.length) {
            const couples = document.createElement("em");
            couples.textContent = ` (${inv.couples.join(", ")})`;
            child.querySelector("span")!.appendChild(couples);
          }
          children.appendChild(child);
        }
        item.appendChild(children);
      }
    }
    return item;
  }

  const tree = document.createElement("ul");
  tree.className = "module-tree";
  const root = chart.modules.find((m) => m.isRoot);
  if (root) tree.appendChild(moduleItem(root.name));
  for (const mod of chart.modules) {
    if (!rendered.has(mod.name)) tree.appendChild(moduleItem(mod.name));
  }
  container.appendChild(tree);
  return container;
}

// transcript pane: one line per OUTPUT/INPUT event in the same format the
// headless runner writes, so panes compare byte-for-byte with transcripts
export function transcriptLine(event: ApiEvent): string | null {
  const escape = (text: string) =>
    text.replace(/\\/g, "\\\\").replace(/\n/g, "\\n").replace(/\r/g, "\\r");
  if (event.kind === "OUTPUT") return `O: ${escape(event.text)}`;
  if (event.kind === "INPUT") return `I: ${escape(event.text)}`;
  return null;
}

export function appendTranscript(pane: HTMLElement, events: ApiEvent[], status: string): void {
  pane.querySelector(".status-line")?.remove();
  for (const event of events) {
    const line = transcriptLine(event);
    if (line === null) continue;
    const div = document.createElement("div");
    div.className = event.kind === "OUTPUT" ? "line out" : "line in";
    if (event.detail === "NOMATCH") div.classList.add("nomatch");
    div.textContent = line;
    pane.appendChild(div);
  }
  if (status !== "RUNNING") {
    const div = document.createElement("div");
    div.className = "line status-line";
    div.textContent = `! ${status}`;
    pane.appendChild(div);
  }
}

export function paneText(pane: HTMLElement): string {
  const lines = Array.from(pane.querySelectorAll(".line"), (el) => el.textContent ?? "");
  return lines.join("\n") + (lines.length ? "\n" : "");
}
