// Automatic left-to-right layered layout for dialogue diagrams: a node's
// column is its breadth-first depth from the entry (call arcs connect to
// their return node, matching how the dialogue actually advances). Nodes the
// search never reaches go in one extra trailing column.

import type { UiArc, UiDiagram } from "./model.js";

export interface LaidOutNode {
  name: string;
  output: string;
  x: number;
  y: number;
  isEntry: boolean;
  isExit: boolean;
}

export interface LaidOutEdge {
  from: string;
  to: string;
  label: string;
  isCall: boolean;
  declIndex: number;
}

export interface RenderedGraph {
  nodes: LaidOutNode[];
  edges: LaidOutEdge[];
  width: number;
  height: number;
}

export const COLUMN_WIDTH = 190;
export const ROW_HEIGHT = 92;
export const NODE_WIDTH = 140;
export const NODE_HEIGHT = 46;
const MARGIN = 30;

export function bfsLayers(diagram: UiDiagram): Map<string, number> {
  const declared = new Set(diagram.nodes.map((n) => n.name));
  const layers = new Map<string, number>();
  if (declared.has(diagram.entry)) {
    layers.set(diagram.entry, 0);
    const queue = [diagram.entry];
    while (queue.length) {
      const current = queue.shift()!;
      for (const arc of diagram.arcs) {
        if (arc.from !== current) continue;
        const next = arc.toNode;
        if (declared.has(next) && !layers.has(next)) {
          layers.set(next, layers.get(current)! + 1);
          queue.push(next);
        }
      }
    }
  }
  const unreachedLayer = layers.size ? Math.max(...layers.values()) + 1 : 0;
  for (const node of diagram.nodes) {
    if (!layers.has(node.name)) layers.set(node.name, unreachedLayer);
  }
  return layers;
}

function edgeLabel(arc: UiArc): string {
  let label = arc.pattern;
  if (arc.guard) label += ` when ${arc.guard}`;
  if (arc.action) label += ` / ${arc.action}`;
  if (arc.callee) label += ` [call ${arc.callee}]`;
  return label;
}

export function layoutDiagram(diagram: UiDiagram): RenderedGraph {
  const layers = bfsLayers(diagram);
  const perLayer = new Map<number, number>();
  const nodes: LaidOutNode[] = diagram.nodes.map((n) => {
    const layer = layers.get(n.name)!;
    const rowIndex = perLayer.get(layer) ?? 0;
    perLayer.set(layer, rowIndex + 1);
    return {
      name: n.name,
      output: n.output,
      x: MARGIN + layer * COLUMN_WIDTH,
      y: MARGIN + rowIndex * ROW_HEIGHT,
      isEntry: n.name === diagram.entry,
      isExit: diagram.exits.has(n.name),
    };
  });
  const declared = new Set(diagram.nodes.map((n) => n.name));
  const edges: LaidOutEdge[] = diagram.arcs
    .filter((a) => declared.has(a.from) && declared.has(a.toNode))
    .map((a) => ({
      from: a.from,
      to: a.toNode,
      label: edgeLabel(a),
      isCall: a.callee !== "",
      declIndex: a.declIndex,
    }));
  const maxLayer = Math.max(0, ...layers.values());
  const maxRows = Math.max(1, ...perLayer.values());
  return {
    nodes,
    edges,
    width: MARGIN * 2 + maxLayer * COLUMN_WIDTH + NODE_WIDTH,
    height: MARGIN * 2 + (maxRows - 1) * ROW_HEIGHT + NODE_HEIGHT,
  };
}
