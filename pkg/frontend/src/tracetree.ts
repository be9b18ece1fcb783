// Causal trace document -> collapsible tree. The server returns BFS edges
// (event -> direct cause); the tree follows them depth-first, marking
// re-visited nodes so shared ancestors render once expanded.

import { EventRecord, TraceDoc } from "./types.js";

export interface TraceNode {
  record: EventRecord;
  children: TraceNode[];
  repeated: boolean; // already expanded elsewhere in the tree
}

export function buildTraceTree(doc: TraceDoc): TraceNode {
  const byId = new Map(doc.events.map((e) => [e.id, e]));
  const causes = new Map<string, string[]>();
  for (const [from, to] of doc.edges) {
    const bucket = causes.get(from) ?? [];
    if (!bucket.includes(to)) bucket.push(to);
    causes.set(from, bucket);
  }
  const seen = new Set<string>();

  function node(id: string): TraceNode {
    const record = byId.get(id);
    if (!record) throw new Error(`trace document is missing event ${id}`);
    if (seen.has(id)) {
      return { record, children: [], repeated: true };
    }
    seen.add(id);
    return {
      record,
      children: (causes.get(id) ?? []).map(node),
      repeated: false,
    };
  }

  return node(doc.root);
}

export function flatten(node: TraceNode, depth = 0): { node: TraceNode; depth: number }[] {
  const out = [{ node, depth }];
  for (const child of node.children) {
    out.push(...flatten(child, depth + 1));
  }
  return out;
}
