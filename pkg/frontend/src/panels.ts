// DOM rendering. Everything here is thin glue over the tested models in
// viewmodel/eventlog/tracetree — no state of its own beyond the DOM.

import { LogRow } from "./eventlog.js";
import { flatten, TraceNode } from "./tracetree.js";
import { Scalar, ViewRow } from "./types.js";
import { buttonEnabled, ViewPage } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function showValue(value: Scalar): string {
  return value === null ? "-" : String(value);
}

export interface ViewPanelHandlers {
  onAction(action: string, sendValue: Scalar): void;
  onEdit(row: ViewRow): void;
}

export function renderViewPanel(
  container: HTMLElement,
  page: ViewPage,
  handlers: ViewPanelHandlers,
): void {
  container.replaceChildren();
  const title = el("h2", "view-title", page.state.individual ?? page.state.view_id);
  container.appendChild(title);

  const table = el("table", "prop-table");
  for (const row of page.state.rows) {
    const tr = el("tr");
    tr.appendChild(el("td", "prop-name", row.property));
    tr.appendChild(el("td", "prop-value", showValue(row.value)));
    const actions = el("td", "prop-actions");
    if (row.editable) {
      const edit = el("button", "edit-btn", "set");
      edit.addEventListener("click", () => handlers.onEdit(row));
      actions.appendChild(edit);
    }
    tr.appendChild(actions);
    table.appendChild(tr);
  }
  container.appendChild(table);

  const buttons = el("div", "action-buttons");
  for (const control of page.state.controls) {
    const button = el("button", "action-btn", control.title);
    button.disabled = !buttonEnabled(page, control.property);
    button.addEventListener("click", () =>
      handlers.onAction(control.property, control.send_value),
    );
    buttons.appendChild(button);
  }
  container.appendChild(buttons);
}

export function renderEventLog(
  container: HTMLElement,
  rows: LogRow[],
  onSelect: (row: LogRow) => void,
): void {
  container.replaceChildren();
  const table = el("table", "event-log");
  const head = el("tr");
  for (const column of ["ID", "BaseEvent", "ValueType", "Value", "Model", "Cause", "Actor"]) {
    head.appendChild(el("th", undefined, column));
  }
  table.appendChild(head);
  for (const row of [...rows].reverse()) {
    const tr = el("tr", "event-row");
    tr.appendChild(el("td", "mono", row.shortId));
    tr.appendChild(el("td", undefined, row.baseEvent));
    tr.appendChild(el("td", undefined, row.valueType));
    tr.appendChild(el("td", undefined, showValue(row.value)));
    tr.appendChild(el("td", undefined, row.model));
    tr.appendChild(el("td", "mono", row.cause));
    tr.appendChild(el("td", undefined, row.actor));
    tr.addEventListener("click", () => onSelect(row));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderTracePanel(container: HTMLElement, root: TraceNode | null): void {
  container.replaceChildren();
  if (!root) {
    container.appendChild(el("p", "hint", "Select an event to trace its causes."));
    return;
  }
  for (const { node, depth } of flatten(root)) {
    const line = el("div", "trace-line");
    line.style.paddingLeft = `${depth * 18}px`;
    const rec = node.record;
    const text = `${rec.type} := ${showValue(rec.value)}  (${rec.actor}) [${rec.id.slice(0, 6)}]`;
    line.textContent = node.repeated ? `${text} …` : text;
    container.appendChild(line);
  }
}

export function notify(container: HTMLElement, message: string): void {
  const note = el("div", "notice", message);
  container.appendChild(note);
  setTimeout(() => note.remove(), 4000);
}
