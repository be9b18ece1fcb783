// Page bootstrap: one view panel, the live event log, and a trace panel.
// The client holds no authoritative state — closing and reopening the page
// reconstructs everything from the server.

import { ApiClient, ApiError } from "./api.js";
import { EventLog } from "./eventlog.js";
import { notify, renderEventLog, renderTracePanel, renderViewPanel } from "./panels.js";
import { EventStream } from "./sse.js";
import { buildTraceTree } from "./tracetree.js";
import { ViewRow } from "./types.js";
import {
  affectsPage,
  applyServerState,
  optimisticDisable,
  toPage,
  ViewPage,
} from "./viewmodel.js";

const api = new ApiClient("");
const log = new EventLog(400);

const viewName =
  new URLSearchParams(location.search).get("view") ?? "View Survivor";

const viewPanel = document.getElementById("view-panel")!;
const logPanel = document.getElementById("log-panel")!;
const tracePanel = document.getElementById("trace-panel")!;
const noticeArea = document.getElementById("notices")!;

let page: ViewPage | null = null;

function redraw(): void {
  if (!page) return;
  renderViewPanel(viewPanel, page, {
    onAction: async (action, sendValue) => {
      if (!page) return;
      page = optimisticDisable(page, action);
      redraw();
      try {
        const response = await api.trigger(page.state.individual!, action, sendValue);
        if (response.view) page = applyServerState(page, response.view);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          notify(noticeArea, `${action} is no longer available`);
          await refetch();
        } else {
          notify(noticeArea, String(err));
        }
      }
      redraw();
    },
    onEdit: async (row: ViewRow) => {
      if (!page) return;
      const entered = prompt(`${row.property} =`, String(row.value ?? ""));
      if (entered === null) return;
      const numeric = Number(entered);
      const value = Number.isFinite(numeric) && entered.trim() !== "" ? numeric : entered;
      try {
        const response = await api.setProperty(page.state.individual!, row.property, value);
        if (response.view) page = applyServerState(page, response.view);
      } catch (err) {
        notify(noticeArea, String(err));
      }
      redraw();
    },
  });
  renderEventLog(logPanel, log.rows, async (row) => {
    const doc = await api.getTrace(row.id, 8);
    renderTracePanel(tracePanel, buildTraceTree(doc));
  });
}

async function refetch(): Promise<void> {
  const state = await api.getView(viewName);
  page = page ? applyServerState(page, state) : toPage(state);
  redraw();
}

async function start(): Promise<void> {
  await refetch();
  renderTracePanel(tracePanel, null);
  const stream = new EventStream(api.eventsUrl(null), {
    onRecord: (record) => {
      log.push(record);
      if (page) page = { ...page, lastEventId: record.id };
      if (page && affectsPage(page, record, (r) => log.ownerOf(r))) {
        void refetch();
      } else {
        redraw();
      }
    },
    onStatus: (status) => {
      if (status === "retrying") notify(noticeArea, "stream lost, reconnecting…");
    },
  });
  void stream.start();
}

void start();
