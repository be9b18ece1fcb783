// Live event-log model: resolves ids to readable labels and shapes rows
// for the console's table (ID, BaseEvent, ValueType, Value, Model, Cause,
// Actor). Also the page's owner index: initiation events name individuals,
// later events resolve their owner through the base chain.

import { EventRecord, Scalar } from "./types.js";

export interface LogRow {
  id: string;
  shortId: string;
  baseEvent: string;
  valueType: string;
  value: Scalar;
  model: string;
  cause: string;
  actor: string;
}

const SHORT = 6;

export class EventLog {
  rows: LogRow[] = [];
  private labels = new Map<string, string>(); // event id -> display label
  private owners = new Map<string, string>(); // event id -> individual

  constructor(private capacity = 500) {}

  ownerOf(record: EventRecord): string | null {
    return this.owners.get(record.id) ?? null;
  }

  push(record: EventRecord): LogRow {
    if (record.type === "Individual" && typeof record.value === "string") {
      this.labels.set(record.id, record.value);
      this.owners.set(record.id, record.value);
    } else if (record.base) {
      const owner = this.owners.get(record.base);
      if (owner) this.owners.set(record.id, owner);
      if (!this.labels.has(record.id)) {
        this.labels.set(record.id, `${record.type}`);
      }
    }
    const row: LogRow = {
      id: record.id,
      shortId: record.id.slice(0, SHORT),
      baseEvent: record.base
        ? (this.labels.get(record.base) ?? record.base.slice(0, SHORT))
        : "-",
      valueType: record.type,
      value: record.value,
      model: record.model ?? "-",
      cause: this.causeSummary(record.cause),
      actor: record.actor,
    };
    this.rows.push(row);
    if (this.rows.length > this.capacity) {
      this.rows.splice(0, this.rows.length - this.capacity);
    }
    return row;
  }

  private causeSummary(cause: string[]): string {
    if (!cause.length) return "-";
    const first = this.labels.get(cause[0]) ?? cause[0].slice(0, SHORT);
    return cause.length === 1 ? first : `${first} +${cause.length - 1}`;
  }
}
