// Wire types mirrored from the server. The client renders these verbatim
// and never computes conditions itself.

export type Scalar = number | string | null;

export interface EventRecord {
  id: string;
  base: string | null;
  type: string;
  value: Scalar;
  actor: string;
  cause: string[];
  model: string | null;
  ts: number;
}

export interface ViewRow {
  property: string;
  value: Scalar;
  excluded: boolean;
  editable?: boolean;
}

export interface ControlState {
  property: string;
  title: string;
  control_type: string;
  send_value: Scalar;
  enabled: boolean;
}

export interface ViewState {
  view_id: string;
  concept_page: string | null;
  individual: string | null;
  mode: string;
  rows: ViewRow[];
  controls: ControlState[];
}

export interface CascadeSummary {
  root: string | null;
  derived: string[];
  evaluations: number;
  status: string;
}

export interface MutationResponse {
  result: CascadeSummary;
  view: ViewState | null;
}

export interface TraceDoc {
  root: string;
  depth: number;
  edges: [string, string][];
  events: EventRecord[];
}

export interface AnalysisFinding {
  code: string;
  location: string;
  message: string;
}

export interface AnalysisReport {
  ok: boolean;
  errors: AnalysisFinding[];
  warnings: AnalysisFinding[];
}

export interface GraphDoc {
  format: string;
  events: EventRecord[];
}
