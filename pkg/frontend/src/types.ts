// Documents exchanged with the /api/v1 service.

export interface SeriesDoc {
  measurement: string;
  tags: Record<string, string>;
  points: [number, number][]; // [timestamp_ns, value]
}

export interface QueryResponse {
  schema_version: string;
  series: SeriesDoc[];
}

export interface PanelQueryTemplate {
  measurement: string;
  tags?: Record<string, string>; // values may be "$variable"
  group_by?: string[];
  aggregate?: string;
  bucket_ns?: number | null;
}

export interface PanelDoc {
  id: string;
  title: string;
  display: "timeseries" | "table" | "stat";
  query: PanelQueryTemplate;
}

export interface VariableDoc {
  name: string;
  measurement: string;
  tag_key: string;
  tags?: Record<string, string>;
}

export interface DashboardDoc {
  id: string;
  title: string;
  variables: VariableDoc[];
  panels: PanelDoc[];
  default_time_range: { from: string; to: string };
}

export interface DashboardResponse {
  schema_version: string;
  dashboard: DashboardDoc;
  variable_options: Record<string, string[]>;
}

export interface AnnotationDoc {
  id?: number;
  measurement: string;
  tags: Record<string, string>;
  start_ns: number;
  end_ns: number;
  kind: "false_positive" | "note";
  text: string;
  author?: string;
  created_ns?: number;
}

export interface AlertEventDoc {
  measurement: string;
  tags: Record<string, string>;
  field: string;
  timestamp_ns: number;
  baseline: number;
  observed: number;
  rel_change: number;
  threshold_used: number;
  kind: "regression" | "improvement";
  suppressed: boolean;
}

export interface SnapshotPanelDoc {
  panel_id: string;
  title: string;
  display: string;
  series: SeriesDoc[];
}

export interface SnapshotDoc {
  schema_version: string;
  id: string;
  created_ns: number;
  dashboard: DashboardDoc;
  time_range: { start_ns: number; end_ns: number };
  variables: Record<string, string>;
  panels: SnapshotPanelDoc[];
}
