// Payload shapes published by the explanation service. The UI never
// computes evidence values; everything rendered comes from these.

export interface AtomPayload {
  name: string;
  indices: number[];
  woe: number;
  salient: boolean;
}

export interface StepPayload {
  kept: number[];
  ruled_out: number[];
  prior_log_odds: number;
  total_woe: number;
  atoms: AtomPayload[];
}

export interface ExplanationPayload {
  y_star: number;
  class_names: string[];
  instance: number[];
  steps: StepPayload[];
  units: string;
  config: Record<string, unknown>;
  diagnostics: { clamp_count: number };
}

export interface MetaPayload {
  class_names: string[];
  feature_names: string[];
  partitions: Record<string, { atom_names: string[]; atoms: number[][] }>;
  config_defaults: Record<string, unknown>;
  n_instances: number;
}

export interface InstanceRow {
  index: number;
  features: number[];
  label: number;
  prediction: number;
}

export interface InstancesPayload {
  total: number;
  offset: number;
  rows: InstanceRow[];
}

export type Mode = "sequential" | "oneshot";

export interface ExplainRequest {
  row_index: number;
  partition_name: string;
  mode: Mode;
  tau: number;
  seed: number;
}
