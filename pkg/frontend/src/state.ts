import type { ApiClient } from "./api.js";
import type { ExplanationPayload, Mode } from "./types.js";

export interface ViewState {
  rowIndex: number | null;
  partitionName: string;
  mode: Mode;
  tau: number;
  stepIndex: number;
  payload: ExplanationPayload | null;
  loading: boolean;
  // the shown payload no longer matches the selection (a request failed)
  stale: boolean;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    rowIndex: null,
    partitionName: "singletons",
    mode: "sequential",
    tau: 2.0,
    stepIndex: 0,
    payload: null,
    loading: false,
    stale: false,
    error: null,
  };
}

type Listener = (state: ViewState) => void;

/**
 * Single source of truth for the explorer.
 *
 * Selection changes (row, partition, mode) issue exactly one explain
 * request each; salience-threshold and step changes are client-side
 * re-renders with no network traffic. A newer request aborts and
 * supersedes any in-flight one, and a failure flags the previous
 * payload as stale instead of discarding it.
 */
export class ExplorerStore {
  private state: ViewState = initialState();
  private listeners: Listener[] = [];
  private requestCounter = 0;
  private controller: AbortController | null = null;

  constructor(private readonly client: ApiClient, private readonly seed: number = 0) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Pick an instance; one explain call. */
  selectRow(rowIndex: number): Promise<void> {
    this.update({ rowIndex });
    return this.refresh();
  }

  /** Switch feature granularity; one explain call. */
  setPartition(partitionName: string): Promise<void> {
    this.update({ partitionName });
    return this.refresh();
  }

  /** Toggle one-shot vs sequential; one explain call. */
  setMode(mode: Mode): Promise<void> {
    this.update({ mode, stepIndex: 0 });
    return this.refresh();
  }

  /** Salience threshold: purely client-side, never a network call. */
  setTau(tau: number): void {
    this.update({ tau: Math.max(0, tau) });
  }

  /** Step navigation: purely client-side, never a network call. */
  setStep(stepIndex: number): void {
    const steps = this.state.payload?.steps.length ?? 0;
    const clamped = Math.max(0, Math.min(stepIndex, Math.max(steps - 1, 0)));
    this.update({ stepIndex: clamped });
  }

  /** Re-issue the request for the current selection (retry affordance). */
  retry(): Promise<void> {
    return this.refresh();
  }

  private refresh(): Promise<void> {
    if (this.state.rowIndex === null) {
      return Promise.resolve();
    }
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const requestId = ++this.requestCounter;
    this.update({ loading: true, error: null });
    return this.client
      .explain(
        {
          row_index: this.state.rowIndex,
          partition_name: this.state.partitionName,
          mode: this.state.mode,
          tau: this.state.tau,
          seed: this.seed,
        },
        controller.signal,
      )
      .then((payload) => {
        if (requestId !== this.requestCounter) return; // superseded
        const maxStep = Math.max(payload.steps.length - 1, 0);
        this.update({
          payload,
          loading: false,
          stale: false,
          error: null,
          stepIndex: Math.min(this.state.stepIndex, maxStep),
        });
      })
      .catch((error: unknown) => {
        if (requestId !== this.requestCounter) return; // an abort we caused
        this.update({
          loading: false,
          stale: this.state.payload !== null,
          error: error instanceof Error ? error.message : String(error),
        });
      });
  }
}
