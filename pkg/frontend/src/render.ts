import type { ExplanationPayload, StepPayload } from "./types.js";
import type { ViewState } from "./state.js";

// Pure string renderers: every function maps payload data to markup with
// no DOM access, so views are snapshot-testable and re-render is cheap.

export function esc(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function classList(names: string[], indices: number[]): string {
  return indices.map((i) => names[i] ?? `#${i}`).join(", ");
}

function fmt(value: number): string {
  return value.toFixed(3);
}

function isValidStep(step: unknown): step is StepPayload {
  const s = step as StepPayload;
  return (
    !!s &&
    Array.isArray(s.kept) &&
    Array.isArray(s.ruled_out) &&
    Array.isArray(s.atoms) &&
    typeof s.prior_log_odds === "number" &&
    typeof s.total_woe === "number" &&
    s.atoms.every((a) => typeof a?.woe === "number" && typeof a?.name === "string")
  );
}

export function errorCard(message: string): string {
  return `<div class="error-card">${esc(message)}</div>`;
}

/**
 * Horizontal bar chart of one step's per-atom evidence: bars sorted by
 * value, blue for evidence in favor / red against, atoms below the
 * salience threshold dimmed, dashed guides at +-tau, axis in nats.
 */
export function renderStep(step: StepPayload, classNames: string[], tau: number): string {
  if (!isValidStep(step)) {
    return errorCard("malformed explanation step");
  }
  const width = 560;
  const barHeight = 22;
  const labelWidth = 150;
  const plotWidth = width - labelWidth - 60;
  const atoms = [...step.atoms].sort((a, b) => b.woe - a.woe);
  const maxAbs = Math.max(...atoms.map((a) => Math.abs(a.woe)), tau, 1e-9) * 1.1;
  const scale = plotWidth / 2 / maxAbs;
  const zeroX = labelWidth + plotWidth / 2;
  const height = atoms.length * barHeight + 40;

  const rows = atoms
    .map((atom, i) => {
      const y = 10 + i * barHeight;
      const w = Math.abs(atom.woe) * scale;
      const x = atom.woe >= 0 ? zeroX : zeroX - w;
      const salient = Math.abs(atom.woe) >= tau;
      const color = atom.woe >= 0 ? "#2b6cb0" : "#c53030";
      return (
        `<text x="${labelWidth - 6}" y="${y + 15}" class="atom-label" text-anchor="end">${esc(atom.name)}</text>` +
        `<rect x="${x.toFixed(1)}" y="${y + 3}" width="${Math.max(w, 0.5).toFixed(1)}" height="${barHeight - 8}"` +
        ` fill="${color}" opacity="${salient ? "1" : "0.3"}" class="${salient ? "bar salient" : "bar dimmed"}"></rect>` +
        `<text x="${(atom.woe >= 0 ? x + w + 4 : x - 4).toFixed(1)}" y="${y + 15}"` +
        ` class="atom-value" text-anchor="${atom.woe >= 0 ? "start" : "end"}">${fmt(atom.woe)}</text>`
      );
    })
    .join("");

  const guides =
    tau > 0
      ? `<line x1="${(zeroX + tau * scale).toFixed(1)}" y1="6" x2="${(zeroX + tau * scale).toFixed(1)}" y2="${height - 24}" class="tau-guide"></line>` +
        `<line x1="${(zeroX - tau * scale).toFixed(1)}" y1="6" x2="${(zeroX - tau * scale).toFixed(1)}" y2="${height - 24}" class="tau-guide"></line>`
      : "";

  return (
    `<figure class="step-chart">` +
    `<figcaption>evidence for <b>${esc(classList(classNames, step.kept))}</b>` +
    ` against <b>${esc(classList(classNames, step.ruled_out))}</b></figcaption>` +
    `<svg viewBox="0 0 ${width} ${height}" role="img">` +
    `<line x1="${zeroX}" y1="6" x2="${zeroX}" y2="${height - 24}" class="zero-line"></line>` +
    guides +
    rows +
    `<text x="${zeroX}" y="${height - 8}" text-anchor="middle" class="axis-label">weight of evidence (nats, guides at ±${fmt(tau)})</text>` +
    `</svg></figure>`
  );
}

/**
 * Prior / evidence / posterior panel: three aligned bars showing that
 * prior log odds plus total evidence equals the posterior log odds.
 */
export function renderDecomposition(step: StepPayload): string {
  if (!isValidStep(step)) {
    return errorCard("malformed explanation step");
  }
  const posterior = step.prior_log_odds + step.total_woe;
  const entries: Array<[string, number, string]> = [
    ["prior log odds", step.prior_log_odds, "prior"],
    ["total evidence", step.total_woe, "woe"],
    ["posterior log odds", posterior, "posterior"],
  ];
  const width = 560;
  const labelWidth = 150;
  const plotWidth = width - labelWidth - 60;
  const maxAbs = Math.max(...entries.map(([, v]) => Math.abs(v)), 1e-9) * 1.1;
  const scale = plotWidth / 2 / maxAbs;
  const zeroX = labelWidth + plotWidth / 2;
  const rows = entries
    .map(([label, value, kind], i) => {
      const y = 8 + i * 24;
      const w = Math.abs(value) * scale;
      const x = value >= 0 ? zeroX : zeroX - w;
      return (
        `<text x="${labelWidth - 6}" y="${y + 13}" text-anchor="end" class="atom-label">${esc(label)}</text>` +
        `<rect x="${x.toFixed(1)}" y="${y}" width="${Math.max(w, 0.5).toFixed(1)}" height="14" class="odds-bar ${kind}"></rect>` +
        `<text x="${(value >= 0 ? x + w + 4 : x - 4).toFixed(1)}" y="${y + 12}" text-anchor="${value >= 0 ? "start" : "end"}" class="atom-value">${fmt(value)}</text>`
      );
    })
    .join("");
  return (
    `<figure class="decomposition">` +
    `<figcaption>prior ${fmt(step.prior_log_odds)} + evidence ${fmt(step.total_woe)}` +
    ` = posterior ${fmt(posterior)} (nats)</figcaption>` +
    `<svg viewBox="0 0 ${width} 88" role="img">` +
    `<line x1="${zeroX}" y1="4" x2="${zeroX}" y2="82" class="zero-line"></line>` +
    rows +
    `</svg></figure>`
  );
}

/** Step navigator: hidden entirely for one-step explanations. */
export function renderNavigator(payload: ExplanationPayload, currentStep: number): string {
  if (payload.steps.length <= 1) {
    return "";
  }
  const crumbs = payload.steps
    .map((step, i) => {
      const label = `ruled out ${esc(classList(payload.class_names, step.ruled_out))}`;
      const cls = i === currentStep ? "crumb active" : "crumb";
      return `<button class="${cls}" data-step="${i}">step ${i + 1}: ${label}</button>`;
    })
    .join("");
  return `<nav class="step-nav">${crumbs}</nav>`;
}

/** Whole explanation view for the current state. */
export function renderExplanation(state: ViewState): string {
  const payload = state.payload;
  if (!payload) {
    return `<p class="placeholder">pick an instance to see its explanation</p>`;
  }
  const step = payload.steps[Math.min(state.stepIndex, payload.steps.length - 1)];
  if (!step) {
    return errorCard("explanation has no steps");
  }
  const prediction = payload.class_names[payload.y_star] ?? `#${payload.y_star}`;
  const staleBanner = state.stale
    ? `<div class="stale-banner">showing an older explanation; the last request failed` +
      `<button class="retry" data-action="retry">retry</button></div>`
    : "";
  const errorBanner =
    state.error && !state.stale
      ? `<div class="error-card">${esc(state.error)}` +
        `<button class="retry" data-action="retry">retry</button></div>`
      : "";
  return (
    staleBanner +
    errorBanner +
    `<header class="prediction">predicted: <b>${esc(prediction)}</b></header>` +
    renderNavigator(payload, state.stepIndex) +
    renderStep(step, payload.class_names, state.tau) +
    renderDecomposition(step)
  );
}
