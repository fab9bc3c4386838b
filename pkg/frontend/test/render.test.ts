import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  errorCard,
  renderDecomposition,
  renderExplanation,
  renderNavigator,
  renderStep,
} from "../src/render.js";
import { initialState, type ViewState } from "../src/state.js";
import type { ExplanationPayload, StepPayload } from "../src/types.js";

const golden = (name: string): ExplanationPayload =>
  JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8"));

const sequential = golden("golden_sequential.json");
const oneshot = golden("golden_oneshot.json");

function syntheticStep(woes: number[], tau = 2.0): StepPayload {
  return {
    kept: [0],
    ruled_out: [1],
    prior_log_odds: 0.25,
    total_woe: woes.reduce((a, b) => a + b, 0),
    atoms: woes.map((woe, i) => ({
      name: `atom${i}`,
      indices: [i],
      woe,
      salient: Math.abs(woe) >= tau,
    })),
  };
}

describe("renderStep", () => {
  it("emphasizes atoms at or above the threshold and dims the rest", () => {
    const html = renderStep(syntheticStep([3.0, -2.5, 0.1]), ["yes", "no"], 2.0);
    expect(html.match(/class="bar salient"/g)).toHaveLength(2);
    expect(html.match(/class="bar dimmed"/g)).toHaveLength(1);
  });

  it("sorts bars by evidence value", () => {
    const html = renderStep(syntheticStep([0.5, 4.0, -1.0]), ["yes", "no"], 2.0);
    const order = [...html.matchAll(/>(atom\d)</g)].map((m) => m[1]);
    expect(order).toEqual(["atom1", "atom0", "atom2"]);
  });

  it("draws the salience guides and nats axis", () => {
    const html = renderStep(syntheticStep([1.0]), ["yes", "no"], 1.5);
    expect(html.match(/class="tau-guide"/g)).toHaveLength(2);
    expect(html).toContain("nats");
    expect(html).toContain("±1.500");
  });

  it("returns an inline error card on malformed payloads", () => {
    const broken = { kept: [0] } as unknown as StepPayload;
    expect(renderStep(broken, [], 2.0)).toBe(errorCard("malformed explanation step"));
  });

  it("matches the golden snapshot", () => {
    const step = sequential.steps[0]!;
    expect(renderStep(step, sequential.class_names, 2.0)).toMatchSnapshot();
  });
});

describe("renderDecomposition", () => {
  it("places the posterior at prior plus evidence", () => {
    const step = syntheticStep([2.0]);
    step.prior_log_odds = 0.0;
    step.total_woe = 2.0;
    expect(renderDecomposition(step)).toContain("= posterior 2.000");
  });

  it("shows cancellation: prior 0.3 and evidence -0.3 meet at zero", () => {
    const step = syntheticStep([-0.3]);
    step.prior_log_odds = 0.3;
    step.total_woe = -0.3;
    expect(renderDecomposition(step)).toContain("= posterior 0.000");
  });

  it("matches the golden snapshot", () => {
    expect(renderDecomposition(sequential.steps[0]!)).toMatchSnapshot();
  });
});

describe("renderNavigator", () => {
  it("is hidden for one-step explanations", () => {
    expect(renderNavigator(oneshot, 0)).toBe("");
  });

  it("marks the active step", () => {
    const html = renderNavigator(sequential, 2);
    expect(html.match(/class="crumb"/g)).toHaveLength(sequential.steps.length - 1);
    expect(html.match(/class="crumb active"/g)).toHaveLength(1);
    expect(html).toContain('data-step="2"');
  });
});

describe("renderExplanation", () => {
  const base: ViewState = { ...initialState(), rowIndex: 7, payload: sequential };

  it("is a pure function of state and payload (stable snapshot)", () => {
    const html = renderExplanation({ ...base, stepIndex: 1, tau: 1.0 });
    expect(renderExplanation({ ...base, stepIndex: 1, tau: 1.0 })).toBe(html);
    expect(html).toMatchSnapshot();
  });

  it("re-renders salience locally when the threshold moves", () => {
    const strict = renderExplanation({ ...base, tau: 8.0 });
    const loose = renderExplanation({ ...base, tau: 0.0 });
    expect(strict.match(/class="bar dimmed"/g)?.length ?? 0).toBeGreaterThan(0);
    expect(loose.match(/class="bar dimmed"/g)).toBeNull();
  });

  it("flags stale payloads and offers a retry", () => {
    const html = renderExplanation({ ...base, stale: true, error: "request failed" });
    expect(html).toContain("stale-banner");
    expect(html).toContain('data-action="retry"');
  });
});
