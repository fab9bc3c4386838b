"""Benchmark protocols: estimation quality and explanation robustness.

Estimation quality: how well per-feature evidence computed through a
surrogate fitted on an opaque predictor's outputs recovers the values an
exact model would give, swept over input dimension and surrogate sample
size and scored by mean squared error and a signed ranking metric.

Robustness: the local Lipschitz constant of the per-feature explanation
map around an instance,

    L(x0) = max_{x in ball(x0, r), x != x0} ||E(x) - E(x0)|| / ||x - x0||,

estimated by uniform sampling in the ball followed by shrinking-radius
refinement around the incumbent; the estimate is a lower bound on the
true constant by construction.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .data import Dataset, SyntheticSpec, generate_synthetic
from .engine import explanation_vector
from .errors import WoeboxError
from .models import BlackBox, ModelHandle, fit_gnb, predict
from .surrogate import SurrogateModel, fit_surrogate

__all__ = [
    "mse",
    "signed_ndcg",
    "EstimationConfig",
    "EstimationCell",
    "EstimationReport",
    "run_estimation_benchmark",
    "RobustnessConfig",
    "LipschitzResult",
    "RobustnessReport",
    "lipschitz_estimate",
    "run_robustness_benchmark",
    "make_explanation_fn",
    "plot_estimation_report",
    "plot_robustness_reports",
]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def mse(true_values, estimated_values) -> float:
    """Mean squared componentwise difference."""
    a = np.asarray(true_values, dtype=np.float64)
    b = np.asarray(estimated_values, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must share one shape, got {a.shape} and {b.shape}")
    return float(np.mean((a - b) ** 2))


def _dcg(gains: Sequence[float]) -> float:
    return float(sum(g / np.log2(rank + 1) for rank, g in enumerate(gains, start=1)))


def _one_side_ndcg(true_vals, est_vals, members) -> float:
    order = sorted(members, key=lambda i: (-est_vals[i], i))
    realized = _dcg([true_vals[i] for i in order])
    ideal = _dcg(sorted((true_vals[i] for i in members), reverse=True))
    return realized / ideal


def signed_ndcg(true_values, estimated_values) -> float:
    """Ranking quality in [0, 1] of the estimated evidence values.

    Features with positive true value are ranked by estimated value
    (descending) and scored by discounted cumulative gain with the true
    values as gains, normalized by the ideal ordering; the negative side
    is scored the same way on negated values; the two sides average.
    A side with no members contributes nothing; if both are empty the
    ranking is vacuous and the score is defined as 1 (with a warning).
    """
    a = np.asarray(true_values, dtype=np.float64)
    b = np.asarray(estimated_values, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vectors must share one shape, got {a.shape} and {b.shape}")
    pos = [i for i in range(len(a)) if a[i] > 0]
    neg = [i for i in range(len(a)) if a[i] < 0]
    sides = []
    if pos:
        sides.append(_one_side_ndcg(a, b, pos))
    if neg:
        sides.append(_one_side_ndcg(-a, -b, neg))
    if not sides:
        warnings.warn("all true evidence values are zero; ranking quality is vacuous")
        return 1.0
    return float(np.mean(sides))


# ---------------------------------------------------------------------------
# estimation-quality benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimationConfig:
    dims: tuple[int, ...] = (10,)
    n_fits: tuple[int, ...] = (100, 1000, 10000)
    n_train: int = 1000
    n_test: int = 10
    n_classes: int = 2
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    smoothing: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "n_fits", tuple(int(n) for n in self.n_fits))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.dims or min(self.dims) < 1:
            raise ValueError("dims must be positive")
        if not self.n_fits or min(self.n_fits) < 2:
            raise ValueError("n_fits must be at least 2")
        if self.n_train < 2 * self.n_classes:
            raise ValueError("n_train too small to expect 2 samples per class")
        if self.n_test < 1 or not self.seeds:
            raise ValueError("need at least one test instance and one seed")


@dataclass(frozen=True)
class EstimationCell:
    dim: int
    n_fit: int
    seed: int
    mse: float
    ndcg: float

    def __post_init__(self):
        if self.mse < 0 or not 0.0 <= self.ndcg <= 1.0:
            raise ValueError("mse must be >= 0 and ndcg within [0, 1]")


@dataclass(frozen=True)
class EstimationReport:
    cells: tuple[EstimationCell, ...]

    def mean(self, metric: str, dim: Optional[int] = None, n_fit: Optional[int] = None) -> float:
        vals = [
            getattr(c, metric)
            for c in self.cells
            if (dim is None or c.dim == dim) and (n_fit is None or c.n_fit == n_fit)
        ]
        if not vals:
            raise ValueError("no cells match the filter")
        return float(np.mean(vals))

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["d", "n_fit", "seed", "metric", "value"])
            for c in self.cells:
                writer.writerow([c.dim, c.n_fit, c.seed, "mse", f"{c.mse:.17g}"])
                writer.writerow([c.dim, c.n_fit, c.seed, "ndcg", f"{c.ndcg:.17g}"])

    def to_json_obj(self) -> dict:
        return {
            "cells": [
                {"d": c.dim, "n_fit": c.n_fit, "seed": c.seed, "mse": c.mse, "ndcg": c.ndcg}
                for c in self.cells
            ]
        }


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def run_estimation_benchmark(
    cfg: EstimationConfig,
    surrogate_factory: Optional[Callable[[ModelHandle, BlackBox, np.ndarray, int], SurrogateModel]] = None,
) -> EstimationReport:
    """Sweep (dim, n_fit, seed) cells of the estimation-quality protocol.

    Per (dim, seed): draw one synthetic dataset, fit the reference model
    on ``n_train`` rows, hide it behind the opaque interface, fit a
    surrogate per ``n_fit`` on a disjoint block (nested subsets, so cells
    within a seed are paired), and score surrogate-estimated per-feature
    evidence against the reference model's on held-out rows. The
    reference model's own evidence is used only for scoring, never by the
    surrogate. ``surrogate_factory`` overrides surrogate fitting (tests
    inject the reference model itself to pin the zero-error case).
    """
    cells = []
    for dim in cfg.dims:
        for seed in cfg.seeds:
            n_total = cfg.n_train + max(cfg.n_fits) + cfg.n_test
            data = generate_synthetic(
                SyntheticSpec(
                    dim=dim,
                    n_classes=cfg.n_classes,
                    n_samples=n_total,
                    seed=_derived_seed(seed, dim),
                )
            )
            train = data.subset(range(cfg.n_train))
            fit_pool = data.features[cfg.n_train : cfg.n_train + max(cfg.n_fits)]
            test_rows = data.features[n_total - cfg.n_test :]
            try:
                reference = fit_gnb(train, cfg.smoothing)
            except WoeboxError as exc:
                raise WoeboxError(f"d={dim} seed={seed}: {exc}") from exc
            opaque = BlackBox.from_model(reference, name=f"reference-d{dim}-s{seed}")
            all_classes = set(range(reference.n_classes))
            for n_fit in cfg.n_fits:
                try:
                    if surrogate_factory is not None:
                        surrogate = surrogate_factory(reference, opaque, fit_pool, n_fit)
                    else:
                        surrogate = fit_surrogate(
                            opaque,
                            fit_pool[:n_fit],
                            smoothing=cfg.smoothing,
                            feature_names=data.feature_names,
                        )
                    mses, ndcgs = [], []
                    for x in test_rows:
                        y_hat = opaque.predict(x)
                        true_vec = explanation_vector(
                            reference, x, (y_hat,), tuple(sorted(all_classes - {y_hat}))
                        )
                        inner_y = surrogate.to_inner_index(y_hat)
                        inner_alt = tuple(
                            i for i in range(surrogate.inner.n_classes) if i != inner_y
                        )
                        est_vec = explanation_vector(surrogate.inner, x, (inner_y,), inner_alt)
                        mses.append(mse(true_vec, est_vec))
                        ndcgs.append(signed_ndcg(true_vec, est_vec))
                except WoeboxError as exc:
                    raise WoeboxError(f"d={dim} n_fit={n_fit} seed={seed}: {exc}") from exc
                cells.append(
                    EstimationCell(
                        dim=dim,
                        n_fit=n_fit,
                        seed=seed,
                        mse=float(np.mean(mses)),
                        ndcg=float(np.mean(ndcgs)),
                    )
                )
    return EstimationReport(cells=tuple(cells))


# ---------------------------------------------------------------------------
# robustness benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobustnessConfig:
    """Ball radius is ``epsilon * scale``; ``scale`` carries the data's
    per-feature range when driven by the benchmark, and 1 for raw use."""

    epsilon: float = 0.1
    scale: float = 1.0
    budget: int = 60
    refine_steps: int = 10
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)
    n_instances: int = 10

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.epsilon <= 0 or self.scale <= 0:
            raise ValueError("epsilon and scale must be positive")
        if self.budget < 2:
            raise ValueError("budget must be at least 2")
        if not 0 <= self.refine_steps < self.budget:
            raise ValueError("refine_steps must be < budget")
        if self.n_instances < 1 or not self.seeds:
            raise ValueError("need at least one instance and one seed")

    @property
    def radius(self) -> float:
        return self.epsilon * self.scale


@dataclass(frozen=True)
class LipschitzResult:
    l_hat: float
    argmax_point: np.ndarray
    n_evaluations: int
    n_failures: int
    radius: float

    def __post_init__(self):
        if self.l_hat < 0:
            raise ValueError("estimate must be nonnegative")


def lipschitz_estimate(
    explain_fn: Callable[[np.ndarray], np.ndarray],
    x0,
    cfg: RobustnessConfig = RobustnessConfig(),
    seed: int = 0,
) -> LipschitzResult:
    """Estimate the local Lipschitz constant of ``explain_fn`` around x0.

    ``budget - refine_steps`` probes are drawn uniformly from the ball,
    then ``refine_steps`` shrinking-radius perturbations of the incumbent
    (projected back into the ball). Probes where ``explain_fn`` raises
    are skipped and counted; if every probe fails the estimate is
    undefined and an error is raised.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    d = x0.shape[0]
    radius = cfg.radius
    rng = np.random.default_rng(seed)
    e0 = np.asarray(explain_fn(x0), dtype=np.float64)

    best_ratio = -1.0
    best_point: Optional[np.ndarray] = None
    n_failures = 0
    n_evaluations = 1  # the center

    def probe(point: np.ndarray) -> None:
        nonlocal best_ratio, best_point, n_failures, n_evaluations
        dist = float(np.linalg.norm(point - x0))
        if dist == 0.0:
            return
        n_evaluations += 1
        try:
            e = np.asarray(explain_fn(point), dtype=np.float64)
        except Exception:
            n_failures += 1
            return
        ratio = float(np.linalg.norm(e - e0)) / dist
        if ratio > best_ratio:
            best_ratio = ratio
            best_point = point

    for _ in range(cfg.budget - cfg.refine_steps):
        direction = rng.standard_normal(d)
        norm = float(np.linalg.norm(direction))
        u = max(float(rng.random()), 1e-15)
        if norm == 0.0:
            continue
        probe(x0 + (radius * u ** (1.0 / d) / norm) * direction)

    for step in range(1, cfg.refine_steps + 1):
        center = best_point if best_point is not None else x0
        direction = rng.standard_normal(d)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        candidate = center + (radius * 0.5**step / norm) * direction
        offset = candidate - x0
        dist = float(np.linalg.norm(offset))
        if dist > radius:
            candidate = x0 + offset * (radius / dist)
        probe(candidate)

    if best_point is None:
        raise WoeboxError("every probe failed; cannot estimate the Lipschitz constant")
    return LipschitzResult(
        l_hat=max(best_ratio, 0.0),
        argmax_point=best_point,
        n_evaluations=n_evaluations,
        n_failures=n_failures,
        radius=radius,
    )


@dataclass(frozen=True)
class RobustnessRow:
    instance_index: int
    seed: int
    l_hat: float
    n_evaluations: int


@dataclass(frozen=True)
class RobustnessReport:
    name: str
    radius: float
    rows: tuple[RobustnessRow, ...]

    def estimates(self) -> np.ndarray:
        return np.array([row.l_hat for row in self.rows])

    def median(self) -> float:
        return float(np.median(self.estimates()))

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "instance", "seed", "metric", "value"])
            for row in self.rows:
                writer.writerow(
                    [self.name, row.instance_index, row.seed, "lipschitz", f"{row.l_hat:.17g}"]
                )

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "radius": self.radius,
            "rows": [
                {
                    "instance": r.instance_index,
                    "seed": r.seed,
                    "l_hat": r.l_hat,
                    "n_evaluations": r.n_evaluations,
                }
                for r in self.rows
            ],
        }


def make_explanation_fn(model: ModelHandle) -> Callable[[np.ndarray], np.ndarray]:
    """Per-feature evidence map x -> woe vector for the class predicted at
    x against all the others."""
    all_classes = tuple(range(model.n_classes))

    def explain_fn(x: np.ndarray) -> np.ndarray:
        y = predict(model, x)
        alt = tuple(c for c in all_classes if c != y)
        return explanation_vector(model, x, (y,), alt)

    return explain_fn


def run_robustness_benchmark(
    model: ModelHandle, data: Dataset, cfg: RobustnessConfig, name: str = "dataset"
) -> RobustnessReport:
    """Per-instance Lipschitz estimates of the model's evidence map on the
    first ``n_instances`` rows, one estimate per seed. The ball radius is
    ``epsilon`` times the mean per-feature data range."""
    ranges = data.features.max(axis=0) - data.features.min(axis=0)
    scale = float(np.mean(ranges))
    if scale <= 0:
        raise WoeboxError("data has zero feature range; cannot scale the ball radius")
    effective = replace(cfg, scale=scale)
    explain_fn = make_explanation_fn(model)
    rows = []
    n = min(cfg.n_instances, data.n_samples)
    for idx in range(n):
        for seed in cfg.seeds:
            result = lipschitz_estimate(explain_fn, data.features[idx], effective, seed=seed)
            rows.append(
                RobustnessRow(
                    instance_index=idx,
                    seed=seed,
                    l_hat=result.l_hat,
                    n_evaluations=result.n_evaluations,
                )
            )
    return RobustnessReport(name=name, radius=effective.radius, rows=tuple(rows))


# ---------------------------------------------------------------------------
# plots
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_estimation_report(report: EstimationReport, path: str) -> None:
    """Two stacked panels (MSE, ranking quality) against surrogate sample
    size, one line per input dimension."""
    plt = _pyplot()
    dims = sorted({c.dim for c in report.cells})
    n_fits = sorted({c.n_fit for c in report.cells})
    fig, (ax_mse, ax_ndcg) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    for dim in dims:
        ax_mse.plot(n_fits, [report.mean("mse", dim=dim, n_fit=n) for n in n_fits], marker="o", label=f"d={dim}")
        ax_ndcg.plot(n_fits, [report.mean("ndcg", dim=dim, n_fit=n) for n in n_fits], marker="o", label=f"d={dim}")
    ax_mse.set_xscale("log")
    ax_mse.set_yscale("log")
    ax_mse.set_ylabel("MSE")
    ax_mse.legend()
    ax_ndcg.set_xscale("log")
    ax_ndcg.set_ylim(0, 1.05)
    ax_ndcg.set_ylabel("NDCG")
    ax_ndcg.set_xlabel("surrogate sample size")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_robustness_reports(reports: Sequence[RobustnessReport], path: str) -> None:
    """Box plot of Lipschitz estimates per dataset with the L=1 guide."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(1.5 + 1.5 * len(reports), 4))
    ax.boxplot([r.estimates() for r in reports], tick_labels=[r.name for r in reports])
    ax.axhline(1.0, color="red", linestyle="--", linewidth=1)
    ax.set_ylabel("local Lipschitz estimate")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
