"""Sequential, contrastive explanations over nested class partitions.

An explanation for a prediction is built step by step: at each step a
subset of the still-plausible classes is kept and the rest are ruled
out, with the evidence for the split reported per feature atom. The
kept sets form a strictly shrinking chain that ends at the predicted
class, so every alternative is ruled out exactly once.

Hypothesis selection maximizes the contrastive total woe of a candidate
subset against its complement within the parent, minus a cardinality
penalty that favors halving the parent (keeping the number of steps
near log2 of the class count when the evidence is weak).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import FeaturePartition, LikelihoodContext, prior_log_odds
from .errors import WoeboxError
from .models import (
    ClampDiagnostics,
    LogisticModel,
    ModelHandle,
    _logsumexp,
    is_native,
    predict,
)

__all__ = [
    "ExplainerConfig",
    "ExplanationStep",
    "Explanation",
    "regularizer",
    "select_hypothesis",
    "explain",
    "salient_atoms",
    "EXPLANATION_SCHEMA",
]

_ORDER_POLICIES = ("given", "random", "by_abs_conditional_woe")
_SEARCH_MODES = ("exhaustive", "greedy")
_MODES = ("sequential", "oneshot")


@dataclass(frozen=True)
class ExplainerConfig:
    """Knobs for hypothesis selection, atom ordering, and salience."""

    reg_exponent: float = 2.0
    reg_weight: float = 1.0
    salience_threshold: float = 2.0
    subset_search: str = "exhaustive"
    exhaustive_limit: int = 12
    atom_order_policy: str = "by_abs_conditional_woe"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.reg_exponent <= 0:
            raise ValueError("reg_exponent must be positive")
        if self.reg_weight < 0:
            raise ValueError("reg_weight must be nonnegative")
        if self.salience_threshold < 0:
            raise ValueError("salience_threshold must be nonnegative")
        if self.subset_search not in _SEARCH_MODES:
            raise ValueError(f"subset_search must be one of {_SEARCH_MODES}")
        if self.exhaustive_limit < 2:
            raise ValueError("exhaustive_limit must be at least 2")
        if self.atom_order_policy not in _ORDER_POLICIES:
            raise ValueError(f"atom_order_policy must be one of {_ORDER_POLICIES}")
        if self.atom_order_policy == "random" and self.seed is None:
            raise ValueError("random atom order requires a seed")

    def to_json_obj(self) -> dict:
        return {
            "reg_exponent": self.reg_exponent,
            "reg_weight": self.reg_weight,
            "salience_threshold": self.salience_threshold,
            "subset_search": self.subset_search,
            "exhaustive_limit": self.exhaustive_limit,
            "atom_order_policy": self.atom_order_policy,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ExplanationStep:
    """One rule-out step: kept vs ruled-out class sets plus the evidence."""

    kept: tuple[int, ...]
    ruled_out: tuple[int, ...]
    prior_log_odds: float
    atom_order: tuple[int, ...]
    atom_woes: tuple[float, ...]
    total_woe: float
    salient: tuple[bool, ...]

    def __post_init__(self):
        if set(self.kept) & set(self.ruled_out):
            raise ValueError("kept and ruled_out must be disjoint")
        if len(self.atom_woes) != len(self.atom_order) or len(self.salient) != len(self.atom_order):
            raise ValueError("per-atom fields must align with the atom order")


@dataclass(frozen=True)
class Explanation:
    """Full sequential explanation for one instance."""

    instance: np.ndarray
    y_star: int
    steps: tuple[ExplanationStep, ...]
    partition: FeaturePartition
    config: ExplainerConfig
    mode: str
    class_names: tuple[str, ...]
    clamp_count: int = 0

    def __post_init__(self):
        x = np.ascontiguousarray(self.instance, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "instance", x)
        if not self.steps:
            raise ValueError("explanation needs at least one step")
        k = len(self.class_names)
        parent = tuple(range(k))
        for t, step in enumerate(self.steps):
            if tuple(sorted(step.kept + step.ruled_out)) != parent:
                raise ValueError(f"step {t}: kept + ruled_out must equal the previous kept set")
            if not step.ruled_out:
                raise ValueError(f"step {t}: nothing ruled out")
            if self.y_star not in step.kept:
                raise ValueError(f"step {t}: kept set must contain the predicted class")
            parent = step.kept
        if parent != (self.y_star,):
            raise ValueError("explanation must end with only the predicted class kept")

    def to_json_obj(self, partition_name: Optional[str] = None) -> dict:
        cfg = self.config.to_json_obj()
        cfg["mode"] = self.mode
        cfg["partition_name"] = partition_name
        steps = []
        for step in self.steps:
            atoms = []
            for pos, woe, sal in zip(step.atom_order, step.atom_woes, step.salient):
                atoms.append(
                    {
                        "name": self.partition.atom_names[pos],
                        "indices": list(self.partition.atoms[pos]),
                        "woe": float(woe),
                        "salient": bool(sal),
                    }
                )
            steps.append(
                {
                    "kept": list(step.kept),
                    "ruled_out": list(step.ruled_out),
                    "prior_log_odds": float(step.prior_log_odds),
                    "total_woe": float(step.total_woe),
                    "atoms": atoms,
                }
            )
        return {
            "y_star": int(self.y_star),
            "class_names": list(self.class_names),
            "instance": [float(v) for v in self.instance],
            "steps": steps,
            "units": "nats",
            "config": cfg,
            "diagnostics": {"clamp_count": int(self.clamp_count)},
        }

    def to_json(self, partition_name: Optional[str] = None, **dumps_kwargs) -> str:
        return json.dumps(self.to_json_obj(partition_name), **dumps_kwargs)


#: Contract for serialized explanations (service responses, CLI output).
EXPLANATION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["y_star", "class_names", "instance", "steps", "units", "config", "diagnostics"],
    "properties": {
        "y_star": {"type": "integer", "minimum": 0},
        "class_names": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        "instance": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "units": {"const": "nats"},
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "required": ["clamp_count"],
            "properties": {"clamp_count": {"type": "integer", "minimum": 0}},
        },
        "config": {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "reg_exponent",
                "reg_weight",
                "salience_threshold",
                "subset_search",
                "exhaustive_limit",
                "atom_order_policy",
                "seed",
                "mode",
                "partition_name",
            ],
            "properties": {
                "reg_exponent": {"type": "number", "exclusiveMinimum": 0},
                "reg_weight": {"type": "number", "minimum": 0},
                "salience_threshold": {"type": "number", "minimum": 0},
                "subset_search": {"enum": list(_SEARCH_MODES)},
                "exhaustive_limit": {"type": "integer", "minimum": 2},
                "atom_order_policy": {"enum": list(_ORDER_POLICIES)},
                "seed": {"type": ["integer", "null"]},
                "mode": {"enum": list(_MODES)},
                "partition_name": {"type": ["string", "null"]},
            },
        },
        "steps": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kept", "ruled_out", "prior_log_odds", "total_woe", "atoms"],
                "properties": {
                    "kept": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "ruled_out": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "prior_log_odds": {"type": "number"},
                    "total_woe": {"type": "number"},
                    "atoms": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["name", "indices", "woe", "salient"],
                            "properties": {
                                "name": {"type": "string"},
                                "indices": {
                                    "type": "array",
                                    "items": {"type": "integer"},
                                    "minItems": 1,
                                },
                                "woe": {"type": "number"},
                                "salient": {"type": "boolean"},
                            },
                        },
                    },
                },
            },
        },
    },
}


def regularizer(candidate_size: int, parent_size: int, p: float = 2.0) -> float:
    """Cardinality penalty in [0, 1]: distance of the candidate size from
    half the parent, normalized by the worst admissible size.

    Zero at an exact half split; 1 at the most lopsided admissible size.
    A parent of 2 admits only size 1, where the penalty is defined as 0.
    """
    if not 1 <= candidate_size < parent_size:
        raise ValueError("candidate size must satisfy 1 <= size < parent size")
    if p <= 0:
        raise ValueError("exponent must be positive")
    half = parent_size / 2.0
    worst = max(abs(s - half) ** p for s in range(1, parent_size))
    if worst == 0.0:
        return 0.0
    return abs(candidate_size - half) ** p / worst


def _candidate_subsets_exhaustive(parent, y_star):
    others = [c for c in parent if c != y_star]
    for size in range(len(others) + 1):
        for combo in itertools.combinations(others, size):
            subset = tuple(sorted((y_star,) + combo))
            if len(subset) < len(parent):
                yield subset


def _candidate_subsets_greedy(parent, y_star, ctx):
    """Prefix sets over classes ranked by singleton-vs-rest woe, the
    prediction forced first."""
    ranked = []
    for c in parent:
        if c == y_star:
            continue
        rest = tuple(s for s in parent if s != c)
        ranked.append((-ctx.woe(range(ctx.model.n_features), (c,), rest), c))
    ranked.sort()
    chain = [y_star] + [c for _, c in ranked]
    for size in range(1, len(parent)):
        yield tuple(sorted(chain[:size]))


def select_hypothesis(
    model: ModelHandle,
    x,
    parent,
    y_star: int,
    cfg: ExplainerConfig = ExplainerConfig(),
    _ctx: Optional[LikelihoodContext] = None,
) -> tuple[int, ...]:
    """Pick the subset of ``parent`` to keep around ``y_star``.

    Maximizes ``woe(U / parent-minus-U : x) - reg_weight * R(|U|)`` over
    strict subsets containing the prediction; the search is exhaustive for
    parents up to ``exhaustive_limit`` classes (unless greedy is forced)
    and falls back to greedy prefix sets beyond that. Ties break toward
    the higher posterior-mass subset, then lexicographic class order.
    """
    parent = tuple(sorted(int(c) for c in parent))
    if len(parent) < 2:
        raise ValueError("parent must contain at least 2 classes")
    if y_star not in parent:
        raise ValueError("parent must contain the predicted class")
    ctx = _ctx if _ctx is not None else LikelihoodContext(model, x)
    exhaustive = cfg.subset_search == "exhaustive" and len(parent) <= cfg.exhaustive_limit
    if exhaustive:
        candidates = _candidate_subsets_exhaustive(parent, y_star)
    else:
        candidates = _candidate_subsets_greedy(parent, y_star, ctx)

    all_features = range(ctx.model.n_features)
    score = ctx.class_ll(all_features) + ctx.model.log_priors
    parent_set = set(parent)

    best = None
    best_key = None
    for subset in candidates:
        complement = tuple(sorted(parent_set - set(subset)))
        objective = ctx.woe(all_features, subset, complement) - cfg.reg_weight * regularizer(
            len(subset), len(parent), cfg.reg_exponent
        )
        posterior_mass = _logsumexp(score[list(subset)])
        key = (-objective, -posterior_mass, subset)
        if best_key is None or key < best_key:
            best_key = key
            best = subset
    return best


def salient_atoms(step: ExplanationStep, threshold: float) -> list[int]:
    """Atom positions (into the step's order) with ``|woe| >= threshold``,
    sorted by descending magnitude; ties keep evaluation order."""
    hits = [(pos, abs(w)) for pos, w in enumerate(step.atom_woes) if abs(w) >= threshold]
    hits.sort(key=lambda h: -h[1])
    return [pos for pos, _ in hits]


def _order_atoms(ctx, partition, class_set, alt_set, cfg, rng):
    """Atom order and the matching conditional woes for one step."""
    m = partition.n_atoms
    if cfg.atom_order_policy == "given":
        order = list(range(m))
    elif cfg.atom_order_policy == "random":
        order = list(rng.permutation(m))
    else:  # greedy: largest remaining |conditional woe| next
        order = []
        prefix: tuple[int, ...] = ()
        remaining = list(range(m))
        while remaining:
            woes = [
                ctx.conditional_atom_woe(prefix, partition.atoms[pos], class_set, alt_set)
                for pos in remaining
            ]
            pick = max(range(len(remaining)), key=lambda i: (abs(woes[i]), -remaining[i]))
            order.append(remaining.pop(pick))
            prefix = prefix + partition.atoms[order[-1]]
    woes = []
    prefix = ()
    for pos in order:
        woes.append(ctx.conditional_atom_woe(prefix, partition.atoms[pos], class_set, alt_set))
        prefix = prefix + partition.atoms[pos]
    return [int(p) for p in order], woes


def explain(
    model: ModelHandle,
    x,
    partition: FeaturePartition,
    cfg: ExplainerConfig = ExplainerConfig(),
    mode: str = "sequential",
    y_star: Optional[int] = None,
    diag: Optional[ClampDiagnostics] = None,
) -> Explanation:
    """Generate the (sequential or one-shot) explanation for an instance.

    Sequential mode keeps selecting a subset of the remaining classes and
    ruling out the rest until only the prediction is left; one-shot mode
    contrasts the prediction against everything else in a single step.
    Deterministic given (model, x, partition, cfg).
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(f"instance must have {model.n_features} features")
    if partition.n_features != model.n_features:
        raise ValueError("partition does not cover the model's features")
    diag = diag if diag is not None else ClampDiagnostics()
    if y_star is None:
        if not is_native(model):
            raise WoeboxError("pass y_star explicitly when explaining through a surrogate")
        y_star = predict(model, x)
    y_star = int(y_star)
    k = model.n_classes

    if isinstance(model, LogisticModel):
        ctx = _LogisticContext(model, x)
    else:
        ctx = LikelihoodContext(model, x, diag)
    rng = np.random.default_rng(cfg.seed) if cfg.atom_order_policy == "random" else None

    steps: list[ExplanationStep] = []
    current = tuple(range(k))
    step_index = 0
    while len(current) > 1:
        if mode == "oneshot" or len(current) == 2:
            kept = (y_star,)
        else:
            kept = select_hypothesis(model, x, current, y_star, cfg, _ctx=ctx)
        ruled_out = tuple(sorted(set(current) - set(kept)))
        try:
            pi = prior_log_odds(model, kept, ruled_out)
            order, woes = _order_atoms(ctx, partition, kept, ruled_out, cfg, rng)
        except WoeboxError:
            raise
        except Exception as exc:
            raise WoeboxError(f"step {step_index}: {exc}") from exc
        total = float(sum(woes))
        steps.append(
            ExplanationStep(
                kept=kept,
                ruled_out=ruled_out,
                prior_log_odds=float(pi),
                atom_order=tuple(order),
                atom_woes=tuple(float(w) for w in woes),
                total_woe=total,
                salient=tuple(abs(w) >= cfg.salience_threshold for w in woes),
            )
        )
        current = kept
        step_index += 1
    return Explanation(
        instance=x,
        y_star=y_star,
        steps=tuple(steps),
        partition=partition,
        config=cfg,
        mode=mode,
        class_names=tuple(model.class_names),
        clamp_count=diag.clamps,
    )


class _LogisticContext:
    """Adapter giving the binary log-linear model the context interface
    used by the step loop (values via the per-feature identification)."""

    def __init__(self, model: LogisticModel, x):
        self.model = model
        self.x = np.asarray(x, dtype=np.float64)

    def conditional_atom_woe(self, prefix, atom, class_set, alt_set) -> float:
        value = float(self.model.weights[list(atom)] @ self.x[list(atom)])
        if class_set == (1,) and alt_set == (0,):
            return value
        if class_set == (0,) and alt_set == (1,):
            return -value
        raise ValueError("binary model: class sets must be {0} and {1}")
