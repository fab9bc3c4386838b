"""Evidence estimation for opaque predictors.

An opaque model answers only ``predict``, so its weight of evidence is
computed through a class-conditional likelihood estimator fitted once on
background features labeled with the model's own predictions (never with
ground truth). Explanations then run entirely against the estimator,
with only the prediction itself coming from the opaque model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .engine import FeaturePartition
from .errors import DegenerateModelError, WoeboxError
from .explain import ExplainerConfig, Explanation, explain
from .models import BlackBox, GaussianNBModel, fit_gnb

__all__ = ["SurrogateModel", "fit_surrogate", "explain_black_box"]


@dataclass(frozen=True)
class SurrogateModel:
    """Likelihood estimator standing in for an opaque predictor.

    ``inner`` lives in a compacted class space covering only classes the
    predictor actually produced; ``class_indices`` maps those back to the
    predictor's label space.
    """

    inner: GaussianNBModel
    class_indices: tuple[int, ...]
    source: str
    n_fit: int

    def __post_init__(self):
        object.__setattr__(self, "class_indices", tuple(int(i) for i in self.class_indices))
        if len(self.class_indices) != self.inner.n_classes:
            raise ValueError("class_indices must map every surrogate class")

    def covers(self, class_index: int) -> bool:
        return int(class_index) in self.class_indices

    def to_inner_index(self, class_index: int) -> int:
        try:
            return self.class_indices.index(int(class_index))
        except ValueError:
            raise WoeboxError(
                f"class {class_index} was never predicted on the background data; "
                "the surrogate cannot weigh evidence for it"
            ) from None


def fit_surrogate(
    black_box: BlackBox,
    background: np.ndarray,
    smoothing: float = 1e-9,
    feature_names=None,
) -> SurrogateModel:
    """Fit the likelihood estimator on (background row, prediction) pairs.

    Issues exactly one ``predict`` query per background row. Classes that
    are never predicted (or predicted fewer than twice, leaving their
    variance undefined) are dropped from the surrogate with a warning;
    if fewer than two classes remain the predictor is unexplainable this
    way and fitting fails.
    """
    background = np.ascontiguousarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a nonempty (n, d) feature matrix")
    predictions = np.empty(background.shape[0], dtype=np.int64)
    for row_index, row in enumerate(background):
        try:
            predictions[row_index] = black_box.predict(row)
        except Exception as exc:
            raise WoeboxError(f"predictor failed on background row {row_index}: {exc}") from exc

    values, counts = np.unique(predictions, return_counts=True)
    if len(values) < 2:
        raise DegenerateModelError(
            "single predicted class on the background data; surrogate would be unusable"
        )
    kept = [int(v) for v, n in zip(values, counts) if n >= 2]
    all_classes = range(black_box.n_classes)
    dropped = sorted(set(all_classes) - set(kept))
    if dropped:
        names = [_class_name(black_box, c) for c in dropped]
        warnings.warn(
            f"dropping {len(dropped)} class(es) never (or once) predicted "
            f"on the background data: {names}"
        )
    if len(kept) < 2:
        raise DegenerateModelError(
            "fewer than 2 usable predicted classes on the background data"
        )

    keep_mask = np.isin(predictions, kept)
    remap = {orig: i for i, orig in enumerate(kept)}
    labels = np.array([remap[int(p)] for p in predictions[keep_mask]], dtype=np.int64)
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(background.shape[1]))
    fit_data = Dataset(
        features=background[keep_mask],
        labels=labels,
        feature_names=feature_names,
        class_names=tuple(_class_name(black_box, c) for c in kept),
    )
    inner = fit_gnb(fit_data, smoothing=smoothing)
    return SurrogateModel(
        inner=inner,
        class_indices=tuple(kept),
        source=black_box.name,
        n_fit=int(background.shape[0]),
    )


def _class_name(black_box: BlackBox, class_index: int) -> str:
    if black_box.class_names:
        return black_box.class_names[class_index]
    return f"c{class_index}"


def explain_black_box(
    black_box: BlackBox,
    surrogate: SurrogateModel,
    x,
    partition: FeaturePartition,
    cfg: ExplainerConfig = ExplainerConfig(),
    mode: str = "sequential",
) -> Explanation:
    """Explain one opaque prediction through the fitted surrogate.

    The opaque model is queried exactly once (for the prediction); all
    likelihoods and priors come from the surrogate, whose class space the
    explanation is expressed in.
    """
    y_star = black_box.predict(x)
    inner_y = surrogate.to_inner_index(y_star)
    return explain(surrogate.inner, x, partition, cfg, mode=mode, y_star=inner_y)
