"""Fitted probabilistic classifiers and their likelihood queries.

Three native families expose class-conditional log-likelihoods over
arbitrary feature subsets (diagonal Gaussian, full-covariance Gaussian,
and log-linear via its closed forms), plus an opaque predictor wrapper
that exposes only ``predict``. Composite hypotheses (class sets) are
handled as prior-weighted mixtures:

    P(x_A | y in U) = sum_{c in U} P(x_A | c) P(c)  /  sum_{c in U} P(c)

computed with log-sum-exp throughout. Density values falling below the
probability floor are raised to it and counted on the optional
``ClampDiagnostics`` so results degrade gracefully far from the data.

All models are immutable after fitting; queries are pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from ._kernels._gnb_py import LOG_TWO_PI
from .data import Dataset
from .errors import DegenerateModelError, LikelihoodUnavailableError

__all__ = [
    "PROB_FLOOR",
    "LOG_PROB_FLOOR",
    "ClampDiagnostics",
    "GaussianNBModel",
    "LogisticModel",
    "GaussianFullModel",
    "BlackBox",
    "ModelHandle",
    "is_native",
    "fit_gnb",
    "fit_logistic",
    "fit_lda",
    "fit_qda",
    "class_set_log_likelihood",
    "posterior_log_odds",
    "conditional_gaussian",
    "predict",
    "predict_proba",
    "predict_batch",
]

PROB_FLOOR = 1e-12
LOG_PROB_FLOOR = float(np.log(PROB_FLOOR))


@dataclass
class ClampDiagnostics:
    """Counts probability-floor clamps encountered during a computation."""

    clamps: int = 0

    def add(self, n: int) -> None:
        self.clamps += int(n)


def _logsumexp(a):
    a = np.asarray(a, dtype=np.float64)
    m = float(np.max(a))
    return m + float(np.log(np.sum(np.exp(a - m))))


def _normalize_log_priors(log_priors, k):
    lp = np.ascontiguousarray(log_priors, dtype=np.float64)
    if lp.shape != (k,):
        raise ValueError(f"log_priors must have shape ({k},)")
    if not np.all(np.isfinite(lp)):
        raise ValueError("log_priors must be finite")
    total = _logsumexp(lp)
    if abs(total) > 1e-12:
        lp = lp - total
    elif lp.flags.writeable is False:
        return lp
    lp = lp.copy()
    lp.setflags(write=False)
    return lp


def _check_names(feature_names, class_names, d, k):
    feature_names = tuple(feature_names)
    class_names = tuple(class_names)
    if len(feature_names) != d:
        raise ValueError(f"expected {d} feature names, got {len(feature_names)}")
    if len(class_names) != k:
        raise ValueError(f"expected {k} class names, got {len(class_names)}")
    return feature_names, class_names


@dataclass(frozen=True)
class GaussianNBModel:
    """Diagonal-covariance Gaussian classifier (independent features per class)."""

    means: np.ndarray
    variances: np.ndarray
    log_priors: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    smoothing: float = 0.0

    def __post_init__(self):
        means = np.ascontiguousarray(self.means, dtype=np.float64)
        variances = np.ascontiguousarray(self.variances, dtype=np.float64)
        if means.ndim != 2 or variances.shape != means.shape:
            raise ValueError("means and variances must share a (k, d) shape")
        k, d = means.shape
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(variances)):
            raise ValueError("parameters must be finite")
        if np.any(variances <= 0):
            raise ValueError("all variances must be positive")
        fn, cn = _check_names(self.feature_names, self.class_names, d, k)
        means.setflags(write=False)
        variances.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "log_priors", _normalize_log_priors(self.log_priors, k))
        object.__setattr__(self, "feature_names", fn)
        object.__setattr__(self, "class_names", cn)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def log_density_table(self, x, diag: Optional[ClampDiagnostics] = None) -> np.ndarray:
        """(k, d) per-class per-feature log densities at x, floor applied."""
        table, n_clamped = _kernels.log_density_table(
            np.asarray(x, dtype=np.float64), self.means, self.variances, LOG_PROB_FLOOR
        )
        if diag is not None:
            diag.add(n_clamped)
        return table

    def subset_class_log_likelihood(self, x, indices, diag=None) -> np.ndarray:
        """(k,) values of log P(x[indices] | class c)."""
        table = self.log_density_table(x, diag)
        idx = np.asarray(indices, dtype=np.intp)
        return table[:, idx].sum(axis=1)


@dataclass(frozen=True)
class LogisticModel:
    """Binary log-linear classifier; log odds are ``weights @ x + bias``.

    Not generative: likelihood queries are answered only through the
    per-feature identification ``woe_i = weights[i] * x[i]``, which treats
    the coefficients as feature-wise log-likelihood ratios.
    """

    weights: np.ndarray
    bias: float
    log_priors: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise ValueError("parameters must be finite")
        fn, cn = _check_names(self.feature_names, self.class_names, w.shape[0], 2)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "log_priors", _normalize_log_priors(self.log_priors, 2))
        object.__setattr__(self, "feature_names", fn)
        object.__setattr__(self, "class_names", cn)

    @property
    def n_classes(self) -> int:
        return 2

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def decision(self, x) -> float:
        """Posterior log odds of class 1 over class 0."""
        return float(self.weights @ np.asarray(x, dtype=np.float64) + self.bias)


@dataclass(frozen=True)
class GaussianFullModel:
    """Full-covariance Gaussian classifier; shared covariance when ``lda``."""

    means: np.ndarray
    covariances: np.ndarray
    log_priors: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    lda: bool = False
    ridge: float = 0.0

    def __post_init__(self):
        means = np.ascontiguousarray(self.means, dtype=np.float64)
        covs = np.ascontiguousarray(self.covariances, dtype=np.float64)
        if means.ndim != 2:
            raise ValueError("means must be (k, d)")
        k, d = means.shape
        if covs.shape != (k, d, d):
            raise ValueError("covariances must be (k, d, d)")
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(covs)):
            raise ValueError("parameters must be finite")
        for c in range(k):
            if not np.allclose(covs[c], covs[c].T, atol=1e-12):
                raise ValueError(f"covariance of class {c} is not symmetric")
            try:
                np.linalg.cholesky(covs[c])
            except np.linalg.LinAlgError:
                raise ValueError(f"covariance of class {c} is not positive definite") from None
        if self.lda and k > 1 and not all(np.array_equal(covs[0], covs[c]) for c in range(1, k)):
            raise ValueError("lda flag requires identical covariances across classes")
        fn, cn = _check_names(self.feature_names, self.class_names, d, k)
        means.setflags(write=False)
        covs.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "log_priors", _normalize_log_priors(self.log_priors, k))
        object.__setattr__(self, "feature_names", fn)
        object.__setattr__(self, "class_names", cn)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def subset_class_log_likelihood(self, x, indices, diag=None) -> np.ndarray:
        """(k,) marginal log densities of x[indices] (Gaussian marginal =
        mean/covariance restricted to the index set), floor applied per query."""
        x = np.asarray(x, dtype=np.float64)
        idx = np.asarray(indices, dtype=np.intp)
        p = idx.shape[0]
        if p == 0:
            return np.zeros(self.n_classes)
        out = np.empty(self.n_classes)
        n_clamped = 0
        for c in range(self.n_classes):
            dev = x[idx] - self.means[c, idx]
            cov = self.covariances[c][np.ix_(idx, idx)]
            sign, logdet = np.linalg.slogdet(cov)
            if sign <= 0:
                raise ValueError(f"marginal covariance of class {c} is not positive definite")
            quad = float(dev @ np.linalg.solve(cov, dev))
            ll = -0.5 * (p * LOG_TWO_PI + logdet + quad)
            if not np.isfinite(ll) or ll < LOG_PROB_FLOOR:
                ll = LOG_PROB_FLOOR
                n_clamped += 1
            out[c] = ll
        if diag is not None:
            diag.add(n_clamped)
        return out


@dataclass(frozen=True)
class BlackBox:
    """Opaque predictor: a prediction oracle with no likelihood access.

    ``predict_fn`` maps one feature vector to a class index in the
    dataset's label space. ``concurrent_safe`` declares whether callers
    may invoke it from several threads at once.
    """

    predict_fn: Callable[[np.ndarray], int]
    n_classes: int
    class_names: tuple[str, ...] = ()
    predict_proba_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    concurrent_safe: bool = True
    name: str = "black-box"

    def predict(self, x) -> int:
        return int(self.predict_fn(np.asarray(x, dtype=np.float64)))

    def predict_proba(self, x) -> np.ndarray:
        if self.predict_proba_fn is None:
            raise LikelihoodUnavailableError(f"{self.name} does not expose probabilities")
        p = np.asarray(self.predict_proba_fn(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)

    @staticmethod
    def from_model(model: "ModelHandle", name: str = "wrapped-model") -> "BlackBox":
        """Hide a native model behind the opaque interface (prediction only)."""
        return BlackBox(
            predict_fn=lambda x: predict(model, x),
            n_classes=model.n_classes,
            class_names=tuple(model.class_names),
            name=name,
        )


ModelHandle = Union[GaussianNBModel, LogisticModel, GaussianFullModel, BlackBox]

_GENERATIVE = (GaussianNBModel, GaussianFullModel)


def is_native(model: ModelHandle) -> bool:
    return not isinstance(model, BlackBox)


def _normalize_class_set(class_set, k) -> tuple[int, ...]:
    cs = tuple(sorted(int(c) for c in class_set))
    if not cs:
        raise ValueError("class set must be nonempty")
    if len(set(cs)) != len(cs):
        raise ValueError("class set has repeated entries")
    if cs[0] < 0 or cs[-1] >= k:
        raise ValueError(f"class indices must lie in [0, {k})")
    return cs


def log_prior_mass(model: ModelHandle, class_set) -> float:
    """log of the total prior probability of the class set."""
    if isinstance(model, BlackBox):
        raise LikelihoodUnavailableError("priors unavailable for an opaque predictor")
    cs = _normalize_class_set(class_set, model.n_classes)
    return _logsumexp(model.log_priors[list(cs)])


def class_set_log_likelihood(model, x, class_set, indices=None, diag=None) -> float:
    """log P(x[indices] | y in class_set) under the prior-weighted mixture.

    ``indices=None`` uses every feature. Permutation-invariant in the
    class set (sets are canonicalized before the reduction).
    """
    if isinstance(model, (BlackBox, LogisticModel)):
        raise LikelihoodUnavailableError(
            "likelihood unavailable: model does not expose class-conditional densities"
        )
    cs = _normalize_class_set(class_set, model.n_classes)
    if indices is None:
        indices = np.arange(model.n_features)
    ll = model.subset_class_log_likelihood(x, indices, diag)
    return _set_mixture(ll, model.log_priors, cs)


def _set_mixture(class_ll, log_priors, class_set) -> float:
    idx = list(class_set)
    joint = _logsumexp(class_ll[idx] + log_priors[idx])
    return joint - _logsumexp(log_priors[idx])


def posterior_log_odds(model, x, class_set, alt_set, diag=None) -> float:
    """log posterior-probability ratio of ``class_set`` over ``alt_set`` at x."""
    if isinstance(model, BlackBox):
        raise LikelihoodUnavailableError("posteriors unavailable for an opaque predictor")
    u = _normalize_class_set(class_set, model.n_classes)
    v = _normalize_class_set(alt_set, model.n_classes)
    if set(u) & set(v):
        raise ValueError("class sets must be disjoint")
    if isinstance(model, LogisticModel):
        if u == (1,) and v == (0,):
            return model.decision(x)
        if u == (0,) and v == (1,):
            return -model.decision(x)
        raise ValueError("binary model: class sets must be {0} and {1}")
    ll = model.subset_class_log_likelihood(x, np.arange(model.n_features), diag)
    score = ll + model.log_priors
    return _logsumexp(score[list(u)]) - _logsumexp(score[list(v)])


def conditional_gaussian(model: GaussianFullModel, class_index: int, target_index: int, given):
    """Mean and variance of feature ``target_index`` given the first
    ``target_index`` feature values, under the class-conditional Gaussian.

    Uses the block inverse of the leading principal submatrix; with a
    diagonal covariance this reduces to the unconditional (mean, variance).
    """
    if not isinstance(model, GaussianFullModel):
        raise TypeError("conditional_gaussian requires a full-covariance model")
    i = int(target_index)
    if not 0 <= i < model.n_features:
        raise ValueError("target_index out of range")
    mu = model.means[int(class_index)]
    cov = model.covariances[int(class_index)]
    given = np.asarray(given, dtype=np.float64)
    if given.shape != (i,):
        raise ValueError(f"expected {i} conditioning values, got {given.shape}")
    if i == 0:
        return float(mu[0]), float(cov[0, 0])
    block = cov[:i, :i]
    cross = cov[i, :i]
    try:
        solved = np.linalg.solve(block, cross)
    except np.linalg.LinAlgError:
        raise ValueError("singular conditioning block") from None
    mean = float(mu[i] + solved @ (given - mu[:i]))
    var = float(cov[i, i] - solved @ cross)
    if var <= 0:
        raise ValueError("conditional variance collapsed to a non-positive value")
    return mean, var


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _class_counts(data: Dataset, min_per_class: int = 2) -> np.ndarray:
    counts = np.bincount(data.labels, minlength=data.n_classes)
    for c, n in enumerate(counts):
        if n < min_per_class:
            raise DegenerateModelError(
                f"class {data.class_names[c]!r} has {n} samples; need at least {min_per_class}"
            )
    return counts


def _fit_log_priors(counts, priors: str) -> np.ndarray:
    if priors == "empirical":
        return np.log(counts / counts.sum())
    if priors == "uniform":
        return np.full(len(counts), -np.log(len(counts)))
    raise ValueError(f"priors must be 'empirical' or 'uniform', got {priors!r}")


def fit_gnb(data: Dataset, smoothing: float = 1e-9, priors: str = "empirical") -> GaussianNBModel:
    """Per-class feature means/variances with additive variance smoothing.

    Every class variance gets ``smoothing * max_j Var(x_j)`` added, where
    the max runs over the pooled per-feature variances, so fitted variances
    are bounded below by that amount.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    counts = _class_counts(data)
    k, d = data.n_classes, data.n_features
    means = np.empty((k, d))
    variances = np.empty((k, d))
    for c in range(k):
        rows = data.features[data.labels == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0)
    floor = smoothing * float(data.features.var(axis=0).max())
    variances += floor
    if np.any(variances <= 0):
        raise DegenerateModelError(
            "zero variance after smoothing; increase `smoothing` or check the data"
        )
    return GaussianNBModel(
        means=means,
        variances=variances,
        log_priors=_fit_log_priors(counts, priors),
        feature_names=data.feature_names,
        class_names=data.class_names,
        smoothing=smoothing,
    )


def fit_logistic(
    data: Dataset, max_iter: int = 5000, tol: float = 1e-10, priors: str = "empirical"
) -> LogisticModel:
    """Gradient ascent on the mean log-likelihood with a fixed step.

    The step is the inverse of the gradient's Lipschitz bound, so ascent is
    monotone; iteration stops at ``max_iter`` or when the gradient's max
    norm drops below ``tol``.
    """
    if data.n_classes != 2:
        raise DegenerateModelError("logistic fitting requires exactly 2 classes")
    counts = _class_counts(data)
    n, d = data.features.shape
    design = np.hstack([data.features, np.ones((n, 1))])
    y = data.labels.astype(np.float64)
    lipschitz = 0.25 * float(np.linalg.eigvalsh(design.T @ design / n).max())
    step = 1.0 / max(lipschitz, 1e-12)
    theta = np.zeros(d + 1)
    for _ in range(max_iter):
        p = 1.0 / (1.0 + np.exp(-(design @ theta)))
        grad = design.T @ (y - p) / n
        theta += step * grad
        if float(np.abs(grad).max()) < tol:
            break
    return LogisticModel(
        weights=theta[:d],
        bias=float(theta[d]),
        log_priors=_fit_log_priors(counts, priors),
        feature_names=data.feature_names,
        class_names=data.class_names,
    )


def _ridge_amount(cov: np.ndarray, ridge: float) -> float:
    return max(ridge * float(np.trace(cov)) / cov.shape[0], 1e-12)


def fit_qda(data: Dataset, ridge: float = 1e-6, priors: str = "empirical") -> GaussianFullModel:
    """Per-class full covariances, each ridge-regularized on the diagonal."""
    counts = _class_counts(data)
    k, d = data.n_classes, data.n_features
    means = np.empty((k, d))
    covs = np.empty((k, d, d))
    for c in range(k):
        rows = data.features[data.labels == c]
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        cov = centered.T @ centered / rows.shape[0]
        covs[c] = cov + _ridge_amount(cov, ridge) * np.eye(d)
    return GaussianFullModel(
        means=means,
        covariances=covs,
        log_priors=_fit_log_priors(counts, priors),
        feature_names=data.feature_names,
        class_names=data.class_names,
        lda=False,
        ridge=ridge,
    )


def fit_lda(data: Dataset, ridge: float = 1e-6, priors: str = "empirical") -> GaussianFullModel:
    """Class means with one pooled within-class covariance shared by all."""
    counts = _class_counts(data)
    k, d = data.n_classes, data.n_features
    means = np.empty((k, d))
    pooled = np.zeros((d, d))
    for c in range(k):
        rows = data.features[data.labels == c]
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        pooled += centered.T @ centered
    pooled /= data.n_samples
    pooled += _ridge_amount(pooled, ridge) * np.eye(d)
    covs = np.broadcast_to(pooled, (k, d, d)).copy()
    return GaussianFullModel(
        means=means,
        covariances=covs,
        log_priors=_fit_log_priors(counts, priors),
        feature_names=data.feature_names,
        class_names=data.class_names,
        lda=True,
        ridge=ridge,
    )


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def predict_proba(model: ModelHandle, x) -> np.ndarray:
    """Posterior class probabilities at x (sum to 1)."""
    if isinstance(model, BlackBox):
        return model.predict_proba(x)
    if isinstance(model, LogisticModel):
        p1 = 1.0 / (1.0 + np.exp(-model.decision(x)))
        return np.array([1.0 - p1, p1])
    ll = model.subset_class_log_likelihood(x, np.arange(model.n_features))
    score = ll + model.log_priors
    score -= score.max()
    p = np.exp(score)
    return p / p.sum()


def predict(model: ModelHandle, x) -> int:
    """Predicted class index at x (posterior argmax for native models)."""
    if isinstance(model, BlackBox):
        return model.predict(x)
    if isinstance(model, LogisticModel):
        return int(model.decision(x) > 0)
    ll = model.subset_class_log_likelihood(x, np.arange(model.n_features))
    return int(np.argmax(ll + model.log_priors))


def predict_batch(model: ModelHandle, features: np.ndarray) -> np.ndarray:
    return np.array([predict(model, row) for row in features], dtype=np.int64)
