"""JSON persistence for fitted models (and surrogates).

Floats serialize via ``repr`` so a save/load round trip reproduces every
parameter exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .models import GaussianFullModel, GaussianNBModel, LogisticModel, ModelHandle
from .surrogate import SurrogateModel

__all__ = ["model_to_json_obj", "model_from_json_obj", "save_model", "load_model"]


def _grid(a: np.ndarray) -> list:
    return [[float(v) for v in row] for row in a]


def model_to_json_obj(model) -> dict:
    if isinstance(model, SurrogateModel):
        obj = model_to_json_obj(model.inner)
        obj["surrogate_of"] = model.source
        obj["covered_class_indices"] = list(model.class_indices)
        obj["n_fit"] = model.n_fit
        return obj
    if isinstance(model, GaussianNBModel):
        return {
            "model_type": "gaussian_nb",
            "class_names": list(model.class_names),
            "feature_names": list(model.feature_names),
            "parameters": {
                "means": _grid(model.means),
                "variances": _grid(model.variances),
                "log_priors": [float(v) for v in model.log_priors],
            },
            "metadata": {"smoothing": model.smoothing},
        }
    if isinstance(model, LogisticModel):
        return {
            "model_type": "logistic",
            "class_names": list(model.class_names),
            "feature_names": list(model.feature_names),
            "parameters": {
                "weights": [float(v) for v in model.weights],
                "bias": model.bias,
                "log_priors": [float(v) for v in model.log_priors],
            },
            "metadata": {},
        }
    if isinstance(model, GaussianFullModel):
        return {
            "model_type": "gaussian_full",
            "class_names": list(model.class_names),
            "feature_names": list(model.feature_names),
            "parameters": {
                "means": _grid(model.means),
                "covariances": [_grid(c) for c in model.covariances],
                "log_priors": [float(v) for v in model.log_priors],
            },
            "metadata": {"lda": model.lda, "ridge": model.ridge},
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_json_obj(obj: dict):
    kind = obj.get("model_type")
    params = obj["parameters"]
    names = {
        "feature_names": tuple(obj["feature_names"]),
        "class_names": tuple(obj["class_names"]),
    }
    if kind == "gaussian_nb":
        inner = GaussianNBModel(
            means=np.array(params["means"], dtype=np.float64),
            variances=np.array(params["variances"], dtype=np.float64),
            log_priors=np.array(params["log_priors"], dtype=np.float64),
            smoothing=float(obj.get("metadata", {}).get("smoothing", 0.0)),
            **names,
        )
        if "surrogate_of" in obj:
            return SurrogateModel(
                inner=inner,
                class_indices=tuple(obj["covered_class_indices"]),
                source=obj["surrogate_of"],
                n_fit=int(obj.get("n_fit", 0)),
            )
        return inner
    if kind == "logistic":
        return LogisticModel(
            weights=np.array(params["weights"], dtype=np.float64),
            bias=float(params["bias"]),
            log_priors=np.array(params["log_priors"], dtype=np.float64),
            **names,
        )
    if kind == "gaussian_full":
        meta = obj.get("metadata", {})
        return GaussianFullModel(
            means=np.array(params["means"], dtype=np.float64),
            covariances=np.array(params["covariances"], dtype=np.float64),
            log_priors=np.array(params["log_priors"], dtype=np.float64),
            lda=bool(meta.get("lda", False)),
            ridge=float(meta.get("ridge", 0.0)),
            **names,
        )
    raise ValueError(f"unknown model_type {kind!r}")


def save_model(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json_obj(model), fh, indent=2)


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        return model_from_json_obj(json.load(fh))
