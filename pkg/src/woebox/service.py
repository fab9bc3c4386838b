"""Local HTTP service backing the explorer UI.

Serves dataset metadata, instances with predictions, and explanations
over JSON. All state is loaded up front and immutable afterwards: no
fitting happens per request, every explanation is computed against the
already-loaded model, and identical (seeded) requests produce
byte-identical responses. Validation failures return 400 with
field-level details, unknown rows/partitions 404, engine failures 500.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .data import Dataset
from .engine import FeaturePartition
from .errors import WoeboxError
from .explain import ExplainerConfig, explain
from .models import ModelHandle, is_native, predict_batch

__all__ = ["ServiceState", "build_state", "create_app"]


@dataclass(frozen=True)
class ServiceState:
    """Everything a running service needs, immutable after startup."""

    dataset: Dataset
    model: ModelHandle
    partitions: dict[str, FeaturePartition]
    defaults: ExplainerConfig = field(default_factory=ExplainerConfig)
    predictions: np.ndarray = field(default=None)  # type: ignore[assignment]


def build_state(
    dataset: Dataset,
    model: ModelHandle,
    partitions: Optional[dict[str, FeaturePartition]] = None,
    defaults: ExplainerConfig = ExplainerConfig(),
) -> ServiceState:
    """Validate model/dataset agreement and precompute predictions.

    The trivial all-singletons partition is always registered.
    """
    if not is_native(model):
        raise WoeboxError("the service needs a native model (fit a surrogate first)")
    if tuple(model.feature_names) != tuple(dataset.feature_names):
        raise WoeboxError("model and dataset feature names disagree")
    if tuple(model.class_names) != tuple(dataset.class_names):
        raise WoeboxError("model and dataset class names disagree")
    registry = {"singletons": FeaturePartition.singletons(dataset.feature_names)}
    if partitions:
        for name, part in partitions.items():
            if part.n_features != dataset.n_features:
                raise WoeboxError(f"partition {name!r} does not cover the dataset features")
            registry[name] = part
    predictions = predict_batch(model, dataset.features)
    return ServiceState(
        dataset=dataset,
        model=model,
        partitions=registry,
        defaults=defaults,
        predictions=predictions,
    )


class ExplainRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    row_index: Optional[int] = None
    instance: Optional[list[float]] = None
    partition_name: Optional[str] = None
    partition: Optional[dict[str, list[str]]] = None
    mode: str = "sequential"
    tau: Optional[float] = None
    atom_order_policy: Optional[str] = None
    seed: Optional[int] = None


def _error(status: int, detail, kind: str = "error") -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": kind, "detail": detail})


def create_app(state: ServiceState, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="woebox", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return _error(400, details, kind="validation")

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/meta")
    def meta():
        return {
            "class_names": list(state.dataset.class_names),
            "feature_names": list(state.dataset.feature_names),
            "partitions": {
                name: {
                    "atom_names": list(part.atom_names),
                    "atoms": [list(a) for a in part.atoms],
                }
                for name, part in sorted(state.partitions.items())
            },
            "config_defaults": {
                **state.defaults.to_json_obj(),
                "mode": "sequential",
                "partition_name": "singletons",
            },
            "n_instances": int(state.dataset.n_samples),
        }

    @app.get("/api/instances")
    def instances(offset: int = 0, limit: int = 50):
        if offset < 0 or limit < 1:
            return _error(400, [{"field": "offset/limit", "message": "must be nonnegative / positive"}], "validation")
        rows = []
        end = min(offset + limit, state.dataset.n_samples)
        for i in range(offset, end):
            rows.append(
                {
                    "index": i,
                    "features": [float(v) for v in state.dataset.features[i]],
                    "label": int(state.dataset.labels[i]),
                    "prediction": int(state.predictions[i]),
                }
            )
        return {"total": int(state.dataset.n_samples), "offset": offset, "rows": rows}

    @app.post("/api/explain")
    def explain_endpoint(req: ExplainRequest):
        if (req.row_index is None) == (req.instance is None):
            return _error(
                400,
                [{"field": "row_index/instance", "message": "provide exactly one of the two"}],
                "validation",
            )
        if req.row_index is not None:
            if not 0 <= req.row_index < state.dataset.n_samples:
                return _error(404, f"row {req.row_index} does not exist", "not_found")
            x = state.dataset.features[req.row_index]
        else:
            x = np.asarray(req.instance, dtype=np.float64)
            if x.shape != (state.dataset.n_features,):
                return _error(
                    400,
                    [
                        {
                            "field": "instance",
                            "message": f"expected {state.dataset.n_features} values, got {x.shape[0]}",
                        }
                    ],
                    "validation",
                )
            if not np.all(np.isfinite(x)):
                return _error(
                    400, [{"field": "instance", "message": "values must be finite"}], "validation"
                )

        if req.partition is not None:
            try:
                partition = FeaturePartition.from_groups(
                    req.partition, state.dataset.feature_names, fill_missing=False
                )
            except ValueError as exc:
                return _error(400, [{"field": "partition", "message": str(exc)}], "validation")
            partition_name = None
        else:
            partition_name = req.partition_name or "singletons"
            partition = state.partitions.get(partition_name)
            if partition is None:
                return _error(404, f"unknown partition {partition_name!r}", "not_found")

        try:
            cfg = ExplainerConfig(
                reg_exponent=state.defaults.reg_exponent,
                reg_weight=state.defaults.reg_weight,
                salience_threshold=state.defaults.salience_threshold
                if req.tau is None
                else req.tau,
                subset_search=state.defaults.subset_search,
                exhaustive_limit=state.defaults.exhaustive_limit,
                atom_order_policy=req.atom_order_policy or state.defaults.atom_order_policy,
                seed=req.seed if req.seed is not None else state.defaults.seed,
            )
        except ValueError as exc:
            return _error(400, [{"field": "config", "message": str(exc)}], "validation")
        if req.mode not in ("sequential", "oneshot"):
            return _error(
                400,
                [{"field": "mode", "message": "must be 'sequential' or 'oneshot'"}],
                "validation",
            )
        try:
            result = explain(state.model, x, partition, cfg, mode=req.mode)
        except (WoeboxError, ValueError) as exc:
            return _error(500, str(exc), "engine")
        return JSONResponse(result.to_json_obj(partition_name=partition_name))

    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
