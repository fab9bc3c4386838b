"""Command-line entry points.

Subcommands: train, explain, surrogate-fit, bench-estimation,
bench-robustness, serve. Exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .data import load_csv
from .engine import FeaturePartition
from .errors import WoeboxError
from .evaluation import (
    EstimationConfig,
    RobustnessConfig,
    plot_estimation_report,
    plot_robustness_reports,
    run_estimation_benchmark,
    run_robustness_benchmark,
)
from .explain import ExplainerConfig, explain
from .model_io import load_model, save_model
from .models import BlackBox, fit_gnb, fit_lda, fit_logistic, fit_qda, predict_batch
from .surrogate import SurrogateModel, fit_surrogate


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _load_partitions(path: str, feature_names) -> dict[str, FeaturePartition]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {
        name: FeaturePartition.from_groups(groups, feature_names)
        for name, groups in raw.items()
    }


def _explainer_config(args) -> ExplainerConfig:
    return ExplainerConfig(
        salience_threshold=args.tau,
        atom_order_policy=args.order,
        seed=args.seed,
    )


def _cmd_train(args) -> int:
    data = load_csv(args.data, args.label)
    fitters = {
        "gnb": lambda: fit_gnb(data, smoothing=args.smoothing, priors=args.priors),
        "logistic": lambda: fit_logistic(data, priors=args.priors),
        "lda": lambda: fit_lda(data, ridge=args.ridge, priors=args.priors),
        "qda": lambda: fit_qda(data, ridge=args.ridge, priors=args.priors),
    }
    model = fitters[args.model]()
    save_model(model, args.out)
    accuracy = float(np.mean(predict_batch(model, data.features) == data.labels))
    print(f"wrote {args.out} ({args.model}, {data.n_classes} classes); training accuracy {accuracy:.4f}")
    return 0


def _resolve_instance(args, model):
    if (args.row is None) == (args.instance is None):
        raise UsageError("provide exactly one of --row / --instance")
    if args.row is not None:
        if args.data is None:
            raise UsageError("--row requires --data/--label")
        data = load_csv(args.data, args.label)
        if not 0 <= args.row < data.n_samples:
            raise WoeboxError(f"row {args.row} out of range (dataset has {data.n_samples})")
        return data.features[args.row]
    values = np.asarray(json.loads(args.instance), dtype=np.float64)
    if values.shape != (model.n_features,):
        raise WoeboxError(f"instance must have {model.n_features} values")
    return values


def _cmd_explain(args) -> int:
    model = load_model(args.model)
    if isinstance(model, SurrogateModel):
        model = model.inner
    x = _resolve_instance(args, model)
    if args.partitions:
        registry = _load_partitions(args.partitions, model.feature_names)
        if args.partition not in registry:
            raise WoeboxError(f"partition {args.partition!r} not in {sorted(registry)}")
        partition = registry[args.partition]
        partition_name = args.partition
    else:
        partition = FeaturePartition.singletons(model.feature_names)
        partition_name = "singletons"
    result = explain(model, x, partition, _explainer_config(args), mode=args.mode)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(result.to_json(partition_name=partition_name, indent=2))
    print(f"wrote {args.out} ({len(result.steps)} step(s), prediction {result.class_names[result.y_star]!r})")
    if args.svg:
        from .render import render_explanation_svg

        render_explanation_svg(result, args.svg)
        print(f"wrote {args.svg}")
    return 0


def _cmd_surrogate_fit(args) -> int:
    model = load_model(args.model)
    if isinstance(model, SurrogateModel):
        raise WoeboxError("refusing to fit a surrogate of a surrogate")
    data = load_csv(args.data, args.label)
    if tuple(model.feature_names) != tuple(data.feature_names):
        raise WoeboxError("model and background feature names disagree")
    background = data.features[: args.n_fit] if args.n_fit else data.features
    opaque = BlackBox.from_model(model, name=os.path.basename(args.model))
    surrogate = fit_surrogate(
        opaque, background, smoothing=args.smoothing, feature_names=data.feature_names
    )
    save_model(surrogate, args.out)
    print(f"wrote {args.out} (fitted on {surrogate.n_fit} predictions, "
          f"{surrogate.inner.n_classes} classes covered)")
    return 0


def _cmd_bench_estimation(args) -> int:
    cfg = EstimationConfig(
        dims=_int_list(args.dims),
        n_fits=_int_list(args.n_fits),
        n_train=args.n_train,
        n_test=args.n_test,
        n_classes=args.classes,
        seeds=_int_list(args.seeds),
    )
    report = run_estimation_benchmark(cfg)
    report.to_csv(args.out_csv)
    print(f"wrote {args.out_csv} ({len(report.cells)} cells)")
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_obj(), fh, indent=2)
        print(f"wrote {args.out_json}")
    if args.plot:
        plot_estimation_report(report, args.plot)
        print(f"wrote {args.plot}")
    for dim in cfg.dims:
        for n_fit in cfg.n_fits:
            print(
                f"d={dim} n_fit={n_fit}: "
                f"mse={report.mean('mse', dim=dim, n_fit=n_fit):.6g} "
                f"ndcg={report.mean('ndcg', dim=dim, n_fit=n_fit):.4f}"
            )
    return 0


def _cmd_bench_robustness(args) -> int:
    model = load_model(args.model)
    if isinstance(model, SurrogateModel):
        model = model.inner
    data = load_csv(args.data, args.label)
    cfg = RobustnessConfig(
        epsilon=args.epsilon,
        budget=args.budget,
        refine_steps=args.refine,
        seeds=_int_list(args.seeds),
        n_instances=args.instances,
    )
    report = run_robustness_benchmark(model, data, cfg, name=args.name)
    report.to_csv(args.out_csv)
    print(f"wrote {args.out_csv} ({len(report.rows)} estimates, median {report.median():.4g})")
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            json.dump(report.to_json_obj(), fh, indent=2)
        print(f"wrote {args.out_json}")
    if args.plot:
        plot_robustness_reports([report], args.plot)
        print(f"wrote {args.plot}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_state, create_app

    model = load_model(args.model)
    if isinstance(model, SurrogateModel):
        model = model.inner
    data = load_csv(args.data, args.label)
    partitions = _load_partitions(args.partitions, data.feature_names) if args.partitions else None
    state = build_state(data, model, partitions)
    app = create_app(state, ui_dir=args.ui_dir)
    port = int(os.environ.get("WOEBOX_PORT", args.port))
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="woebox", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a CSV and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True, help="name of the label column")
    p.add_argument("--model", required=True, choices=["gnb", "logistic", "lda", "qda"])
    p.add_argument("--out", required=True)
    p.add_argument("--smoothing", type=float, default=1e-9)
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--priors", choices=["empirical", "uniform"], default="empirical")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("explain", help="explain one instance, writing explanation JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.add_argument("--label")
    p.add_argument("--row", type=int)
    p.add_argument("--instance", help="inline JSON array of feature values")
    p.add_argument("--partitions", help="JSON file {partition: {atom: [feature names]}}")
    p.add_argument("--partition", default="groups", help="partition name inside --partitions")
    p.add_argument("--mode", choices=["sequential", "oneshot"], default="sequential")
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument(
        "--order",
        choices=["given", "random", "by_abs_conditional_woe"],
        default="by_abs_conditional_woe",
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("surrogate-fit", help="fit a likelihood surrogate on a model's predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="background CSV (labels ignored)")
    p.add_argument("--label", required=True)
    p.add_argument("--n-fit", type=int, default=0, help="use only the first N rows (0 = all)")
    p.add_argument("--smoothing", type=float, default=1e-9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_surrogate_fit)

    p = sub.add_parser("bench-estimation", help="estimation-quality benchmark grid")
    p.add_argument("--dims", default="10")
    p.add_argument("--n-fits", default="100,1000,10000")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--n-train", type=int, default=1000)
    p.add_argument("--n-test", type=int, default=10)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json")
    p.add_argument("--plot")
    p.set_defaults(func=_cmd_bench_estimation)

    p = sub.add_parser("bench-robustness", help="local-Lipschitz robustness benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--name", default="dataset")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--budget", type=int, default=60)
    p.add_argument("--refine", type=int, default=10)
    p.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9")
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json")
    p.add_argument("--plot")
    p.set_defaults(func=_cmd_bench_robustness)

    p = sub.add_parser("serve", help="run the local explanation service")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--partitions")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000, help="WOEBOX_PORT overrides this")
    p.add_argument("--ui-dir", default=None, help="static UI directory to serve at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with code 2
    except (WoeboxError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
