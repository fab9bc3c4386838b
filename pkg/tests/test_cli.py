"""End-to-end runs of the command-line interface."""

import json

import jsonschema
import numpy as np
import pytest

from woebox.cli import main
from woebox.data import SyntheticSpec, generate_synthetic, save_csv
from woebox.explain import EXPLANATION_SCHEMA
from woebox.model_io import load_model


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = generate_synthetic(SyntheticSpec(dim=4, n_classes=6, n_samples=1500, seed=51))
    csv_path = root / "data.csv"
    save_csv(data, str(csv_path), label_column="category")
    partitions = {"groups": {"front": ["x0", "x1"], "back": ["x2", "x3"]}}
    part_path = root / "partitions.json"
    part_path.write_text(json.dumps(partitions), encoding="utf-8")
    return root, str(csv_path), str(part_path)


class TestTrain:
    def test_train_round_trips_and_reports_accuracy(self, workspace, capsys):
        root, csv_path, _ = workspace
        out = root / "gnb.json"
        code = main(
            ["train", "--data", csv_path, "--label", "category", "--model", "gnb", "--out", str(out)]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "training accuracy" in printed
        accuracy = float(printed.rsplit(" ", 1)[-1])
        assert accuracy > 1 / 6  # six overlapping blobs: well above chance
        model = load_model(str(out))
        assert model.n_classes == 6

    def test_separable_data_high_accuracy(self, tmp_path, capsys):
        # widely separated blobs: accuracy should be near perfect
        rng = np.random.default_rng(0)
        from woebox.data import Dataset

        centers = np.array([[0.0, 0.0], [8.0, 8.0]])
        labels = rng.integers(0, 2, size=400)
        features = centers[labels] + rng.normal(size=(400, 2))
        data = Dataset(features, labels, ("a", "b"), ("lo", "hi"))
        csv_path = tmp_path / "sep.csv"
        save_csv(data, str(csv_path))
        out = tmp_path / "model.json"
        main(["train", "--data", str(csv_path), "--label", "label", "--model", "gnb", "--out", str(out)])
        accuracy = float(capsys.readouterr().out.rsplit(" ", 1)[-1])
        assert accuracy > 0.95

    def test_unknown_model_type_usage_error(self, workspace):
        root, csv_path, _ = workspace
        with pytest.raises(SystemExit) as excinfo:
            main(["train", "--data", csv_path, "--label", "category", "--model", "forest", "--out", "x.json"])
        assert excinfo.value.code == 2

    def test_runtime_error_exit_one(self, workspace):
        root, csv_path, _ = workspace
        code = main(
            ["train", "--data", "/missing.csv", "--label", "category", "--model", "gnb", "--out", str(root / "x.json")]
        )
        assert code == 1


@pytest.fixture(scope="module")
def model_path(workspace):
    root, csv_path, _ = workspace
    out = root / "explainer-model.json"
    main(["train", "--data", csv_path, "--label", "category", "--model", "gnb", "--out", str(out)])
    return str(out)


class TestExplainCommand:
    def test_sequential_schema_and_nesting(self, workspace, model_path):
        root, csv_path, part_path = workspace
        out = root / "explanation.json"
        code = main(
            [
                "explain", "--model", model_path, "--data", csv_path, "--label", "category",
                "--row", "0", "--partitions", part_path, "--partition", "groups",
                "--mode", "sequential", "--out", str(out),
            ]
        )
        assert code == 0
        body = json.loads(out.read_text())
        jsonschema.validate(body, EXPLANATION_SCHEMA)
        kept_sizes = [len(s["kept"]) for s in body["steps"]]
        assert kept_sizes == sorted(kept_sizes, reverse=True)
        assert kept_sizes[-1] == 1
        assert body["config"]["partition_name"] == "groups"

    def test_oneshot_rules_out_everything_at_once(self, workspace, model_path):
        root, csv_path, _ = workspace
        out = root / "oneshot.json"
        main(
            [
                "explain", "--model", model_path, "--data", csv_path, "--label", "category",
                "--row", "2", "--mode", "oneshot", "--out", str(out),
            ]
        )
        body = json.loads(out.read_text())
        jsonschema.validate(body, EXPLANATION_SCHEMA)
        assert len(body["steps"]) == 1
        assert len(body["steps"][0]["ruled_out"]) == 5

    def test_inline_instance_and_svg(self, workspace, model_path):
        root, _, _ = workspace
        out = root / "inline.json"
        svg = root / "inline.svg"
        code = main(
            [
                "explain", "--model", model_path, "--instance", "[0.1, -0.3, 1.2, 0.4]",
                "--out", str(out), "--svg", str(svg),
            ]
        )
        assert code == 0
        assert svg.read_text().lstrip().startswith("<?xml")

    def test_row_and_instance_together_usage_error(self, workspace, model_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["explain", "--model", model_path, "--row", "0", "--instance", "[0,0,0,0]", "--out", "x.json"])
        assert excinfo.value.code == 2


class TestSurrogateAndBenchCommands:
    def test_surrogate_fit_and_reuse(self, workspace, capsys):
        root, csv_path, _ = workspace
        model_path = root / "m.json"
        main(["train", "--data", csv_path, "--label", "category", "--model", "gnb", "--out", str(model_path)])
        surrogate_path = root / "s.json"
        code = main(
            [
                "surrogate-fit", "--model", str(model_path), "--data", csv_path,
                "--label", "category", "--n-fit", "800", "--out", str(surrogate_path),
            ]
        )
        assert code == 0
        from woebox.surrogate import SurrogateModel

        back = load_model(str(surrogate_path))
        assert isinstance(back, SurrogateModel)
        assert back.n_fit == 800

    def test_bench_estimation_tiny_grid(self, workspace, capsys):
        root, _, _ = workspace
        out_csv = root / "estimation.csv"
        out_json = root / "estimation.json"
        plot = root / "estimation.svg"
        code = main(
            [
                "bench-estimation", "--dims", "4", "--n-fits", "50,200", "--seeds", "0",
                "--n-train", "300", "--n-test", "3",
                "--out-csv", str(out_csv), "--out-json", str(out_json), "--plot", str(plot),
            ]
        )
        assert code == 0
        assert out_csv.exists() and out_json.exists() and plot.exists()
        assert "mse" in capsys.readouterr().out

    def test_bench_robustness_tiny(self, workspace, capsys):
        root, csv_path, _ = workspace
        model_path = root / "m2.json"
        main(["train", "--data", csv_path, "--label", "category", "--model", "gnb", "--out", str(model_path)])
        out_csv = root / "robustness.csv"
        code = main(
            [
                "bench-robustness", "--model", str(model_path), "--data", csv_path,
                "--label", "category", "--budget", "15", "--refine", "3",
                "--seeds", "0,1", "--instances", "2", "--out-csv", str(out_csv),
            ]
        )
        assert code == 0
        assert "median" in capsys.readouterr().out
