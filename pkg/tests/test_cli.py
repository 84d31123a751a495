"""Command-line runs end to end on small polynomial tasks and a synthetic MNIST."""

import csv
import json
import statistics
from pathlib import Path

import numpy as np
import pytest

from lib.cli.experiments import MNIST_FILES, trial_rebasin_config
from lib.cli.main import main
from lib.config.enums import ExperimentKind
from lib.config.experiment import ExperimentConfig
from lib.config.rebasin import RebasinConfig
from lib.data.idx import save_idx
from lib.data.images import ImageSet
from lib.nn.checkpoint import load_checkpoint


def _rows(path: Path) -> list[dict[str, str]]:
    with path.open() as f:
        return list(csv.DictReader(f))


@pytest.fixture
def mnist_dir(tmp_path) -> Path:
    """Random 28 x 28 digits written as the four standard IDX files."""
    directory = tmp_path / "mnist"
    directory.mkdir()
    rng = np.random.default_rng(11)
    for split, count in (("train", 60), ("test", 20)):
        images = ImageSet(
            images=rng.integers(0, 256, size=(count, 28, 28)) / 255.0,
            labels=np.arange(count) % 10,
        )
        images_name, labels_name = MNIST_FILES[split]
        save_idx(directory / images_name, directory / labels_name, images)
    return directory


SMALL_TRAIN = [
    "--set", "train.epochs=2",
    "--set", "data.train_size=20",
    "--set", "data.test_size=20",
]  # fmt: skip


class TestFindOt:
    def test_weight_matching(self, tmp_path):
        out = tmp_path / "wm"
        assert main(["find_ot", "--runs", "2", "--out", str(out), "--set", "method=wm"]) == 0
        rows = _rows(out / "trials.csv")
        assert [row["trial"] for row in rows] == ["0", "1"]
        assert [row["seed"] for row in rows] == ["0", "1"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["runs"] == 2
        assert summary["seeds"] == [0, 1]
        assert summary["config"]["method"] == "wm"
        assert set(summary["metrics"]) == {"l1", "l1_scaled", "recovered", "iterations"}

    def test_sinkhorn_writes_history(self, tmp_path):
        out = tmp_path / "ot"
        args = ["find_ot", "--out", str(out), "--seed", "3", "--set", "rebasin.optim.max_iters=5"]
        assert main(args) == 0
        (row,) = _rows(out / "trials.csv")
        assert row["seed"] == "3"
        history = _rows(out / "history_0.csv")
        assert len(history) == int(row["iterations"])
        assert 1 <= len(history) <= 5

    def test_deterministic(self, tmp_path):
        for name in ("a", "b"):
            args = ["find_ot", "--out", str(tmp_path / name), "--set", "rebasin.optim.max_iters=5"]
            assert main(args) == 0
        for name in ("trials.csv", "history_0.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summary_is_byte_identical_across_runs(self, tmp_path):
        out = tmp_path / "ot"
        args = ["find_ot", "--runs", "3", "--out", str(out), "--set", "rebasin.optim.max_iters=5"]
        assert main(args) == 0
        first = {name: (out / name).read_bytes() for name in ("summary.json", "trials.csv")}
        assert main(args) == 0
        for name, data in first.items():
            assert (out / name).read_bytes() == data

    def test_configured_rebasin_seed_follows_trial(self):
        cfg = ExperimentConfig(experiment=ExperimentKind.FIND_OT, rebasin=RebasinConfig(seed=3))
        configured = [trial_rebasin_config(cfg, seed) for seed in (0, 5)]
        assert [c.seed for c in configured if c is not None] == [3, 8]
        assert trial_rebasin_config(ExperimentConfig(experiment=ExperimentKind.FIND_OT), 5) is None


class TestTrain:
    def test_checkpoint_and_costs(self, tmp_path):
        out = tmp_path / "train"
        assert main(["train", "--out", str(out), *SMALL_TRAIN]) == 0
        (row,) = _rows(out / "trials.csv")
        assert float(row["train_cost"]) >= 0.0
        assert "test_accuracy" not in row
        checkpoint = load_checkpoint(out / "model_0.rbkt")
        assert checkpoint.model.dims == [1, 10, 10, 1]
        assert checkpoint.meta["seed"] == 0


class TestLmc:
    @pytest.mark.parametrize("method", ["naive", "wm", "sinkhorn_mid"])
    def test_curve_and_row(self, tmp_path, method):
        out = tmp_path / method
        args = [
            "lmc",
            "--out", str(out),
            "--set", f"method={method}",
            "--set", "grid_points=5",
            "--set", "rebasin.optim.max_iters=3",
            "--set", "rebasin.batch_size=10",
            *SMALL_TRAIN,
        ]  # fmt: skip
        assert main(args) == 0
        (row,) = _rows(out / "trials.csv")
        curve = _rows(out / "curve_0.csv")
        assert len(curve) == 5
        assert float(curve[0]["cost"]) == float(row["cost_a"])
        assert float(curve[-1]["cost"]) == float(row["cost_b"])
        assert float(row["barrier"]) >= 0.0
        assert (out / "plan_0.rbkt").exists() == (method != "naive")

    def test_naive_matches_unaligned_metrics(self, tmp_path):
        out = tmp_path / "naive"
        assert main(["lmc", "--out", str(out), "--set", "method=naive", *SMALL_TRAIN]) == 0
        (row,) = _rows(out / "trials.csv")
        assert row["barrier"] == row["naive_barrier"]
        assert row["auc"] == row["naive_auc"]


SMALL_STREAM = [
    "--set", "stream.episodes=2",
    "--set", "stream.train_per_episode=20",
    "--set", "stream.test_per_episode=10",
    "--set", "stream.pretrain_epochs=1",
    "--set", "continual.epochs_per_episode=1",
    "--set", "continual.batch_size=10",
    "--set", "train.epochs=1",
]  # fmt: skip


class TestContinual:
    @pytest.mark.parametrize("method", ["rebasin_replay", "finetune", "joint"])
    def test_stream_outputs(self, tmp_path, mnist_dir, method):
        out = tmp_path / method
        args = [
            "continual",
            "--out", str(out),
            "--set", f"data.mnist_dir={mnist_dir}",
            "--set", f"continual_method={method}",
            *SMALL_STREAM,
        ]  # fmt: skip
        assert main(args) == 0
        (row,) = _rows(out / "trials.csv")
        assert 0.0 <= float(row["avg_accuracy"]) <= 1.0
        assert "forgetting" in row
        report = json.loads((out / "stream_0.json").read_text())
        assert report["method"] == method
        assert [len(acc) for acc in report["acc"]] == [1, 2]
        assert len(report["avg_accuracy"]) == 2
        assert len(report["forgetting"]) == 1
        assert [r["episode"] for r in _rows(out / "stream_0.csv")] == ["1", "2"]

    def test_bare_config_uses_mnist_defaults(self, tmp_path, mnist_dir):
        path = tmp_path / "continual.yaml"
        _ = path.write_text(f"data:\n  mnist_dir: {mnist_dir}\n")
        out = tmp_path / "out"
        assert main(["continual", "--config", str(path), "--out", str(out), *SMALL_STREAM]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["data"]["dataset"] == "mnist"
        assert summary["config"]["model"]["dims"] == [784, 128, 128, 10]
        assert summary["config"]["model"]["activation"] == "relu"


def _dims(hidden: int) -> str:
    return json.dumps([1] + [10] * hidden + [1])


@pytest.mark.slow
class TestRecoveryAtScale:
    @pytest.mark.parametrize("regime", ["random", "pol1", "pol3"])
    @pytest.mark.parametrize("hidden", [2, 4, 8])
    def test_sinkhorn_recovers_every_plan(self, tmp_path, regime, hidden):
        out = tmp_path / "ot"
        args = [
            "find_ot",
            "--runs", "10",
            "--out", str(out),
            "--set", f"init_regime={regime}",
            "--set", f"model.dims={_dims(hidden)}",
        ]  # fmt: skip
        assert main(args) == 0
        rows = _rows(out / "trials.csv")
        assert len(rows) == 10
        assert all(row["recovered"] == "1" for row in rows)
        assert all(float(row["l1"]) == 0.0 for row in rows)

    def test_weight_matching_never_beats_sinkhorn(self, tmp_path):
        l1: dict[str, list[float]] = {}
        recovered: dict[str, list[str]] = {}
        for method in ("wm", "sinkhorn_l2"):
            out = tmp_path / method
            assert main(["find_ot", "--runs", "50", "--out", str(out), "--set", f"method={method}"]) == 0
            rows = _rows(out / "trials.csv")
            l1[method] = [float(row["l1"]) for row in rows]
            recovered[method] = [row["recovered"] for row in rows]
        assert all(wm >= ot for wm, ot in zip(l1["wm"], l1["sinkhorn_l2"], strict=True))
        assert "0" in recovered["wm"]


@pytest.mark.slow
class TestLmcAtScale:
    @pytest.mark.parametrize("dataset", ["pol1", "pol3"])
    def test_rebasin_lowers_barrier(self, tmp_path, dataset):
        rows: dict[str, list[dict[str, str]]] = {}
        for method in ("sinkhorn_l2", "sinkhorn_rnd"):
            out = tmp_path / method
            args = [
                "lmc",
                "--runs", "10",
                "--out", str(out),
                "--set", f"method={method}",
                "--set", f"data.dataset={dataset}",
            ]  # fmt: skip
            assert main(args) == 0
            rows[method] = _rows(out / "trials.csv")

        def median(method: str, column: str) -> float:
            return statistics.median(float(row[column]) for row in rows[method])

        assert median("sinkhorn_l2", "barrier") < median("sinkhorn_l2", "naive_barrier")
        assert median("sinkhorn_l2", "auc") < median("sinkhorn_l2", "naive_auc")
        wins = sum(
            float(rnd["barrier"]) < float(l2["barrier"])
            for rnd, l2 in zip(rows["sinkhorn_rnd"], rows["sinkhorn_l2"], strict=True)
        )
        assert wins >= 6


class TestErrors:
    def test_unknown_key(self, tmp_path, capsys):
        assert main(["train", "--out", str(tmp_path), "--set", "train.epoch=3"]) == 2
        assert "rebasin-kit: error: Unknown configuration key train.epoch" in capsys.readouterr().err

    def test_bad_value(self, tmp_path):
        assert main(["find_ot", "--out", str(tmp_path), "--set", "method=sinkhorn_rnd"]) == 2
        assert main(["train", "--out", str(tmp_path), "--runs", "0"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_continual_without_mnist(self, tmp_path):
        assert main(["continual", "--out", str(tmp_path)]) == 2

    def test_config_file(self, tmp_path):
        path = tmp_path / "exp.yaml"
        _ = path.write_text("method: wm\nseed: 5\n")
        out = tmp_path / "out"
        assert main(["find_ot", "--config", str(path), "--out", str(out)]) == 0
        (row,) = _rows(out / "trials.csv")
        assert row["seed"] == "5"

    def test_unknown_experiment(self):
        with pytest.raises(SystemExit):
            _ = main(["bogus"])
