import csv
import dataclasses
import logging
from pathlib import Path
from typing import Any

import numpy as np
from ..config.base import ConfigError
from ..config.continual import ContinualConfig
from ..config.enums import (
    AlignMethod,
    ContinualMethod,
    CostKind,
    DatasetKind,
    ExperimentKind,
    InitKind,
    InitRegime,
    LossKind,
    PolyKind,
    TaskKind,
)
from ..config.experiment import ExperimentConfig
from ..config.optim import OptimConfig
from ..config.rebasin import RebasinConfig, lmc_rebasin_config
from ..continual.stream import (
    StreamReport,
    avg_accuracy,
    forgetting,
    run_finetune,
    run_joint,
    run_stream,
    write_stream_csv,
    write_stream_json,
)
from ..data.idx import load_idx
from ..data.images import ImageSet
from ..data.poly import gen_poly
from ..data.sampling import sample_plan
from ..data.stream import make_rotated_stream
from ..lmc.curve import auc, barrier, cost_curve, write_curve_csv
from ..nn.checkpoint import Checkpoint, save_checkpoint
from ..nn.dataset import Dataset
from ..nn.losses import accuracy, cost
from ..nn.mlp import Mlp, init_mlp
from ..nn.train import train
from ..rebasin.metrics import l1_distance, recovered
from ..rebasin.optimize import optimize_plan
from ..rebasin.plan import TransportPlan, apply_plan, inverse_plan, plan_checkpoint
from ..rebasin.weight_matching import weight_matching

logger = logging.getLogger(__name__)

type TrialRow = dict[str, Any]

# Offset separating the test-set stream from the training-set stream
TEST_SEED_OFFSET = 1_000_003

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _find_file(directory: Path, name: str) -> Path:
    for candidate in (directory / name, directory / f"{name}.gz"):
        if candidate.is_file():
            return candidate
    raise ConfigError(f"Missing data file {name} in {directory}")


def load_mnist(directory: Path, split: str) -> ImageSet:
    images, labels = MNIST_FILES[split]
    return load_idx(_find_file(directory, images), _find_file(directory, labels))


def _mnist_dir(cfg: ExperimentConfig) -> Path:
    if cfg.data.mnist_dir is None:
        raise ConfigError("The mnist dataset requires data.mnist_dir")
    return Path(cfg.data.mnist_dir)


def _subsample(images: ImageSet, count: int, seed: int) -> ImageSet:
    if count > images.size:
        raise ConfigError(f"Requested {count} images but only {images.size} are available")
    rng = np.random.default_rng(seed)
    return images.take(np.sort(rng.choice(images.size, size=count, replace=False)))


def load_task(cfg: ExperimentConfig, seed: int) -> tuple[Dataset, Dataset]:
    """Train and test sets of the configured dataset."""
    data = cfg.data
    if cfg.dataset == DatasetKind.MNIST:
        directory = _mnist_dir(cfg)
        train_set = _subsample(load_mnist(directory, "train"), data.train_size, seed)
        test_set = _subsample(load_mnist(directory, "test"), data.test_size, seed)
        return train_set.to_dataset(), test_set.to_dataset()

    kind = PolyKind(cfg.dataset.value)
    return (
        gen_poly(kind, data.train_size, data.noise_sd, seed),
        gen_poly(kind, data.test_size, data.noise_sd, seed + TEST_SEED_OFFSET),
    )


def train_model(cfg: ExperimentConfig, data: Dataset, seed: int) -> Mlp:
    arch = cfg.architecture
    model = init_mlp(arch.dims, arch.activation, arch.init, seed)
    model, history = train(
        model,
        data,
        LossKind.for_task(data.task),
        cfg.train.optim,
        cfg.train.epochs,
        min(cfg.train.batch_size, data.size),
        seed,
    )
    if history:
        logger.debug("trained model %d: final loss %.6g", seed, history[-1])
    return model


def run_train_trial(cfg: ExperimentConfig, trial: int, out_dir: Path) -> TrialRow:
    seed = cfg.seed + trial
    train_set, test_set = load_task(cfg, seed)
    model = train_model(cfg, train_set, seed)
    loss = LossKind.for_task(train_set.task)
    save_checkpoint(out_dir / f"model_{trial}.rbkt", Checkpoint(model=model, meta={"seed": seed}))

    row: TrialRow = {
        "train_cost": cost(model, train_set, loss),
        "test_cost": cost(model, test_set, loss),
    }
    if test_set.task == TaskKind.CLASSIFICATION:
        row["test_accuracy"] = accuracy(model, test_set)
    return row


def _regime_model(cfg: ExperimentConfig, seed: int) -> Mlp:
    if cfg.init_regime == InitRegime.RANDOM:
        arch = cfg.architecture
        return init_mlp(arch.dims, arch.activation, InitKind.STANDARD_NORMAL, seed)
    kind = PolyKind(cfg.init_regime.value)
    return train_model(cfg, gen_poly(kind, cfg.data.train_size, cfg.data.noise_sd, seed), seed)


def trial_rebasin_config(cfg: ExperimentConfig, seed: int) -> RebasinConfig | None:
    """Configured re-basin settings with their seed offset by the trial seed."""
    if cfg.rebasin is None:
        return None
    return dataclasses.replace(cfg.rebasin, seed=cfg.rebasin.seed + seed)


def _write_history_csv(path: Path, history: list[float]) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["iteration", "cost"])
        for i, value in enumerate(history):
            writer.writerow([i, repr(value)])


def run_find_ot_trial(cfg: ExperimentConfig, trial: int, out_dir: Path) -> TrialRow:
    """Permute a model by a random plan and try to recover that plan."""
    seed = cfg.seed + trial
    a = _regime_model(cfg, seed)
    truth = sample_plan(a.hidden_widths, seed)
    b = apply_plan(a, truth)

    iterations = 0
    if cfg.method == AlignMethod.WM:
        plan = weight_matching(a, b, cfg.wm_max_sweeps, seed)
    else:
        rebasin_cfg = trial_rebasin_config(cfg, seed) or RebasinConfig(seed=seed)
        result = optimize_plan(a, b, CostKind.L2, None, rebasin_cfg)
        plan = result.hard
        iterations = len(result.history)
        _write_history_csv(out_dir / f"history_{trial}.csv", result.history)

    l1 = l1_distance(apply_plan(b, plan), a)
    return {
        "l1": l1,
        "l1_scaled": l1 * 1e3,
        "recovered": int(recovered(plan, inverse_plan(truth))),
        "iterations": iterations,
    }


def align(cfg: ExperimentConfig, a: Mlp, b: Mlp, data: Dataset, seed: int) -> TransportPlan | None:
    """Plan re-basing b onto a for the configured method; None for the naive pairing."""
    if cfg.method == AlignMethod.NAIVE:
        return None
    if cfg.method == AlignMethod.WM:
        return weight_matching(a, b, cfg.wm_max_sweeps, seed)

    kind = cfg.method.cost_kind()
    if kind is None:
        raise ConfigError(f"Method {cfg.method.value} has no re-basin cost")
    rebasin_cfg = trial_rebasin_config(cfg, seed) or lmc_rebasin_config(
        data.task == TaskKind.CLASSIFICATION, kind, seed
    )
    result = optimize_plan(a, b, kind, data, rebasin_cfg, LossKind.for_task(data.task))
    return result.hard


def run_lmc_trial(cfg: ExperimentConfig, trial: int, out_dir: Path) -> TrialRow:
    """Train two models from different seeds, align them and measure the linear path."""
    seed = cfg.seed + trial
    train_set, test_set = load_task(cfg, seed)
    loss = LossKind.for_task(train_set.task)
    a = train_model(cfg, train_set, 2 * seed)
    b = train_model(cfg, train_set, 2 * seed + 1)

    plan = align(cfg, a, b, train_set, seed)
    aligned = b if plan is None else apply_plan(b, plan)
    if plan is not None:
        save_checkpoint(
            out_dir / f"plan_{trial}.rbkt",
            plan_checkpoint(plan, (cfg.rebasin or RebasinConfig()).sinkhorn),
        )

    naive = cost_curve(a, b, test_set, loss, cfg.grid_points)
    curve = cost_curve(a, aligned, test_set, loss, cfg.grid_points)
    write_curve_csv(out_dir / f"curve_{trial}.csv", curve)

    row: TrialRow = {
        "barrier": barrier(curve),
        "auc": auc(curve),
        "naive_barrier": barrier(naive),
        "naive_auc": auc(naive),
        "cost_a": curve.start_cost,
        "cost_b": curve.end_cost,
    }
    if curve.accuracies is not None:
        row["midpoint_accuracy"] = curve.accuracies[len(curve.accuracies) // 2]
    return row


def run_continual_trial(cfg: ExperimentConfig, trial: int, out_dir: Path) -> TrialRow:
    seed = cfg.seed + trial
    base = load_mnist(_mnist_dir(cfg), "train")
    stream = cfg.stream
    episodes = make_rotated_stream(
        base, stream.episodes, stream.train_per_episode, stream.test_per_episode, seed
    )

    arch = cfg.architecture
    theta_0 = init_mlp(arch.dims, arch.activation, arch.init, seed)
    theta_0, _ = train(
        theta_0,
        episodes[0].train,
        LossKind.CROSS_ENTROPY,
        OptimConfig(learning_rate=stream.pretrain_lr),
        stream.pretrain_epochs,
        min(cfg.continual.batch_size, episodes[0].train.size),
        seed,
    )

    report: StreamReport
    match cfg.continual_method:
        case ContinualMethod.REBASIN_REPLAY:
            continual: ContinualConfig = dataclasses.replace(cfg.continual, seed=seed)
            report = run_stream(theta_0, episodes, continual)
        case ContinualMethod.FINETUNE:
            report = run_finetune(
                theta_0, episodes, cfg.train.optim, cfg.train.epochs, cfg.train.batch_size, seed
            )
        case ContinualMethod.JOINT:
            report = run_joint(
                theta_0, episodes, cfg.train.optim, cfg.train.epochs, cfg.train.batch_size, seed
            )

    write_stream_json(out_dir / f"stream_{trial}.json", report, seed, cfg.to_dict())
    write_stream_csv(out_dir / f"stream_{trial}.csv", report)
    row: TrialRow = {"avg_accuracy": avg_accuracy(report, report.episodes)}
    if report.episodes >= 2:
        row["forgetting"] = forgetting(report, report.episodes)
    return row


def run_trial(cfg: ExperimentConfig, trial: int, out_dir: Path) -> TrialRow:
    match cfg.experiment:
        case ExperimentKind.TRAIN:
            row = run_train_trial(cfg, trial, out_dir)
        case ExperimentKind.FIND_OT:
            row = run_find_ot_trial(cfg, trial, out_dir)
        case ExperimentKind.LMC:
            row = run_lmc_trial(cfg, trial, out_dir)
        case ExperimentKind.CONTINUAL:
            row = run_continual_trial(cfg, trial, out_dir)
    return {"trial": trial, "seed": cfg.seed + trial, **row}
