import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..config.base import InvalidInputError
from ..config.continual import ContinualConfig
from ..config.enums import ContinualMethod, LossKind
from ..config.optim import OptimConfig
from ..data.stream import Episode
from ..nn.dataset import concat_datasets
from ..nn.losses import accuracy
from ..nn.mlp import Mlp
from ..nn.train import train
from ..rebasin.plan import harden
from .learner import fuse, learn_episode
from .replay import ReplayBuffer

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class StreamReport:
    """acc[k][j]: accuracy after the (k+1)-th model on the test set of episode j <= k."""

    method: ContinualMethod
    acc: tuple[tuple[float, ...], ...]
    # Wall-clock seconds per row; not part of the serialized report
    seconds: tuple[float, ...] = field(default=(), compare=False)

    @property
    def episodes(self) -> int:
        return len(self.acc)

    def final_accuracy(self) -> float:
        return avg_accuracy(self, self.episodes)

    def final_forgetting(self) -> float | None:
        return forgetting(self, self.episodes) if self.episodes >= 2 else None


def _require_episodes(episodes: list[Episode]) -> None:
    if not episodes:
        raise InvalidInputError("A stream needs at least one episode")


def _evaluate(model: Mlp, episodes: list[Episode]) -> tuple[float, ...]:
    return tuple(accuracy(model, episode.test) for episode in episodes)


def run_stream(theta_0: Mlp, episodes: list[Episode], cfg: ContinualConfig) -> StreamReport:
    """Re-basin incremental learning over episodes[1:], starting from theta_0.

    theta_0 is expected to be trained on episodes[0], which also seeds the
    replay buffer; row 0 of the report evaluates theta_0.
    """
    _require_episodes(episodes)
    replay = ReplayBuffer(cfg.replay_per_class)
    replay.close_episode(episodes[0].train, cfg.seed)

    model = theta_0
    rows = [_evaluate(model, episodes[:1])]
    seconds = [0.0]
    for e in range(1, len(episodes)):
        start = time.perf_counter()
        episode = episodes[e]
        result = learn_episode(model, episode, replay, cfg, LossKind.CROSS_ENTROPY)
        model = fuse(model, harden(result.plan, cfg.sinkhorn), result.delta, cfg.alpha)
        replay.close_episode(episode.train, cfg.seed + e)
        rows.append(_evaluate(model, episodes[: e + 1]))
        seconds.append(time.perf_counter() - start)
        logger.info(
            "episode %d: mean accuracy %.4f (%.1fs)", e, sum(rows[-1]) / len(rows[-1]), seconds[-1]
        )

    return StreamReport(method=ContinualMethod.REBASIN_REPLAY, acc=tuple(rows), seconds=tuple(seconds))


def run_finetune(
    theta_0: Mlp,
    episodes: list[Episode],
    optim: OptimConfig,
    epochs: int,
    batch_size: int,
    seed: int = 0,
) -> StreamReport:
    """Plain sequential training on every episode, without replay."""
    _require_episodes(episodes)
    model = theta_0
    rows: list[tuple[float, ...]] = []
    seconds: list[float] = []
    for e, episode in enumerate(episodes):
        start = time.perf_counter()
        model, _ = train(
            model,
            episode.train,
            LossKind.CROSS_ENTROPY,
            optim,
            epochs,
            min(batch_size, episode.train.size),
            seed + e,
        )
        rows.append(_evaluate(model, episodes[: e + 1]))
        seconds.append(time.perf_counter() - start)
        logger.info("finetune episode %d: mean accuracy %.4f", e, sum(rows[-1]) / len(rows[-1]))
    return StreamReport(method=ContinualMethod.FINETUNE, acc=tuple(rows), seconds=tuple(seconds))


def run_joint(
    theta_0: Mlp,
    episodes: list[Episode],
    optim: OptimConfig,
    epochs: int,
    batch_size: int,
    seed: int = 0,
) -> StreamReport:
    """One training run on the union of all episodes; every row reuses that model."""
    _require_episodes(episodes)
    start = time.perf_counter()
    union = concat_datasets([episode.train for episode in episodes])
    model, _ = train(
        theta_0, union, LossKind.CROSS_ENTROPY, optim, epochs, min(batch_size, union.size), seed
    )
    full = _evaluate(model, episodes)
    rows = tuple(full[: e + 1] for e in range(len(episodes)))
    elapsed = time.perf_counter() - start
    logger.info("joint training: mean accuracy %.4f", sum(full) / len(full))
    return StreamReport(
        method=ContinualMethod.JOINT,
        acc=rows,
        seconds=(elapsed,) + (0.0,) * (len(episodes) - 1),
    )


def _check_count(report: StreamReport, count: int) -> None:
    if not 1 <= count <= report.episodes:
        raise InvalidInputError(
            f"Episode count must lie in [1, {report.episodes}] (got {count})"
        )


def avg_accuracy(report: StreamReport, count: int) -> float:
    """Mean accuracy of the model after `count` episodes over all tasks seen so far."""
    _check_count(report, count)
    row = report.acc[count - 1]
    return sum(row[:count]) / count


def forgetting(report: StreamReport, count: int) -> float:
    """Mean over earlier tasks of the largest drop from a previous model to the current one.

    Episode counts are 1-based: task j and model k refer to acc[k-1][j-1].
    """
    if count < 2:
        raise InvalidInputError(f"Forgetting needs at least 2 episodes (got {count})")
    _check_count(report, count)
    current = report.acc[count - 1]
    drops: list[float] = []
    for j in range(count - 1):
        drops.append(max(report.acc[k][j] - current[j] for k in range(j, count - 1)))
    return sum(drops) / len(drops)


def stream_to_dict(report: StreamReport, seed: int, config: dict[str, Any]) -> dict[str, Any]:
    return {
        "method": report.method.value,
        "seed": seed,
        "acc": [list(row) for row in report.acc],
        "avg_accuracy": [avg_accuracy(report, e) for e in range(1, report.episodes + 1)],
        "forgetting": [forgetting(report, e) for e in range(2, report.episodes + 1)],
        "config": config,
    }


def write_stream_json(path: Path, report: StreamReport, seed: int, config: dict[str, Any]) -> None:
    with path.open("w") as f:
        json.dump(stream_to_dict(report, seed, config), f, indent=2, sort_keys=True)
        _ = f.write("\n")


def write_stream_csv(path: Path, report: StreamReport) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["episode", "avg_accuracy", "forgetting"])
        for e in range(1, report.episodes + 1):
            lost = repr(forgetting(report, e)) if e >= 2 else ""
            writer.writerow([e, repr(avg_accuracy(report, e)), lost])
