import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from ..config.base import ConfigError, InvalidInputError
from ..config.enums import LossKind, TaskKind
from ..nn.dataset import Dataset
from ..nn.losses import accuracy, cost
from ..nn.mlp import Mlp, require_same_architecture
from ..rebasin.costs import interpolate

DEFAULT_GRID_POINTS = 25


@dataclass(frozen=True, kw_only=True)
class CurveReport:
    lambdas: tuple[float, ...]
    costs: tuple[float, ...]
    # Absent for regression tasks
    accuracies: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.lambdas) < 2:
            raise InvalidInputError(f"A curve needs at least 2 points (got {len(self.lambdas)})")
        if len(self.costs) != len(self.lambdas):
            raise InvalidInputError(
                f"Curve length mismatch ({len(self.lambdas)} lambdas, {len(self.costs)} costs)"
            )
        if self.accuracies is not None and len(self.accuracies) != len(self.lambdas):
            raise InvalidInputError(
                f"Curve length mismatch ({len(self.lambdas)} lambdas, {len(self.accuracies)} accuracies)"
            )
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise InvalidInputError("Curve lambdas must be strictly increasing")

    @property
    def start_cost(self) -> float:
        return self.costs[0]

    @property
    def end_cost(self) -> float:
        return self.costs[-1]

    def chord(self) -> list[float]:
        """(1 - lam) C(theta_A) + lam C(theta_B) at every grid point."""
        return [(1.0 - lam) * self.start_cost + lam * self.end_cost for lam in self.lambdas]

    def deviation(self) -> list[float]:
        return [c - h for c, h in zip(self.costs, self.chord())]


def cost_curve(
    a: Mlp,
    b: Mlp,
    data: Dataset,
    loss: LossKind,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> CurveReport:
    """Cost (and accuracy for classification) along the segment from a to b."""
    if grid_points < 2:
        raise ConfigError(f"Curve grid needs at least 2 points (got {grid_points})")
    require_same_architecture(a, b)

    lambdas = [float(lam) for lam in np.linspace(0.0, 1.0, grid_points)]
    models = [interpolate(a, b, lam) for lam in lambdas]
    costs = tuple(cost(model, data, loss) for model in models)
    accuracies = None
    if data.task == TaskKind.CLASSIFICATION:
        accuracies = tuple(accuracy(model, data) for model in models)
    return CurveReport(lambdas=tuple(lambdas), costs=costs, accuracies=accuracies)


def barrier(curve: CurveReport) -> float:
    """Grid supremum of the excess over the chord; a lower bound on the true sup."""
    return float(max(curve.deviation()))


def auc(curve: CurveReport) -> float:
    """Trapezoidal integral of the signed excess over the chord."""
    return float(np.trapezoid(curve.deviation(), curve.lambdas))


def write_curve_csv(path: Path, curve: CurveReport) -> None:
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["lambda", "cost", "chord", "deviation", "accuracy"])
        for i, (lam, c, h, d) in enumerate(
            zip(curve.lambdas, curve.costs, curve.chord(), curve.deviation())
        ):
            acc = "" if curve.accuracies is None else repr(curve.accuracies[i])
            writer.writerow([repr(lam), repr(c), repr(h), repr(d), acc])
