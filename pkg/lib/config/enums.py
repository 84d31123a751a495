from enum import Enum


class Activation(Enum):
    TANH = "tanh"
    RELU = "relu"


class InitKind(Enum):
    STANDARD_NORMAL = "standard_normal"
    GLOROT = "glorot"


class TaskKind(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


class LossKind(Enum):
    MSE = "mse"
    CROSS_ENTROPY = "cross_entropy"

    def task(self) -> TaskKind:
        if self == LossKind.MSE:
            return TaskKind.REGRESSION
        return TaskKind.CLASSIFICATION

    @staticmethod
    def for_task(task: TaskKind) -> "LossKind":
        if task == TaskKind.REGRESSION:
            return LossKind.MSE
        return LossKind.CROSS_ENTROPY


class OptimKind(Enum):
    ADAM = "adam"
    SGD = "sgd"


class GradMode(Enum):
    UNROLLED = "unrolled"
    IMPLICIT = "implicit"


class Objective(Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class PlanMode(Enum):
    SOFT_PARAMS = "soft_params"
    HARD = "hard"


class CostKind(Enum):
    L2 = "l2"
    MID = "mid"
    RND = "rnd"

    def needs_data(self) -> bool:
        return self != CostKind.L2


class PolyKind(Enum):
    POL1 = "pol1"
    POL3 = "pol3"


class ExperimentKind(Enum):
    TRAIN = "train"
    FIND_OT = "find_ot"
    LMC = "lmc"
    CONTINUAL = "continual"


class DatasetKind(Enum):
    POL1 = "pol1"
    POL3 = "pol3"
    MNIST = "mnist"


class InitRegime(Enum):
    RANDOM = "random"
    POL1 = "pol1"
    POL3 = "pol3"


class AlignMethod(Enum):
    SINKHORN_L2 = "sinkhorn_l2"
    SINKHORN_MID = "sinkhorn_mid"
    SINKHORN_RND = "sinkhorn_rnd"
    WM = "wm"
    NAIVE = "naive"

    def cost_kind(self) -> CostKind | None:
        if self == AlignMethod.SINKHORN_L2:
            return CostKind.L2
        elif self == AlignMethod.SINKHORN_MID:
            return CostKind.MID
        elif self == AlignMethod.SINKHORN_RND:
            return CostKind.RND
        return None


class ContinualMethod(Enum):
    REBASIN_REPLAY = "rebasin_replay"
    FINETUNE = "finetune"
    JOINT = "joint"
