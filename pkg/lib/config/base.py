class ConfigError(ValueError):
    pass


class InvalidArchitectureError(ConfigError):
    pass


class DimensionError(ValueError):
    pass


class InvalidInputError(ValueError):
    pass


class UsageError(RuntimeError):
    pass


class NonConvergenceError(ArithmeticError):
    residual: float
    threshold: float

    def __init__(self, residual: float, threshold: float) -> None:
        super().__init__(
            f"Sinkhorn iteration did not converge (marginal residual {residual:.3e}, expected < {threshold:.0e})"
        )
        self.residual = residual
        self.threshold = threshold


class FormatError(ValueError):
    field: str
    raw_msg: str

    def __init__(self, msg: str, field: str) -> None:
        super().__init__(f"{msg} (field: {field})")
        self.field = field
        self.raw_msg = msg
