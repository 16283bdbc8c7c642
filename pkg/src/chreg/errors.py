"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value.

    Carries the offending key and, when parsed from a file, the line number.
    """

    def __init__(self, key, message, line=None):
        self.key = key
        self.line = line
        where = f"{key}" if line is None else f"{key} (line {line})"
        super().__init__(f"{where}: {message}")


class ConsistencyError(RuntimeError):
    """A discrete identity that holds by construction was violated."""


class StepError(RuntimeError):
    """Nonlinear solve of a single time step failed.

    Attributes
    ----------
    step : int or None
        Index of the failing step inside a trajectory (set by the driver).
    residual : float
        Last residual norm reached.
    log : list of float
        Residual history of the Newton iteration.
    """

    def __init__(self, message, residual=float("nan"), log=None, step=None):
        self.step = step
        self.residual = residual
        self.log = list(log or [])
        super().__init__(message)

    def __str__(self):
        base = super().__str__()
        if self.step is not None:
            base = f"step {self.step}: {base}"
        return f"{base} (last residual {self.residual:.3e}, {len(self.log)} iterations)"
