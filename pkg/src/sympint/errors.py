"""Shared exception types.

The CLI maps these onto exit codes: ConfigError -> 2, SolverFailure -> 3,
certification failures (reported, not raised) -> 4.
"""


class SympintError(Exception):
    """Base class for all library errors."""


class ConfigError(SympintError):
    """Bad user input: unknown registry name, invalid dimensions, bad flags."""


class KindError(ConfigError):
    """A stepper was applied to a system of the wrong kind."""


class UnavailableError(SympintError):
    """Requested quantity has no closed form (e.g. error coefficients, n > 1)."""


class SolverFailure(SympintError):
    """An implicit sub-step did not converge.

    Attributes
    ----------
    reason : str
        One of MAX_ITER_EXCEEDED, DIVERGENCE, SINGULAR_JACOBIAN.
    iterations : int
        Map/residual evaluations consumed before giving up.
    final_residual : float
    residual_history : list of float
    stage : str or None
        Which implicit stage failed, for the two-stage schemes.
    step_index : int or None
        Trajectory step at which the failure occurred (set by the driver).
    """

    def __init__(self, reason, iterations, final_residual, residual_history=None,
                 stage=None, step_index=None):
        self.reason = reason
        self.iterations = int(iterations)
        self.final_residual = float(final_residual)
        self.residual_history = list(residual_history or [])
        self.stage = stage
        self.step_index = step_index
        super().__init__(str(self))

    def __str__(self):
        msg = (f"{self.reason}: no convergence after {self.iterations} iterations "
               f"(residual {self.final_residual:.3e})")
        if self.stage:
            msg += f" in {self.stage}"
        if self.step_index is not None:
            msg += f" at step {self.step_index}"
        return msg
