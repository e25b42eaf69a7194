"""Exception types shared across the toolkit."""


class OutOfModelError(ValueError):
    """A requested operating point falls outside the model's validity (e.g. f1 <= 0)."""


class CalibrationError(ValueError):
    """Lock-in slope calibration is missing, zero, or unusable."""


class StepSizeError(ValueError):
    """ODE step size too coarse for the requested accuracy contract."""


class ConvergenceError(RuntimeError):
    """Nonlinear fit failed to converge; carries the best parameters seen so far."""

    def __init__(self, message, best_model=None, best_errors=None):
        super().__init__(message)
        self.best_model = best_model
        self.best_errors = best_errors


class RankDeficiencyError(ValueError):
    """Data cannot constrain the model (e.g. constant samples)."""


class UndefinedLagError(ValueError):
    """Cross-correlation lag is undefined (flat trace)."""


class ScenarioError(ValueError):
    """Scenario configuration failed validation; message names the violated invariant."""
