"""Exception types raised across the package."""

import numpy as np


class NotSymmetricError(ValueError):
    """Input matrix is not symmetric within tolerance."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization met a non-positive pivot."""

    def __init__(self, pivot, value):
        self.pivot = pivot
        self.value = value
        super().__init__(f"matrix is not positive definite: pivot {pivot} is {value:.3e}")


class RankDeficientError(np.linalg.LinAlgError):
    """Matrix (or Jacobian) does not have the required rank."""


class ConvergenceError(RuntimeError):
    """Iterative solver did not converge."""

    def __init__(self, message, iterations):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")


class DomainError(ValueError):
    """Component values fall outside the generator domain."""


class OptimizationError(RuntimeError):
    """SGD concept discovery diverged or lost rank."""

    def __init__(self, message, step):
        self.step = step
        super().__init__(f"{message} at step {step}")


class ConfigError(ValueError):
    """Experiment configuration is invalid."""
