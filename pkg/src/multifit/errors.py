"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent user input (bad dimensions, empty data, ...)."""


class DegenerateModelError(RuntimeError):
    """Model parameters cannot be evaluated (zero direction, singular map)."""


class ScaleBreakdownError(RuntimeError):
    """Rank-based scale estimation broke down (K exceeds the inlier count)."""

    def __init__(self, message, nu=None, k=None):
        super().__init__(message)
        self.nu = nu
        self.k = k


class ZeroScaleError(RuntimeError):
    """The K-th residual is exactly zero (degenerate, noise-free data)."""


class InsufficientInliersError(RuntimeError):
    """The scale-search loop never found more inliers than its threshold."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class BigMWarning(UserWarning):
    """A solution sits suspiciously close to its big-M deactivation slack."""
