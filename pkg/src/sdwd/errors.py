class DataError(ValueError):
    """Input data cannot be used: malformed file, bad labels, degenerate columns."""


class NonConvergenceError(RuntimeError):
    """The coordinate descent hit its cycle cap.

    ``state`` holds the last iterate so callers can inspect or resume it.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
