"""Exception types shared across the toolkit."""


class InputDataError(ValueError):
    """Raised when an input file or frame cannot be used at all."""


class ConfigError(ValueError):
    """Raised for invalid or unknown configuration values."""


class InsufficientHistoryError(ValueError):
    """Raised when a window is requested before enough history exists."""


class BankruptcyHalt(RuntimeError):
    """Raised when simulated equity drops to zero or below."""

    def __init__(self, date, equity: float):
        super().__init__(f"equity exhausted on {date}: {equity:.2f}")
        self.date = date
        self.equity = equity
