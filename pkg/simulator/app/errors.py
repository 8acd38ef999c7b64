from typing import Optional


class SimulationError(Exception):
    """Base error; exit_code is what the CLI returns for it."""

    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(SimulationError):
    exit_code = 1

    def __init__(self, detail: str, key: Optional[str] = None):
        super().__init__(f"{key}: {detail}" if key else detail)
        self.key = key


class PreconditionError(SimulationError, ValueError):
    """An operation was called outside its documented domain."""

    exit_code = 1


class ConvergenceError(SimulationError):
    exit_code = 2

    def __init__(self, detail: str, coarse=None, fine=None):
        super().__init__(detail)
        self.coarse = coarse
        self.fine = fine


class LocalizationError(SimulationError):
    exit_code = 2
