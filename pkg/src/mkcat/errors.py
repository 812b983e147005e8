"""Exception types raised by the numerical engines."""

from __future__ import annotations


class MKCatError(Exception):
    """Base class for numerical failures (CLI exit code 1)."""

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class TruncationError(MKCatError):
    def __init__(self, message: str, required_dim: int):
        super().__init__(message)
        self.required_dim = int(required_dim)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["required_dim"] = self.required_dim
        return d


class NoSignChangeError(MKCatError):
    def __init__(self, message: str, bracket: tuple[float, float], values: tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket
        self.values = values

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["bracket"] = list(self.bracket)
        d["values"] = list(self.values)
        return d


class EngineMismatchError(MKCatError):
    def __init__(self, message: str, alpha: float, closed: float, oracle: float):
        super().__init__(message)
        self.alpha = alpha
        self.closed = closed
        self.oracle = oracle

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(alpha=self.alpha, closed=self.closed, oracle=self.oracle,
                 delta=abs(self.closed - self.oracle))
        return d


class NonFiniteObjectiveError(MKCatError):
    def __init__(self, message: str, params):
        super().__init__(message)
        self.params = [float(p) for p in params]

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["params"] = self.params
        return d
