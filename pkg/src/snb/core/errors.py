"""Exceptions raised by the snb numerical core"""

from typing import List, Optional, Sequence


class SnbError(Exception):
    """Base class for every error raised by snb"""
    pass


class ExprSyntaxError(SnbError):
    """Raised when field expression text does not match the grammar"""

    def __init__(self, message: str, position: int, expected: Sequence[str] = ()):
        self.position = position
        self.expected = list(expected)
        detail = f"{message} at position {position}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifierError(SnbError):
    """Raised when an expression names a variable or function we do not know"""

    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"unknown identifier {name}")


class DomainError(SnbError):
    """Raised when a value is requested outside the domain of a function"""
    pass


class FieldConfigError(SnbError):
    """Raised when a field family or its analysis box is inconsistent"""
    pass


class GenericityError(FieldConfigError):
    """Raised when a parsed field is not a generic saddle-node unfolding at the origin"""

    def __init__(self, label: str, failures: Sequence[str]):
        self.label = label
        self.failures = list(failures)
        super().__init__(f"field {label} is not generic: {', '.join(self.failures)} failed")


class NoRootError(SnbError):
    """Raised when the root scan finds no zero of F in the box"""

    def __init__(self, nu: float, box: Sequence[float]):
        self.nu = nu
        super().__init__(f"no root in box [{box[0]}, {box[1]}] at nu={nu}")


class BracketError(SnbError):
    """Raised when a bracketed root search cannot be set up"""

    def __init__(self, message: str, lo: Optional[float] = None, hi: Optional[float] = None,
                 f_lo: Optional[float] = None, f_hi: Optional[float] = None):
        self.lo = lo
        self.hi = hi
        self.f_lo = f_lo
        self.f_hi = f_hi
        if lo is not None and hi is not None:
            message = f"{message} [lo={lo!r}, hi={hi!r}, f(lo)={f_lo!r}, f(hi)={f_hi!r}]"
        super().__init__(message)


class RangeError(BracketError):
    """Raised when a displacement value lies above the range of g on the box"""
    pass


class MonotonicityError(BracketError):
    """Raised when a function expected to be monotone is not on its bracket"""
    pass


class FixedPointInIntervalError(SnbError):
    """Raised when a Fatou integral would cross a fixed point"""

    def __init__(self, lo: float, hi: float, fixed_point: float):
        self.fixed_point = fixed_point
        super().__init__(
            f"fixed point inside integration interval: x*={fixed_point!r} in [{lo!r}, {hi!r}]"
        )


class ConvergenceError(SnbError):
    """Raised when an extrapolation does not settle"""

    def __init__(self, message: str, estimates: Sequence[float] = ()):
        self.estimates = list(estimates)
        if self.estimates:
            message = f"{message}; last estimates {self.estimates[-2:]}"
        super().__init__(message)


class OrbitTooShortError(SnbError):
    """Raised when a stored orbit never reaches the requested gap"""
    pass


class FitError(SnbError):
    """Raised when a least-squares fit cannot be set up"""
    pass


class IllConditionedError(FitError):
    """Raised when the scaled design matrix is numerically singular"""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        super().__init__(f"ill-conditioned design (condition {condition:.3g} > {limit:.0e})")


class ConfigError(SnbError):
    """Raised when a run configuration fails validation"""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
