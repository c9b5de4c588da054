from typing import Any


class DominativeLaplaceError(Exception):
    pass


class DomainError(DominativeLaplaceError, ValueError):
    pass


class DimensionError(DomainError):
    def __init__(self, expected: Any, received: Any):
        message = f"Dimension mismatch: expected {expected}, received {received}."
        super().__init__(message)
        self.expected = expected
        self.received = received


class SingularityError(DomainError):
    def __init__(self, term: str, point: Any = None):
        message = f"Field term {term} is singular at {point}."
        super().__init__(message)
        self.term = term
        self.point = point


class PoleError(SingularityError):
    def __init__(self, term: str, radius: float):
        super().__init__(term=term, point=f"radius {radius}")
        self.radius = radius


class CriticalPointError(DomainError):
    def __init__(self, operator: str):
        message = f"{operator} is undefined where the gradient vanishes."
        super().__init__(message)
        self.operator = operator


class FieldConstructionError(DominativeLaplaceError, ValueError):
    pass


class EigenSolverError(DominativeLaplaceError, ArithmeticError):
    def __init__(self, sweeps: int, off_diagonal: float):
        message = f"Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.3e})."
        super().__init__(message)
        self.sweeps = sweeps
        self.off_diagonal = off_diagonal


class PreconditionError(DominativeLaplaceError):
    def __init__(self, value: float, where: Any = None):
        message = f"Dominative p-Laplacian is {value:.6e} at {where}; a positive value is required."
        super().__init__(message)
        self.value = value
        self.where = where


class NeedsLargerScale(DominativeLaplaceError):
    def __init__(self, s: float, witness: float):
        message = f"Scale s={s:g} gives a nonpositive witness {witness:.6e}; a larger s is needed."
        super().__init__(message)
        self.s = s
        self.witness = witness


class NeedsSmallerStep(DominativeLaplaceError):
    def __init__(self, eps: float, steps: int):
        message = f"No witness found among {steps} points of (0, {eps:g}]; retry with a smaller eps."
        super().__init__(message)
        self.eps = eps
        self.steps = steps


class InvalidProfileError(DominativeLaplaceError, ValueError):
    def __init__(self, profile: Any, reason: str):
        message = f"Profile {profile} rejected: {reason}"
        super().__init__(message)
        self.profile = profile
        self.reason = reason


class ProfileNotSuperharmonicError(DominativeLaplaceError):
    def __init__(self, profile: Any, radius: float, reason: str):
        message = f"Profile {profile} is not p-superharmonic near r={radius:g}: {reason}"
        super().__init__(message)
        self.profile = profile
        self.radius = radius
        self.reason = reason


class SuiteNotFound(DominativeLaplaceError):
    def __init__(self, name: str):
        message = f"Suite {name} not registered."
        super().__init__(message)
        self.name = name


class ScenarioError(DominativeLaplaceError):
    def __init__(self, errors: dict | str):
        if isinstance(errors, str):
            errors = {"scenario": [errors]}
        lines = [f"{path}: {'; '.join(str(item) for item in messages)}" for path, messages in _flatten(errors)]
        super().__init__("Invalid scenario:\n" + "\n".join(lines))
        self.errors = errors


def _flatten(errors: Any, prefix: str = "") -> list[tuple[str, list]]:
    if isinstance(errors, dict):
        items = []
        for key, value in errors.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            items.extend(_flatten(value, path))
        return items
    if isinstance(errors, list) and errors and all(isinstance(item, (dict, list)) for item in errors):
        items = []
        for index, value in enumerate(errors):
            if value:
                items.extend(_flatten(value, f"{prefix}[{index}]"))
        return items
    return [(prefix or "scenario", errors if isinstance(errors, list) else [errors])]
