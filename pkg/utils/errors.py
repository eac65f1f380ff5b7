"""Exception hierarchy shared by every module.

Each class carries the process exit status the CLI maps it to.
"""

from typing import Any, Optional


class LRSError(Exception):
    exit_status = 1


class ConfigurationError(LRSError):
    exit_status = 2


class DomainError(LRSError):
    pass


class EmptyConstraintSetError(DomainError):
    pass


class PreconditionError(LRSError):
    pass


class ParseError(LRSError):
    exit_status = 2

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<input>"):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class BudgetExceededError(LRSError):
    def __init__(self, part: int, consumed: int, requested: int, budget: int):
        self.part = part
        self.consumed = consumed
        self.requested = requested
        self.budget = budget
        super().__init__(
            f"leakage budget exceeded on part {part}: consumed={consumed} requested={requested} lambda={budget}"
        )


class QueryCapExceededError(LRSError):
    def __init__(self, cap: int, log: Optional[list[Any]] = None):
        self.cap = cap
        self.log = log or []
        super().__init__(f"adversary exceeded the query cap m_max={cap}")


class RestartCapExceededError(LRSError):
    exit_status = 3

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"refresh restarted more than {cap} times")


class EnumerationTooLargeError(LRSError):
    exit_status = 3

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"enumeration space too large: size={size} limit={limit}")
