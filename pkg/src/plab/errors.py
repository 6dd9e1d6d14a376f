"""Exception types shared across the library."""


class ParameterError(ValueError):
    """A precondition on user-supplied parameters failed."""


class BudgetExceededError(RuntimeError):
    """An oracle session ran past its configured query budget."""


class ContractViolationError(RuntimeError):
    """A pluggable component (e.g. an adversary) broke its contract."""


class ModelCapabilityError(ValueError):
    """The requested rewrite is not expressible in the target query model."""
