"""Exception types shared across the package."""


class ContractError(ValueError):
    """An operation was called with arguments violating its precondition."""


class ResourceError(RuntimeError):
    """A configured size cap (automaton states, ball size) was exceeded."""


class PreconditionError(ContractError):
    """A mathematical precondition failed; ``witness`` shows why."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
