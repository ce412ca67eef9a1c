"""Exception types shared by every module."""


class InputError(ValueError):
    """Malformed or inconsistent input (arity mismatch, bad parameters, invalid tree)."""


class ResourceLimitError(RuntimeError):
    """A configured guard (term count, cell count) was exceeded."""
