"""Exception hierarchy shared by all mmsfair modules.

The CLI maps these onto exit codes: validation problems exit 2, oracle
capacity limits exit 3, and internal invariant violations exit 4.
"""

from __future__ import annotations


class MmsfairError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MmsfairError):
    """Malformed input data: bad shapes, negative values, unknown ids."""


class ContractError(MmsfairError):
    """A documented precondition of an operation was violated by the caller."""


class CapacityError(MmsfairError):
    """An exact search would exceed the configured size limit.

    Raised instead of silently approximating; the caller may retry with a
    larger explicit limit.
    """


class InternalInvariantError(MmsfairError):
    """A property the solver guarantees by construction failed at runtime.

    Carries whatever diagnostic payload was available (reduction log,
    bag-fill trace) so the failure can be reported and reproduced.
    """

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload
