"""Exception hierarchy.

Contract violations (bad input) derive from :class:`ContractViolation`;
failures of a numerical routine on valid input derive from
:class:`NumericalFailure`. The CLI maps them to exit codes 2 and 3.
"""


class SesError(Exception):
    pass


class ContractViolation(SesError, ValueError):
    pass


class NumericalFailure(SesError, ArithmeticError):
    pass


class InvalidMatrix(ContractViolation):
    pass


class NotUnitary(ContractViolation):
    pass


class NotSymmetric(ContractViolation):
    pass


class InvalidDimension(ContractViolation):
    pass


class InvalidInput(ContractViolation):
    pass


class InvalidSegment(ContractViolation):
    pass


class InvalidParams(ContractViolation):
    pass


class ImpossibleOutcome(ContractViolation):
    pass


class IntegrationFailure(NumericalFailure):
    pass
