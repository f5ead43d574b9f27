"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented exit statuses without a lookup table.
"""


class PressureError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class ConfigError(PressureError):
    exit_code = 2


class NonSquare(ConfigError):
    pass


class EmptyRowOrColumn(ConfigError):
    pass


class EmptyWord(ConfigError):
    pass


class SOutOfRange(ConfigError):
    pass


class BlockMismatch(ConfigError):
    pass


class EmptySubset(ConfigError):
    pass


class EmptyDigitSet(ConfigError):
    pass


class NotMarkov(ConfigError):
    pass


class BudgetExceeded(PressureError):
    exit_code = 3


class StateBudgetExceeded(BudgetExceeded):
    pass


class DepthBudget(BudgetExceeded):
    pass


class InvariantViolation(PressureError):
    exit_code = 4


class NonIrreducible(InvariantViolation):
    pass


class Singular(InvariantViolation):
    pass


class SpecNotSuperAdditive(InvariantViolation):
    pass


class IncompatibleMeasure(InvariantViolation):
    pass


class NotContracting(InvariantViolation):
    pass


class NotExpanding(InvariantViolation):
    pass


class InvariantBroken(InvariantViolation):
    pass
