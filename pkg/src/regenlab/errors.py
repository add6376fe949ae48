class ParameterError(ValueError):
    """A model parameter lies outside its admissible range."""


class UsageError(ValueError):
    """An operation was called on inputs it is not defined for."""


class NoBigExcursionError(ValueError):
    """The discrete excursion tail vanishes at the requested level."""


class DegenerateModelError(ValueError):
    """A Laplace-transform ratio has a vanishing denominator."""
