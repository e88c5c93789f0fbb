"""Exception types raised by the library."""


class DoobWeightsError(ValueError):
    """Base class for all input errors raised by this package."""


class InvalidMeasureError(DoobWeightsError):
    """A leaf mass is not a strictly positive finite number."""


class RefinementError(DoobWeightsError):
    """Level partitions do not form a refining tree."""


class MalformedDocumentError(DoobWeightsError):
    """A space document cannot be parsed into depth, masses and levels."""


class CapacityError(DoobWeightsError):
    """The requested space would exceed the memory budget."""


class ShapeError(DoobWeightsError):
    """A function or leaf set does not belong to the given space."""


class LevelError(DoobWeightsError):
    """A level index lies outside 0..L."""


class ParameterError(DoobWeightsError):
    """A numeric parameter (p, a, b, alpha, ...) is out of range."""


class WeightError(DoobWeightsError):
    """A weight is not strictly positive and finite."""


class MeasurabilityError(DoobWeightsError):
    """A leaf set is not a union of nodes at the required level."""
