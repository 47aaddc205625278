"""Custom exceptions for C*-algebra computations."""


class CStarException(Exception):
    """Base exception for library errors."""
    pass


class DescriptorMismatchException(CStarException):
    """Operands belong to different algebras."""
    pass


class ShapeMismatchException(CStarException):
    """Coordinates, vectors or layers have incompatible shapes."""
    pass


class InvalidDescriptorException(CStarException):
    """An algebra descriptor violates its invariants (dimensions, weights, group axioms)."""
    pass


class NumericalException(CStarException):
    """Eigendecomposition or linear solve failed."""
    pass


class InvalidKernelException(CStarException):
    """Kernel coefficients are not positive or the kernel is malformed."""
    pass


class InvalidPartitionException(CStarException):
    """Parameter tying blocks overlap or reference unknown parameters."""
    pass


class DatasetException(CStarException):
    """Dataset file is empty or malformed (should exit with code 2)."""
    pass


class PropertyViolationException(CStarException):
    """A proven property failed numerically (should exit with code 1)."""
    pass


class ConfigurationException(CStarException):
    """Invalid configuration or usage (should exit with code 2)."""
    pass
