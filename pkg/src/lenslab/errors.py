"""Exception types shared across the package."""


class LensLabError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(LensLabError):
    """Operands built over partitions of different sizes."""


class BackendMismatch(LensLabError):
    """Mixing exact-rational and float operands in one operation."""


class NegativePowerOfStochastic(LensLabError):
    """Negative power requested for a system whose matrix is not a permutation."""


class NotExact(LensLabError):
    """Operation defined only for exact (permutation) systems."""


class NotRepairable(LensLabError):
    """Matrix too far from the coupling polytope for drift repair."""


class SizeGuard(LensLabError):
    """Requested object exceeds the configured size limit."""


class ResolutionGuard(LensLabError):
    """Construction would need a finer partition than the size limit allows."""


class BadBlocks(LensLabError):
    """Block family invalid: not a partition of the cells, or sizes repeat."""


class InfeasibleTarget(LensLabError):
    """Integer target matrix violates the transportation marginals."""


class NonInvertible(LensLabError):
    """Integer matrix does not define an automorphism of the given group."""


class UnknownExperiment(LensLabError):
    """Experiment name not present in the registry."""


class InvalidConfig(LensLabError):
    """Experiment configuration missing keys or holding malformed values."""
