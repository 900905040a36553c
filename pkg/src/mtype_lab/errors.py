"""Exception types shared across the package."""


class MtypeLabError(Exception):
    pass


class DimensionError(MtypeLabError, ValueError):
    """Operands live in spaces of different dimension."""


class PartitionError(MtypeLabError, ValueError):
    pass


class LevelCapError(MtypeLabError, ValueError):
    """A dyadic level exceeds the configured cap."""


class MartingaleError(MtypeLabError, ValueError):
    pass


class DegenerateWitnessError(MtypeLabError, ValueError):
    """A ratio denominator vanished."""


class ConstructionError(MtypeLabError):
    """A constructive step (e.g. the factorization index selection) failed."""
