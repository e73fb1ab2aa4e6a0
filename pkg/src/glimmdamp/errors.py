"""Exception types shared across the package."""


class GlimmDampError(Exception):
    """Base class for all package errors."""


class DomainError(GlimmDampError, ValueError):
    """A state lies outside the physical domain (or its invariant image)."""


class UnsupportedOperationError(GlimmDampError):
    """Operation is not defined for this model kind."""


class CurveRangeError(DomainError):
    """A shock curve left the admissible region before reaching the requested strength."""

    def __init__(self, message, max_beta):
        super().__init__(message)
        self.max_beta = max_beta


class UnsolvableRiemannError(GlimmDampError):
    """No middle state inside the domain connects the two states."""

    def __init__(self, message, left=None, right=None, index=None):
        super().__init__(message)
        self.left = left
        self.right = right
        self.index = index


class CFLError(GlimmDampError):
    """Wave speeds are unbounded or non-finite on the grid."""


class SafetyRegionError(GlimmDampError):
    """A cell left the configured safety region during a run."""

    def __init__(self, message, records=None, step=None, cell=None):
        super().__init__(message)
        self.records = records or []
        self.step = step
        self.cell = cell


class ConfigError(GlimmDampError):
    """Malformed or invalid configuration document."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
