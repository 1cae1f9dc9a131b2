"""Exception types shared across the package."""


class FracdriftError(Exception):
    """Base class for all package-specific errors."""


class SeparationViolation(FracdriftError):
    """Omega touches (or is too close to) a measurement window."""


class EmptyRegion(FracdriftError):
    """A region mask contains no grid nodes."""


class RegionOverflow(FracdriftError):
    """A constructed field leaks outside its target mask."""


class DegreeTooHigh(FracdriftError):
    """Requested polynomial degree exceeds the dimension cap."""


class OrderOutOfRange(FracdriftError):
    """Fractional order s outside the admissible interval (1/2, 1)."""


class SupportTooWide(FracdriftError):
    """Field support too close to the box boundary for the periodic oracle."""


class ZeroField(FracdriftError):
    """An operation that needs a nonzero field received the zero field."""


class EigenvalueConditionViolated(FracdriftError):
    """Interior system is (numerically) singular: homogeneous problem has
    a nontrivial solution, so the forward map is not well defined."""

    def __init__(self, smallest_singular_value, threshold, message=None):
        self.smallest_singular_value = smallest_singular_value
        self.threshold = threshold
        super().__init__(
            message
            or f"interior block numerically singular: sigma_min="
            f"{smallest_singular_value:.3e} < tol={threshold:.3e}"
        )


class NonFiniteData(FracdriftError):
    """Input data contains NaN or infinite entries."""


class CutoffAboveSpectrum(FracdriftError):
    """Truncation level at or above the largest singular value (advisory)."""


class TargetUnreachable(FracdriftError):
    """No cutoff on the sweep grid met the requested approximation error."""

    def __init__(self, best_error, requested, message=None):
        self.best_error = best_error
        self.requested = requested
        super().__init__(
            message
            or f"no cutoff met the error bound: best {best_error:.3e} "
            f"> requested {requested:.3e}"
        )


class EmptyAdmissibleSet(FracdriftError):
    """Every node failed the determinant admissibility test."""


class SingularSystem(FracdriftError):
    """Pointwise recovery system singular at a node flagged admissible."""


class ConfigError(FracdriftError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
