"""Exception hierarchy shared across the package."""


class FracDriftError(Exception):
    """Base class for all package-specific errors."""


class SingularPoint(FracDriftError):
    """Kernel evaluated at the origin."""


class BadExponent(FracDriftError):
    """Power exponent outside the admissible range."""


class LogResonance(FracDriftError):
    """p - 2s is (within tolerance of) a positive integer; the power calculus
    degenerates logarithmically there."""

    def __init__(self, p, s, nearest):
        self.p = p
        self.s = s
        self.nearest = nearest
        super().__init__(
            f"p - 2s = {p - 2 * s:.6g} is within resonance tolerance of the "
            f"integer {nearest}; logarithmic terms appear"
        )


class ParityViolation(FracDriftError):
    """Angular density does not have the required parity."""


class NoGeneralizedLimit(FracDriftError):
    """Cutoff sweep did not converge after polynomial subtraction."""


class FitDiverged(FracDriftError):
    """Least-squares fit residual above tolerance."""


class ResonantDiagonal(FracDriftError):
    """Diagonal entry of the polynomial correction matrix below threshold."""

    def __init__(self, index, basis_exponent, p, s, value, threshold):
        self.index = index
        self.basis_exponent = basis_exponent
        self.p = p
        self.s = s
        self.value = value
        self.threshold = threshold
        nearest = round(p - s)
        self.nearest_integer = nearest
        super().__init__(
            f"diagonal entry {index} (monomial {basis_exponent}) has magnitude "
            f"{abs(value):.3e} below threshold {threshold:.3e}; p - s = "
            f"{p - s:.6g} is near the integer {nearest}"
        )


class BadFrame(FracDriftError):
    """Change-of-frame matrix is not an admissible orthogonal map."""


class BadDomain(FracDriftError):
    """Degenerate or unsupported domain specification."""


class NotMonotone(FracDriftError):
    """Discrete operator lost the M-matrix sign structure (reported, not fatal
    when used as a warning category via NotMonotoneWarning)."""


class NotMonotoneWarning(UserWarning):
    """Sign-condition violation survived the upwind fallback."""


class LinearSolveFailed(FracDriftError):
    """Linear solver failed to reach the requested residual."""


class ObstacleStall(FracDriftError):
    """Projected relaxation stalled before reaching the residual target."""


class NoFreeBoundary(FracDriftError):
    """Height function has no sign transition to localize."""


class EmptyWindow(FracDriftError):
    """Measurement window contains no usable interior nodes."""


class IllConditionedLadder(FracDriftError):
    """Expansion fit design matrix condition number above threshold."""

    def __init__(self, condition, threshold):
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"fit condition number {condition:.3e} exceeds {threshold:.3e}; "
            "drop trailing exponents"
        )


class InsufficientWindow(FracDriftError):
    """Too few dyadic bands / samples in the measurement window."""


class QuadratureFailed(FracDriftError):
    """Singular-integral quadrature did not converge."""


class ConfigError(FracDriftError):
    """Run configuration violates the schema."""

    def __init__(self, message, path=()):
        self.path = tuple(path)
        loc = "/".join(str(p) for p in self.path) or "<root>"
        super().__init__(f"config field '{loc}': {message}")
