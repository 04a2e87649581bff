"""Exception types shared across the library."""


class DomainError(ValueError):
    """Input lies outside the effective domain of a mirror map or feasible set."""


class SaturationError(FloatingPointError):
    """A conjugate-gradient map overflowed (exp/sinh) at some coordinate."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations; carries the final residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class SolverError(RuntimeError):
    """A scalar root-finder failed; carries bracketing diagnostics."""

    def __init__(self, message: str, lo: float, hi: float, residual: float):
        super().__init__(f"{message} (bracket=[{lo:.6g}, {hi:.6g}], residual={residual:.3e})")
        self.bracket = (lo, hi)
        self.residual = residual


class UnsupportedPairError(ValueError):
    """No analytic formula exists for this regularizer/domain combination."""


class DegenerateWeightsError(RuntimeError):
    """A probability used for importance weighting is numerically zero."""


class ConfigError(ValueError):
    """Invalid experiment configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class IntegrityError(RuntimeError):
    """A ledger directory is missing or inconsistent."""
