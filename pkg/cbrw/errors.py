"""Exception hierarchy"""

from typing import List, Optional


class CBRWError(Exception):
    """Base class for all package errors"""
    pass


# ============================================================================
# Model errors
# ============================================================================

class ModelError(CBRWError):
    """Invalid jump model description"""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or [message]


class BadProbabilities(ModelError):
    """Probabilities negative or not summing to one"""
    pass


class ZeroJumpInSupport(ModelError):
    """Zero vector has positive probability"""
    pass


class NonFullRankSupport(ModelError):
    """Integer span of the support is not full rank"""
    pass


class RangeError(CBRWError):
    """Exponent exceeds the configured overflow bound"""
    pass


# ============================================================================
# Numerical errors
# ============================================================================

class NumericalError(CBRWError):
    """Numerical procedure failed"""
    pass


class QuadratureNotConverged(NumericalError):
    """Grid cap reached before the error estimate met the tolerance"""

    def __init__(self, message: str, est_error: float, grid_size: int):
        super().__init__(f"{message} (est_error={est_error:.3e}, grid_size={grid_size})")
        self.est_error = est_error
        self.grid_size = grid_size


class NonPositiveLambda(NumericalError):
    """Resolvent requested at lambda <= 0"""
    pass


class IllConditionedGreenMatrix(NumericalError):
    """Green matrix at the catalysts cannot be inverted reliably"""

    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (cond={condition_number:.3e})")
        self.condition_number = condition_number


class NotConverged(NumericalError):
    """Iteration cap reached"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class BracketFailure(NumericalError):
    """No bracket for the root could be found"""
    pass


class NotSupercritical(NumericalError):
    """Malthusian parameter requested for a non-supercritical system"""
    pass


class NotOnLevelSet(NumericalError):
    """Point is not on the level set H = nu"""
    pass


class BadEpsilon(CBRWError):
    """Epsilon outside (0, nu)"""
    pass


# ============================================================================
# Simulation errors
# ============================================================================

class SimulationError(CBRWError):
    """Monte Carlo errors"""
    pass


class PopulationCapExceeded(SimulationError):
    """Live population exceeded max_population"""
    pass


class EventCapExceeded(SimulationError):
    """Number of processed events exceeded max_events"""
    pass


class AllExtinct(SimulationError):
    """Mean population vanished inside the fit window"""
    pass


class EmptySnapshot(SimulationError):
    """Snapshot without particles"""
    pass


class InsufficientReplicates(SimulationError):
    """Too few replicates for the requested statistic"""
    pass


# ============================================================================
# Configuration errors
# ============================================================================

class ConfigError(CBRWError):
    """Configuration errors"""
    pass


class ParseError(ConfigError):
    """Config file is not valid JSON"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class SchemaError(ConfigError):
    """Config file violates the schema"""

    def __init__(self, message: str, key: str):
        super().__init__(f"{key}: {message}")
        self.key = key
