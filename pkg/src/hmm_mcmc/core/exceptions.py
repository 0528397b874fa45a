"""
Exception classes for hmm-mcmc
"""

from typing import Optional, Tuple


class HmmMcmcException(Exception):
    """Base exception for hmm-mcmc"""
    pass


class DimensionMismatchException(HmmMcmcException):
    """Raised when array shapes or parameter dimensions disagree"""
    pass


class InvalidMatrixException(HmmMcmcException):
    """Raised when a transition or emission matrix is not column-stochastic"""
    pass


class InvalidParameterException(HmmMcmcException):
    """Raised when a probability parameter lies outside [0, 1]"""
    pass


class InvalidHistoryException(HmmMcmcException):
    """Raised when an observation history cannot be evaluated"""
    pass


class EnumerationLimitException(HmmMcmcException):
    """Raised when brute-force latent enumeration would exceed its cap"""
    pass


class DatasetParseException(HmmMcmcException):
    """Raised when a capture-history file cannot be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ModelSpecificationException(HmmMcmcException):
    """Raised when a model definition is inconsistent"""
    pass


class SamplerSchemeException(HmmMcmcException):
    """Raised when a sampler scheme cannot be applied to a model or dataset"""
    pass


class InitializationException(HmmMcmcException):
    """Raised when a chain cannot start from a finite log posterior"""
    pass


class LatentStateException(HmmMcmcException):
    """Raised when a latent full conditional has no support"""

    def __init__(self, message: str, position: Optional[Tuple[int, int]] = None):
        self.position = position
        super().__init__(message)


class SimulationException(HmmMcmcException):
    """Raised when dataset simulation cannot complete"""
    pass


class DiagnosticsException(HmmMcmcException):
    """Raised when chain diagnostics cannot be computed"""
    pass


class ConfigurationException(HmmMcmcException):
    """Raised when configuration is invalid"""
    pass
