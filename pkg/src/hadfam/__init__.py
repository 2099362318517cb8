"""Perturbative families of complex Hadamard matrices through the Fourier matrix."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalInconsistencyError, StateError  # noqa: E402

__all__ = ["DomainError", "NumericalInconsistencyError", "StateError", "__version__"]
