"""Compiling matrix algorithms to the single-excitation subspace of a
fully connected qubit array."""
from .device import BIT_ORDERING, DeviceGraph, Drive, Schedule, Segment, total_duration
from .errors import ContractViolation, NumericalFailure, SesError
from .numerics import aba_decompose, spectral_unitary, takagi_symmetric_unitary

__all__ = [
    "BIT_ORDERING",
    "ContractViolation",
    "DeviceGraph",
    "Drive",
    "NumericalFailure",
    "Schedule",
    "Segment",
    "SesError",
    "aba_decompose",
    "spectral_unitary",
    "takagi_symmetric_unitary",
    "total_duration",
]

__version__ = "0.1.0"
