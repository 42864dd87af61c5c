"""Numerical tools for warped-product Yamabe gradient solitons."""

from .errors import (ConstancyError, DimensionError, DomainError, NoValidPoints, PositivityError,
                     SPDError, SpecFormatError, UnknownId, WarpfieldError)
from .riemann import MetricField, PointGeometry
from .soliton import SolitonInstance, residual
from .warped import WarpedSpec, assemble

__all__ = [
    "ConstancyError", "DimensionError", "DomainError", "NoValidPoints", "PositivityError",
    "SPDError", "SpecFormatError", "UnknownId", "WarpfieldError",
    "MetricField", "PointGeometry", "SolitonInstance", "residual", "WarpedSpec", "assemble",
]
