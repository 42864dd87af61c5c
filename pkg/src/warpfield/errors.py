"""Exception hierarchy shared by every warpfield module."""

from __future__ import annotations


class WarpfieldError(Exception):
    """Base class for all library errors."""


class DomainError(WarpfieldError, ValueError):
    """A partial expression node or a chart was evaluated outside its domain."""


class InterpolationRangeError(DomainError):
    """A sampled (spline) field was evaluated outside its knot range."""


class SPDError(WarpfieldError):
    """The metric is not positive definite at the requested point."""


class PositivityError(WarpfieldError):
    """A warping function is not strictly positive where it must be."""


class ConstancyError(WarpfieldError):
    """A scalar curvature that must be constant varies beyond tolerance."""


class DimensionError(WarpfieldError, ValueError):
    """A formula is undefined for the given dimensions."""


class NoValidPoints(WarpfieldError):
    """Every grid point was rejected (for instance |grad h| below the floor)."""


class UnknownId(WarpfieldError, KeyError):
    """Requested catalog id is not registered."""

    def __str__(self) -> str:
        # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class SpecFormatError(WarpfieldError, ValueError):
    """A manifold-spec JSON document does not parse to a valid geometry."""
