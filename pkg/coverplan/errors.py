#!/usr/bin/env python3
"""
Exception and warning types raised by coverplan.

User-facing failures raise one of the classes below. Programmer errors (wrong array
shapes, mismatched column counts) are guarded with plain ``assert`` statements.
"""


class CoverplanError(Exception):
    """Base class for every coverplan error."""


class ParseError(CoverplanError):
    """A scene, arrangement or artifact file could not be parsed."""


class ValidationError(CoverplanError):
    """
    A parsed value violates a model invariant.

    :param field_path:  The path of the offending field, e.g. ``"goals[0]"``.
    :param message:     A human readable explanation.
    """

    def __init__(self, field_path: str, message: str = ""):
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}" if message else field_path)


class EmptyConfigRegion(ValidationError):
    """The configuration region of a movable obstacle is empty after exclusions."""


class DegenerateGeometry(CoverplanError, UserWarning):
    """A loop collapsed below the minimum area and was dropped from a result."""


class BoundaryAmbiguous(CoverplanError):
    """A point lies within the snapping tolerance of a region boundary."""


class OutOfRegion(CoverplanError):
    """An obstacle position lies outside its effective configuration region."""


class InvalidPath(CoverplanError):
    """A path segment collides with the static obstacles."""


class PlannerFailure(CoverplanError):
    """The sampling planner did not find a path within its sample or time budget."""


class CombinationExplosion(CoverplanError):
    """The number of arrangement sets exceeds the configured cap."""


class BuildTimeout(CoverplanError):
    """The roadmap build exceeded its total time budget."""


class ArtifactMismatch(CoverplanError):
    """An artifact was loaded against a scene with a different fingerprint."""


class UnknownTarget(CoverplanError):
    """A render target does not exist."""


class ResolutionTooCoarse(CoverplanError, UserWarning):
    """A grid oracle cell is larger than some partition leaf."""
