"""Exception types shared across the package.

Each error maps to a distinct CLI exit code, see `stickysym.cli.EXIT_CODES`.
"""


class StickySymError(Exception):
    """Base class for all package errors."""


class OverlapError(StickySymError):
    """Two spheres interpenetrate beyond the contact tolerance."""

    def __init__(self, i: int, j: int, distance: float, target: float):
        self.i, self.j = i, j
        self.distance, self.target = distance, target
        super().__init__(
            f"spheres {i} and {j} overlap: |x_i - x_j| = {distance:.6g} "
            f"< r_i + r_j = {target:.6g}"
        )


class RadiiMismatchError(StickySymError):
    """A permutation does not preserve the radii of a cluster."""


class TooLargeError(StickySymError):
    """Problem size exceeds the supported exhaustive-search range."""


class RankDeficientError(StickySymError):
    """Contact gradients are linearly dependent at a configuration."""


class NewtonDivergedError(StickySymError):
    """Projection onto the constraint manifold failed to converge."""


class InfeasibleEndpointError(StickySymError):
    """A path endpoint violates the constraint system."""


class NotAGroupError(StickySymError):
    """A set of operations fails the group axioms."""


class NotDivisibleError(StickySymError):
    """A symmetry number does not divide the relevant group order."""


class ColorRadiiConflictError(StickySymError):
    """A color partition splits spheres of unequal radii into one class."""


class ConstructionFailedError(StickySymError):
    """A canonical cluster builder could not produce a valid embedding."""


class RelaxationFailedError(StickySymError):
    """Could not move a boundary configuration into the manifold interior."""
