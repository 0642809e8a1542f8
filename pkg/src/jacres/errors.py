"""Exception hierarchy.

Every error raised on mathematically invalid input derives from
:class:`InvalidInput`; the command-line front end maps these to exit code 2.
"""

from __future__ import annotations


class JacresError(Exception):
    """Base class for all library errors."""


class InvalidInput(JacresError):
    """Input is well formed but mathematically inadmissible."""


class ClosedGap(InvalidInput):
    """Two bands touch: the discriminant has a double root at +-2."""


class NonReal(InvalidInput):
    """A root of Delta -+ 2 is not real."""


class BranchAmbiguity(JacresError):
    """The two branches of a quadratic coincide."""


class PoleHit(JacresError):
    """An evaluation point sits on (or numerically at) a pole."""


class DegreeMismatch(JacresError):
    """A polynomial fit of the predicted degree does not reproduce the data."""


class ClassificationAmbiguous(JacresError):
    """A real zero of a(z) could not be classified as eigenvalue or resonance.

    Attributes
    ----------
    point : float
        The zero in question.
    ratios : tuple of float
        Normalized residue ratios on the plus and minus sheets.
    """

    def __init__(self, point: float, ratios: tuple[float, float]):
        self.point = point
        self.ratios = ratios
        super().__init__(
            f"cannot classify singularity at {point!r}: "
            f"plus-sheet residue ratio {ratios[0]:.3g}, minus-sheet {ratios[1]:.3g}"
        )


class InvalidConfiguration(InvalidInput):
    """A singularity configuration fails the existence conditions."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class LostPrecision(JacresError):
    """Hankel determinants are not resolved at the working precision."""


class QuadratureUnderresolved(JacresError):
    """Doubling the quadrature node count still changes the result."""


class NoTailFound(InvalidInput):
    """No periodic tail is visible within the computed coefficient range."""


class NoSuchMass(InvalidInput):
    """The requested point is not a mass point of the measure."""


class OnSpectrum(InvalidInput):
    """The requested point lies on the essential spectrum."""


class InterlacingViolation(InvalidInput):
    """A Christoffel transform would break the interlacing rule.

    Attributes
    ----------
    suggested_eps : float or None
        The opposite-sign shift, if that one would have been admissible.
    """

    def __init__(self, message: str, suggested_eps: float | None = None):
        self.suggested_eps = suggested_eps
        super().__init__(message)


class NotFreeTail(InvalidInput):
    """The operator does not have the free tail a = 1, b = 0 with period one."""


class GuardViolated(InvalidInput):
    """A perturbation size is not below half the minimal singularity separation."""
