"""Exception hierarchy.

Every library-raised error derives from :class:`RotorSpectraError`; the CLI
maps :class:`ConfigError` to exit code 2 and everything else to exit code 1.
"""


class RotorSpectraError(Exception):
    """Base class for all library errors."""


class ConfigError(RotorSpectraError):
    """Malformed run configuration (bad file, schema, or parameter range)."""


# --- model ---

class DuplicateSpeed(RotorSpectraError):
    """Two band speeds compare exactly equal."""


class EmptyBand(RotorSpectraError):
    """A band width is zero or negative."""


class NonBandable(RotorSpectraError):
    """A speed recurs in non-adjacent runs, so no banded model exists."""


class DimensionTooSmall(RotorSpectraError):
    """Generator stencil needs at least two fibres."""


class EpsOutOfRange(RotorSpectraError):
    """Id + eps*Wdot leaves the interval [0, 1] entrywise."""


# --- spectra ---

class NoConvergence(RotorSpectraError):
    """Eigensolver failed or residuals exceed tolerance.

    Carries whatever partial results exist in the ``partial`` attribute.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class AmbiguousLabelling(RotorSpectraError):
    """Assignment cost exceeds the Gershgorin radius with disjoint band disks."""


# --- zero_noise ---

class DegenerateBlock(RotorSpectraError):
    """A noise block has an eigenvalue gap below tolerance."""


class ZeroVector(RotorSpectraError):
    """Projective distance of a zero vector is undefined."""


class GammaViolated(RotorSpectraError):
    """Band phases coincide at this Fourier index; the limit theory does not apply."""


# --- response ---

class DegenerateFirstOrder(RotorSpectraError):
    """Two first-order eigenvalues within one band coincide."""


class NonOrthogonal(RotorSpectraError):
    """Response vector is not orthogonal to its eigenvector."""


class EigsNotSimple(RotorSpectraError):
    """Eigenvalues are not pairwise distinct at the requested tolerance."""


class EpsZero(RotorSpectraError):
    """Speed response at eps = 0 is discontinuous and refused by design."""


# --- oracle ---

class NotLaplacian(RotorSpectraError):
    """Closed forms only exist for the central-difference Laplacian generator."""


class MismatchBeyondTolerance(RotorSpectraError):
    """Closed-form and numerical eigendata disagree beyond tolerance."""


# --- simulate ---

class InsufficientData(RotorSpectraError):
    """Too many empty rows in the empirical transition estimate."""


class NoComplexEigenvalues(RotorSpectraError):
    """Spectrum is numerically real; no cycle to report."""
