"""Exception types raised across the package."""


class NSGateError(Exception):
    """Base class for all package errors."""


class PhotonCapError(NSGateError):
    """Two-mode photon total exceeds the configured cap."""


class LossyBranchError(NSGateError):
    """Detection removes more photons than were previously added to the signal beam.

    The low-photon components of the signal state are annihilated, so the
    branch cannot be corrected downstream.
    """


class InvalidDetectionError(NSGateError):
    """More photons detected than are available in the two modes."""


class NotAGateError(NSGateError):
    """Composed map changes the photon number of the signal beam."""


class DegenerateMapError(NSGateError):
    """Composed map annihilates the vacuum component (F0 == 0)."""


class ResidualToleranceError(NSGateError):
    """Map is not an NS gate within tolerance, so its probability depends on the input."""


class NotACorrectionError(NSGateError):
    """Correction pair does not restore the photon number after a (1,0) error."""


class IncompatibleBranchesError(NSGateError):
    """Main and correction branches do not share the same first splitter."""


class SequenceParseError(NSGateError, ValueError):
    """Malformed sequence string.

    Attributes:
        offset: zero-based character offset of the offending character.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at character {offset}")
        self.offset = offset
