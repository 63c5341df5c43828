"""Exception types shared across the package."""


class RelsurfError(Exception):
    """Base class for all package errors."""


class SizeMismatchError(RelsurfError):
    """Two permutations do not act on the same set {1..n}."""


class NotTransitiveError(RelsurfError):
    """The gluing permutations generate an intransitive group (disconnected surface)."""


class MalformedDiagramError(RelsurfError):
    """A cylinder diagram violates the once-on-top/once-on-bottom label rule."""


class BasisMismatchError(RelsurfError):
    """Homology classes from different bases (or absolute/relative kinds) were combined."""


class DomainError(RelsurfError):
    """An argument is outside the documented domain of an operation."""


class NotRelError(RelsurfError):
    """A twist/stretch vector does not annihilate the core curves in homology."""


class NotGenusThreeError(RelsurfError):
    """The configuration classifier only accepts genus-3 diagrams."""


class UnsupportedStratumError(RelsurfError):
    """Enumeration requested beyond the supported genus range."""


class OrbitTooLargeError(RelsurfError):
    """SL(2,Z)-orbit exceeded the configured vertex cap."""


class NotClosedError(RelsurfError):
    """A word on the orbit graph does not return to its base vertex."""


class InvalidClassError(RelsurfError):
    """A cylinder subset is not closed under the homologous pairing and not user-asserted."""


class CapExceededError(RelsurfError):
    """A census request exceeds the configured square-count cap."""


class ConfigError(RelsurfError):
    """A pipeline configuration file is invalid."""


class ResumeMismatchError(RelsurfError):
    """Checkpoint inputs do not match the current run's inputs."""
