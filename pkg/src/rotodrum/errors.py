"""Exception types shared across the package."""


class RotodrumError(Exception):
    """Base class for all package-specific errors."""


class NotOnBoundary(RotodrumError):
    """Point is farther from the wall than the contact tolerance."""


class NotInContact(RotodrumError):
    """Ball centers are not at touching distance."""


class NotApproaching(RotodrumError):
    """Balls are receding; no collision to resolve."""


class NotOutgoing(RotodrumError):
    """Particle moves inward in the co-rotating frame at a wall event.

    Signals an event-ordering bug in the caller, not a physical state.
    """


class NoWallHit(RotodrumError):
    """No wall crossing found before the search horizon (internal error)."""


class SimultaneousCollision(RotodrumError):
    """Two candidate events coincide within tolerance; the run aborts."""


class UnsupportedDomain(RotodrumError):
    """Operation is not defined for this domain variant."""


class InfeasibleEnsemble(RotodrumError):
    """Rejection sampler exhausted its proposal budget."""


class VerticalChord(RotodrumError):
    """Both anchor points share the same x; use the vertical bounce map."""


class RootNotFound(RotodrumError):
    """Newton iteration for the bounce increment failed to converge."""


class IrrelevantRoot(RotodrumError):
    """Root solver landed on the pass-through solution delta = 2w."""


class SequenceTerminates(RotodrumError):
    """The two-point bounce sequence cannot be continued.

    Carries the records produced so far in ``records``.
    """

    def __init__(self, msg, records=()):
        super().__init__(msg)
        self.records = list(records)


class InsufficientData(RotodrumError):
    """Not enough records for the requested fit."""


class ParseError(RotodrumError):
    """Config file does not parse under the key-value grammar."""


class ValidationError(RotodrumError):
    """Config parsed but one or more values are invalid.

    ``errors`` lists one message per offending key.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
