"""Exception hierarchy shared by all heunlock modules."""


class HeunlockError(Exception):
    """Base class for all errors raised by this package."""


class OperationCancelled(HeunlockError):
    """A cooperative cancellation token was set during a long computation."""


# -- matrix-product engine ---------------------------------------------------

class NonSummableError(HeunlockError):
    """Factor perturbations fail the empirical summability (decay) probe."""


class ToleranceUnreachableError(HeunlockError):
    """The certified tail bound cannot reach the requested tolerance
    within the configured factor cap."""


class SeedTooLowError(HeunlockError):
    """The projective backward solver was seeded at an index where the
    projectivized maps are not yet contractions."""


# -- series solutions --------------------------------------------------------

class ZeroMuError(HeunlockError):
    """mu = 0 is outside the family (the first-order term degenerates)."""


class ResonanceDenominatorError(HeunlockError):
    """A rescaling denominator vanished outside its guaranteed range;
    the caller must switch to the resonant construction."""


class ResonantParametersError(HeunlockError):
    """b or b+n is (numerically) an integer where the non-resonant
    construction was requested."""


class ForbiddenNError(HeunlockError):
    """n is a non-positive integer: the entire-solution construction
    is undefined."""


class InconsistentOmegaError(HeunlockError):
    """The supplied omega does not satisfy lam + mu^2 = 1/(4 omega^2)."""


# -- spectral equations ------------------------------------------------------

class ForbiddenLError(HeunlockError):
    """l is a negative integer: the product factors are singular."""


class IntegerNError(HeunlockError):
    """n is (numerically) an integer where a non-integer n is required."""


class ResonantLineError(HeunlockError):
    """(B, A) lies within the refusal band around the resonant lines
    l = +-r (mod 2) where the level-curve equation is not asserted."""


class EvenLError(HeunlockError):
    """l is (numerically) an even integer: the boundary equation of the
    first kind is singular there."""


class OddLError(HeunlockError):
    """l is (numerically) an odd integer: the boundary equation of the
    second kind is singular there."""


class RangeExceededError(HeunlockError):
    """Argument outside the validated range of the series evaluation."""


class NoBracketError(HeunlockError):
    """No sign change (or acceptable minimum) found in the search interval."""


class LostTrackError(HeunlockError):
    """Curve continuation could not re-acquire the root after a step."""


# -- torus flow --------------------------------------------------------------

class StepUnderflowError(HeunlockError):
    """The adaptive integrator failed to make progress."""


class NotConvergedError(HeunlockError):
    """The rotation-number estimate did not reach the requested
    uncertainty within the period cap."""
