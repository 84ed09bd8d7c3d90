"""Exception hierarchy shared by all modules."""


class DiracQCAError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DiracQCAError):
    """A configuration value or argument violates an operation precondition."""


class SingularPointError(DiracQCAError):
    """The energy-momentum change of variables is singular at k = +-pi/2."""


class OutOfRangeError(DiracQCAError):
    """A pseudo energy-momentum pair has no preimage on the dispersion branch."""


class DivergentMeasureError(DiracQCAError):
    """The invariant-measure density diverges at the requested wave-vector."""


class SupportViolationError(DiracQCAError):
    """A packet's 5-sigma spectral window crosses an invariant point."""


class WrapAroundError(DiracQCAError):
    """A packet approached the periodic boundary during trajectory sampling."""


class MultiPeakError(DiracQCAError):
    """A density expected to be unimodal has two comparable maxima."""


class ParallelTrajectoriesError(DiracQCAError):
    """Two trajectories with equal velocities have no unique intersection."""


class NearSingularBoostError(DiracQCAError):
    """A space-time boost matrix was requested too close to a fixed point."""


class FixedPointSupportWarning(UserWarning):
    """Significant spectral amplitude sits within the fixed-point guard window."""
