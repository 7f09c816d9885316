"""Exception types raised by the Blotto defense package"""


class BlottoError(Exception):
    """Base class for all package errors"""


class GameConfigError(BlottoError, ValueError):
    """Invalid game parameters"""


class ActionSpaceTooLargeError(BlottoError, ValueError):
    """Enumerated action set would exceed the configured cap"""


class DimensionMismatchError(BlottoError, ValueError):
    """Vectors disagree on the number of devices"""


class EmptyStorageError(BlottoError, ValueError):
    """Total data size is zero"""


class DataSizeError(BlottoError, ValueError):
    """Data sizes outside [0, 1] or off the quantization grid"""


class RegimeInapplicableError(BlottoError, ValueError):
    """Closed-form equilibrium preconditions do not hold"""


class InfeasibleAllocationError(BlottoError, ValueError):
    """Allocation violates the budget or the granularity lattice"""


class ReplayUnderfullError(BlottoError, ValueError):
    """Replay memory holds fewer transitions than the minibatch size"""


class ShapeMismatchError(BlottoError, ValueError):
    """Network input or parameter shapes are inconsistent"""


class ArtifactMismatchError(BlottoError):
    """Warm-start artifact does not belong to this configuration"""


class ScenarioParseError(BlottoError, ValueError):
    """Scenario file could not be parsed"""


class SimulationError(BlottoError):
    """A simulation run failed at a given seed and slot"""


class SweepError(BlottoError):
    """A sweep point failed"""
