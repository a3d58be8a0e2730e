"""Exception types shared across the package."""


class PilotwaveError(Exception):
    """Base class for all package-specific errors."""


class NodeProximity(PilotwaveError):
    """Evaluation point is too close to a wave-function zero for stable
    polar quantities (amplitude, phase gradient, quantum potential)."""


class NodeAbort(PilotwaveError):
    """A trajectory entered the node-threshold ball and integration stopped."""


class StepLimitExceeded(PilotwaveError):
    """The integrator hit its step budget before reaching the stop condition."""


class WindowTooSmall(PilotwaveError):
    """The declared sampling window holds too little probability mass."""


class ExcessNodeAborts(PilotwaveError):
    """Too large a fraction of ensemble trajectories aborted near nodes."""


class UnresolvedExcess(PilotwaveError):
    """Too many measurement trajectories ended outside every channel support."""


class PreconditionViolated(PilotwaveError):
    """The particle density is negative at the preparation time, so the
    detection-probability prediction does not apply."""


class ScenarioError(PilotwaveError):
    """A scenario file could not be parsed or fails its schema checks."""


class PhysicsInvariantViolated(PilotwaveError):
    """A constructed field violates one of its structural invariants."""
