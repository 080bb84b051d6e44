"""Exception hierarchy shared by every module of the toolkit."""


class DampmapError(Exception):
    """Base class for all toolkit errors."""


class InvalidParams(DampmapError, ValueError):
    pass


class OverdampedRegime(DampmapError, ValueError):
    """Omega^2 - lambda^2/4 <= 0: the shifted oscillator has no real frequency."""


class NonpositiveEnergy(DampmapError, ValueError):
    pass


class DomainError(DampmapError, ValueError):
    pass


class NonCancellableSingularity(DampmapError, ZeroDivisionError):
    """A zero denominator survived symbolic cancellation in a rational kernel."""

    def __init__(self, message, *, term=None):
        super().__init__(message)
        self.term = term


class FrameMismatch(DampmapError, ValueError):
    pass


class CollisionSingularity(DampmapError, ZeroDivisionError):
    """A Kepler-type frame was evaluated at r = 0."""


class OriginSingularity(DampmapError, ZeroDivisionError):
    """The Bohlin velocity map was evaluated at omega = 0."""


class BranchAmbiguity(DampmapError, ValueError):
    pass


class IntegrationError(DampmapError, RuntimeError):
    """Generic failure of the ODE solver."""

    def __init__(self, message, *, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepCollapse(IntegrationError):
    """The adaptive step fell below representable progress."""

    def __init__(self, message, *, s=None, trajectory=None):
        super().__init__(message, trajectory=trajectory)
        self.s = s

    def to_dict(self):
        return {"event": "step_collapse", "s": self.s, "message": str(self)}


class EventHit(IntegrationError):
    """The collision-proximity event r = r_min fired."""

    def __init__(self, message, *, s, state, r_min, trajectory=None):
        super().__init__(message, trajectory=trajectory)
        self.s = s
        self.state = state
        self.r_min = r_min

    def to_dict(self):
        return {
            "event": "r_min",
            "r_min": self.r_min,
            "s": self.s,
            "state": [float(v) for v in self.state],
            "message": str(self),
        }


class NoBoundState(DampmapError, RuntimeError):
    pass


class NonConvergence(DampmapError, RuntimeError):
    pass
