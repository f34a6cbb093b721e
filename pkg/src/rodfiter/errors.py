"""Exception types raised by the reconstruction pipeline."""


class RodFIterError(Exception):
    """Base class for all package errors."""


class SingularSystem(RodFIterError):
    """The fitting matrix is rank-deficient (e.g. duplicate sample instants)."""


class ConvergenceConditionViolated(RodFIterError):
    """``t_N * sup|omega| >= 2``; the Picard iteration is not guaranteed to converge."""

    def __init__(self, margin: float, interval: int | None = None):
        self.margin = margin
        self.interval = interval
        where = "" if interval is None else f" in interval {interval}"
        super().__init__(
            f"convergence condition violated{where}: t_N*sup|omega| = {margin:.6g} >= 2"
        )


class NonFinite(RodFIterError):
    """A coefficient became NaN or infinite during iteration."""


class SingularRodrigues(RodFIterError):
    """The rotation angle reached pi, where the Rodrigues vector is unbounded."""
