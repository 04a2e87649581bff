"""Run-level numeric diagnostics counters."""

from dataclasses import dataclass


@dataclass
class Diagnostics:
    """Counters for boundary clamps and normalized-loss clips.

    log_clamps counts coordinates pushed up to the positivity floor before a
    logarithm; loss_clips counts normalized surrogate losses that fell outside
    [0, 1] and were clipped.
    """

    log_clamps: int = 0
    loss_clips: int = 0

    def merge(self, other: "Diagnostics") -> None:
        self.log_clamps += other.log_clamps
        self.loss_clips += other.loss_clips
