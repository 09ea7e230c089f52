"""Maneuver time grid: alternating forced and natural arcs."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class ArcKind(enum.Enum):
    FORCED = "forced"
    NATURAL = "natural"


def min_coast_duration(omega_max: float, t_safety: float) -> float:
    """Shortest legal natural arc: a pi slew at omega_max plus a settling pad.

    Args:
        omega_max: maximum attitude slew rate [rad/s].
        t_safety: settling margin added after the slew [s].
    """
    if omega_max <= 0.0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    if t_safety < 0.0:
        raise ValueError(f"t_safety must be nonnegative, got {t_safety}")
    return math.pi / omega_max + t_safety


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Epochs t_0..t_{m+1} with intervals alternating forced, natural.

    Interval k spans [t_k, t_{k+1}]; even k are forced (thrust allowed),
    odd k are natural (coast). The grid always starts forced and ends
    natural, so the interval count m+1 is even and m is odd.
    """

    epochs: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.epochs, dtype=float)
        if t.ndim != 1 or t.size < 3:
            raise ValueError("grid needs at least 3 epochs (one burn, one coast)")
        if t.size % 2 != 1:
            raise ValueError(
                "epoch count must be odd so the grid ends on a natural arc"
            )
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("epochs must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "epochs", t)

    @property
    def m(self) -> int:
        """Index of the last interval; intervals run k = 0..m."""
        return self.epochs.size - 2

    @property
    def n_intervals(self) -> int:
        return self.epochs.size - 1

    @property
    def n_epochs(self) -> int:
        return self.epochs.size

    @property
    def n_burns(self) -> int:
        return self.n_intervals // 2

    @property
    def total_duration(self) -> float:
        return float(self.epochs[-1] - self.epochs[0])

    def arc_kind(self, k: int) -> ArcKind:
        if not 0 <= k <= self.m:
            raise IndexError(f"interval index {k} outside 0..{self.m}")
        return ArcKind.FORCED if k % 2 == 0 else ArcKind.NATURAL

    def dt(self, k: int) -> float:
        if not 0 <= k <= self.m:
            raise IndexError(f"interval index {k} outside 0..{self.m}")
        return float(self.epochs[k + 1] - self.epochs[k])

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.epochs)

    @property
    def forced_indices(self) -> tuple[int, ...]:
        return tuple(range(0, self.m + 1, 2))

    @property
    def natural_indices(self) -> tuple[int, ...]:
        return tuple(range(1, self.m + 1, 2))


def build_time_grid(
    total_duration: float,
    t_forced: float,
    t_natural: float,
    n_burns: int | None = None,
    min_coast: float | None = None,
) -> TimeGrid:
    """Lay out the alternating forced/natural grid over a plan horizon.

    With n_burns None the burn count is floor(total / (t_forced +
    t_natural)) and the leftover time is absorbed by the final natural
    arc. With an explicit n_burns the first 2*n_burns - 1 intervals keep
    their nominal lengths and the final natural arc is stretched or
    shrunk to land exactly on total_duration; the shrunk arc must still
    respect the slew floor.

    Args:
        total_duration: plan horizon [s].
        t_forced: nominal forced-arc length [s].
        t_natural: nominal natural-arc length [s].
        n_burns: number of forced arcs, or None for automatic.
        min_coast: slew floor for natural arcs [s]; defaults to t_natural.

    Raises:
        ValueError: when the requested layout cannot fit the horizon or
            the final natural arc would fall below the slew floor.
    """
    if total_duration <= 0.0:
        raise ValueError(f"total_duration must be positive, got {total_duration}")
    if t_forced <= 0.0:
        raise ValueError(f"t_forced must be positive, got {t_forced}")
    floor = t_natural if min_coast is None else min_coast
    if t_natural < floor:
        raise ValueError(
            f"natural arc {t_natural:.3f} s is shorter than the minimum "
            f"coast duration {floor:.3f} s (slew floor)"
        )
    if n_burns is None:
        n_burns = int(math.floor(total_duration / (t_forced + t_natural)))
        if n_burns < 1:
            raise ValueError(
                f"horizon {total_duration:.3f} s is too short for one "
                f"forced+natural pair ({t_forced + t_natural:.3f} s)"
            )
    if n_burns < 1:
        raise ValueError(f"n_burns must be >= 1, got {n_burns}")

    durations = np.empty(2 * n_burns)
    durations[0::2] = t_forced
    durations[1::2] = t_natural
    final_natural = total_duration - float(np.sum(durations[:-1]))
    if final_natural < floor:
        raise ValueError(
            f"final natural arc would be {final_natural:.3f} s, shorter than "
            f"the minimum coast duration {floor:.3f} s (slew floor); reduce "
            f"n_burns or the nominal arc lengths"
        )
    durations[-1] = final_natural
    epochs = np.concatenate(([0.0], np.cumsum(durations)))
    # cumsum rounding must not move the final epoch off the horizon
    epochs[-1] = total_duration
    return TimeGrid(epochs)
