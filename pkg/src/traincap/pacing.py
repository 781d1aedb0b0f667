"""Deadline waiting and paced per-packet send loops.

Deadlines are absolute readings of the monotonic clock
(``time.monotonic_ns``). Only same-host differences are ever computed, so
monotonicity is all that matters; wall-clock adjustments cannot skew a
paced train.

Two modes:

* ``pure-spin`` busy-polls the clock until the deadline, giving the
  tightest wake precision at the cost of a fully occupied core.
* ``hybrid`` coarse-sleeps until ``deadline - hybrid_spin_window`` and
  spins only the final stretch, trading a bounded amount of precision for
  a mostly idle core (and, in-process, for letting peer threads run).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

PURE_SPIN = "pure-spin"
HYBRID = "hybrid"

_SLEEP_SLACK_NS = 50_000  # typical timer slack of a non-realtime sleep


@dataclass(frozen=True)
class PacerConfig:
    """How to wait: spin all the way, or sleep coarsely then spin."""

    mode: str = HYBRID
    hybrid_spin_window: int = 200_000  # ns of final busy-wait in hybrid mode

    def __post_init__(self) -> None:
        if self.mode not in (PURE_SPIN, HYBRID):
            raise ValueError(f"unknown pacer mode: {self.mode!r}")
        if self.mode == HYBRID and self.hybrid_spin_window <= 0:
            raise ValueError("hybrid_spin_window must be positive")


@dataclass(frozen=True)
class SlackReport:
    """Wake-up bookkeeping for one deadline.

    ``slack_ns`` is how far past the deadline the wake-up clock reading
    landed (0 for the degenerate already-passed case). ``late`` flags a
    deadline that was already in the past when the wait started.
    """

    wake_ns: int
    slack_ns: int
    late: bool


def no_sleep_horizon(cfg: PacerConfig) -> int:
    """Distance (ns) from a deadline inside which a wait never sleeps.

    Waking at ``deadline - no_sleep_horizon(cfg)`` and then waiting on
    ``deadline`` is guaranteed to busy-wait only, so the final approach
    is immune to sleep overshoot.
    """
    return cfg.hybrid_spin_window + _SLEEP_SLACK_NS if cfg.mode == HYBRID else 0


def wait_until(deadline: int, cfg: PacerConfig = PacerConfig()) -> SlackReport:
    """Block until the monotonic clock reads at least ``deadline`` ns.

    Returns at the first clock reading >= deadline; never wakes early.
    A deadline already in the past returns immediately with ``late`` set
    and the (meaningless) overshoot reported as 0.
    """
    now = time.monotonic_ns()
    if now >= deadline:
        return SlackReport(wake_ns=now, slack_ns=0, late=now > deadline)

    if cfg.mode == HYBRID:
        # Coarse sleep toward the spin window; leave room for timer slack
        # so an oversleep still lands before the deadline.
        while True:
            remaining = deadline - cfg.hybrid_spin_window - time.monotonic_ns()
            if remaining <= _SLEEP_SLACK_NS:
                break
            time.sleep((remaining - _SLEEP_SLACK_NS) / 1e9)

    t = time.monotonic_ns()
    while t < deadline:
        t = time.monotonic_ns()
    return SlackReport(wake_ns=t, slack_ns=t - deadline, late=False)


def pace_send(
    schedule: Sequence[int],
    emit: Callable[[int], int],
    cfg: PacerConfig = PacerConfig(),
) -> list[int]:
    """Emit one packet per scheduled instant; return the emit timestamps.

    ``emit(i)`` performs the send of packet ``i`` and returns its send
    timestamp (monotonic ns). Packet ``i`` is never emitted before
    ``schedule[i]``; when the emit action cannot keep up, the returned
    timestamps simply reflect the slower reality. An exception raised by
    ``emit`` aborts the train and propagates to the caller, which is
    responsible for marking the train invalid.
    """
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule instants must be strictly increasing")
    timestamps: list[int] = []
    for i, deadline in enumerate(schedule):
        wait_until(deadline, cfg)
        timestamps.append(emit(i))
    return timestamps
