"""Simplified ACK-clocked TCP used by all downlink flows.

The congestion window lives at the server.  ACKs advance it through slow
start and congestion avoidance; a queue-overflow drop halves it (instant
recovery, no retransmission timers).  A sender that has been idle longer
than ``idle_restart_s`` falls back to its initial window before sending
again, as real stacks do after an application-limited pause.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

FlowKind = Literal["saturated", "burst"]


@dataclass(frozen=True)
class Flow:
    """One TCP flow from a server through the AP to a station."""

    id: str
    dst: str
    kind: FlowKind
    cwnd_segments: float = 10.0
    ssthresh_segments: float = math.inf
    base_rtt_s: float = 0.030
    segment_bytes: int = 1500
    queue_limit_segments: int = 256
    cwnd_init_segments: float = 10.0
    idle_restart_s: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("saturated", "burst"):
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.cwnd_segments < 1:
            raise ValueError(f"cwnd must be >= 1, got {self.cwnd_segments}")
        if self.base_rtt_s <= 0:
            raise ValueError(f"base_rtt_s must be > 0, got {self.base_rtt_s}")
        if self.segment_bytes <= 0:
            raise ValueError(f"segment_bytes must be > 0, got {self.segment_bytes}")
        if self.queue_limit_segments < 1:
            raise ValueError(f"queue_limit must be >= 1, got {self.queue_limit_segments}")


def on_ack(flow: Flow, acked_segments: int) -> Flow:
    """Advance the window: slow start below ssthresh, else congestion avoidance.

    Clumped ACKs are processed as if each segment were acknowledged
    individually.
    """
    if acked_segments < 1:
        raise ValueError(f"acked_segments must be >= 1, got {acked_segments}")
    cwnd = flow.cwnd_segments
    for _ in range(acked_segments):
        if cwnd < flow.ssthresh_segments:
            cwnd += 1.0
        else:
            cwnd += 1.0 / cwnd
    return replace(flow, cwnd_segments=cwnd)


def on_loss(flow: Flow) -> Flow:
    """Multiplicative decrease on a queue drop: ssthresh = cwnd/2, floor 2."""
    ssthresh = max(flow.cwnd_segments / 2.0, 2.0)
    return replace(flow, cwnd_segments=ssthresh, ssthresh_segments=ssthresh)


def on_idle_restart(flow: Flow) -> Flow:
    """Collapse to the initial window after a sender-idle period."""
    ssthresh = max(flow.ssthresh_segments, 0.75 * flow.cwnd_segments)
    return replace(
        flow,
        cwnd_segments=min(flow.cwnd_segments, flow.cwnd_init_segments),
        ssthresh_segments=ssthresh,
    )


def offer_load(flow: Flow, pending_bytes: float, in_flight_bytes: int) -> int:
    """Bytes the server may push now: window headroom, clipped at the queue limit.

    ``pending_bytes`` is the unsent backlog (``math.inf`` for a saturated
    source).  The result is a whole number of segments.
    """
    if pending_bytes < 0 or in_flight_bytes < 0:
        raise ValueError("pending_bytes and in_flight_bytes must be >= 0")
    headroom = int(flow.cwnd_segments) * flow.segment_bytes - in_flight_bytes
    admissible = min(pending_bytes, max(0, headroom), flow.queue_limit_segments * flow.segment_bytes)
    segments = int(admissible // flow.segment_bytes)
    # a burst tail smaller than one segment still needs to travel
    if segments == 0 and 0 < pending_bytes < flow.segment_bytes and headroom > 0:
        return int(pending_bytes)
    return segments * flow.segment_bytes
