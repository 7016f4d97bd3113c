"""Streaming QoS metrics for the device under test.

A burst left unserved when its successor is released stalls the client's
playout buffer: burst i underruns iff its last byte lands after
release_i + inter_burst_time_i.  Underrun time is how far past that deadline
service finished (truncated at the simulation horizon for bursts that never
finished).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .macsim import SimTrace
from .traffic import Burst


@dataclass(frozen=True)
class QosReport:
    """QoS of one streaming session."""

    duration_s: float
    delivered_bytes: int
    avg_throughput_mbps: float
    instantaneous_mbps: list[tuple[float, float]]
    underrun_events: int
    underrun_time_s: float
    throughput_variation: float
    late_bursts: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "duration_s": self.duration_s,
            "delivered_bytes": self.delivered_bytes,
            "avg_throughput_mbps": self.avg_throughput_mbps,
            "underrun_events": self.underrun_events,
            "underrun_time_s": self.underrun_time_s,
            "throughput_variation": self.throughput_variation,
            "late_bursts": [list(x) for x in self.late_bursts],
        }


def compute_qos(trace: SimTrace, bursts: list[Burst], interval_s: float = 1.0) -> QosReport:
    """Derive the DUT stream's QoS from a trace and its generated burst list."""
    if trace.dut_flow_id is None:
        raise ValueError("trace has no DUT stream to score")
    if interval_s <= 0:
        raise ValueError(f"interval_s must be > 0, got {interval_s}")
    for index, _, _ in trace.dut_burst_serve:
        if index >= len(bursts):
            raise ValueError(f"trace serves burst {index} missing from the burst list")

    duration = trace.duration_s
    total = trace.delivered_bytes.get(trace.dut_flow_id, 0)
    avg = 8.0 * total / duration / 1e6

    nbins = math.ceil(duration / interval_s)
    bins = [0] * nbins
    fid = trace.dut_flow_id
    for t, _, flow, nbytes in trace.deliveries:
        if flow == fid:
            bins[min(int(t / interval_s), nbins - 1)] += nbytes
    series = [(i * interval_s, 8.0 * b / interval_s / 1e6) for i, b in enumerate(bins)]

    serve_end = {index: end for index, _, end in trace.dut_burst_serve}
    events = 0
    late_time = 0.0
    late: list[tuple[int, float]] = []
    for b in bursts:
        deadline = b.release_time_s + b.inter_burst_time_s
        end = serve_end.get(b.index)
        if end is None:
            if duration > deadline:
                lateness = duration - deadline
            else:
                continue  # deadline beyond the horizon: unobservable
        else:
            lateness = end - deadline
        if lateness > 0:
            events += 1
            late_time += lateness
            late.append((b.index, lateness))

    values = [v for _, v in series]
    mean = sum(values) / len(values) if values else 0.0
    if mean > 0:
        var = sum((v - mean) ** 2 for v in values) / len(values)
        cv = math.sqrt(var) / mean
    else:
        cv = 0.0

    return QosReport(
        duration_s=duration,
        delivered_bytes=total,
        avg_throughput_mbps=avg,
        instantaneous_mbps=series,
        underrun_events=events,
        underrun_time_s=late_time,
        throughput_variation=cv,
        late_bursts=late,
    )


def qos_pass(report: QosReport, bitrate_mbps: float, max_underruns: int = 3) -> bool:
    """True iff average throughput meets the bitrate and underruns are tolerable."""
    return (report.avg_throughput_mbps >= bitrate_mbps
            and report.underrun_events <= max_underruns)
