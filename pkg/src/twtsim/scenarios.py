"""Scenario construction: the default four-client BSS and the search phases.

The default setup mirrors a small office BSS: three backlogged clients and a
device under test streaming synthetic video from a remote server.  Peak
background congestion is eight parallel saturated TCP streams to each of the
three non-TWT clients, served locally by the AP.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .macsim import MacParams, Scenario, Station, back_solve_phy_rate
from .schedule import TwtSchedule, schedule_from
from .traffic import VideoParams, generate_cbr_bursts, generate_vbr_bursts
from .transport import Flow

REMOTE_RTT_S = 0.030
LOCAL_RTT_S = 0.002


def derive_seed(*parts: int) -> int:
    """Stable scalar seed from a tuple of integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class ScenarioTemplate:
    """Everything the schedule search needs to instantiate simulations."""

    stations: tuple[Station, ...]  # AP + clients, no TWT attached
    dut: str
    video: VideoParams
    background: tuple[tuple[str, int], ...]  # (client id, parallel streams)
    mac: MacParams = MacParams()
    remote_rtt_s: float = REMOTE_RTT_S
    local_rtt_s: float = LOCAL_RTT_S
    queue_limit_segments: int = 256
    seeds: int = 5
    master_seed: int = 1
    phase1_duration_s: float = 30.0
    session_duration_s: float = 120.0
    max_underruns: int = 3
    qos_interval_s: float = 1.0

    @property
    def bitrate_mbps(self) -> float:
        return self.video.bitrate_mbps

    def _with_twt(self, schedule: TwtSchedule | None) -> tuple[Station, ...]:
        out = []
        for s in self.stations:
            if s.id == self.dut and schedule is not None:
                out.append(replace(s, twt=schedule))
            else:
                out.append(s)
        return tuple(out)

    def _dut_flow(self, kind: str) -> Flow:
        return Flow(
            id="dut-stream",
            dst=self.dut,
            kind=kind,
            base_rtt_s=self.remote_rtt_s if kind == "burst" else self.local_rtt_s,
            queue_limit_segments=self.queue_limit_segments,
        )

    def _background_flows(self) -> tuple[Flow, ...]:
        flows = []
        for dst, streams in self.background:
            for i in range(streams):
                flows.append(
                    Flow(
                        id=f"bg-{dst}-{i}",
                        dst=dst,
                        kind="saturated",
                        base_rtt_s=self.local_rtt_s,
                        queue_limit_segments=self.queue_limit_segments,
                    )
                )
        return tuple(flows)

    def phase1_scenario(self, duty: int, seed: int) -> Scenario:
        """Unloaded BSS, one saturated local stream to the TWT DUT, MF = 1."""
        sched = schedule_from(duty, 1)
        return Scenario(
            stations=self._with_twt(sched),
            flows=(self._dut_flow("saturated"),),
            duration_s=self.phase1_duration_s,
            seed=seed,
            mac=self.mac,
            record_cwnd=False,
        )

    def session_scenario(
        self,
        duty: int | None,
        mf: int,
        model: str,
        seed: int,
        loaded: bool = True,
        duration_s: float | None = None,
        record_cwnd: bool = False,
    ) -> Scenario:
        """A streaming session; duty None disables TWT (always-awake baseline)."""
        if model not in ("cbr", "vbr"):
            raise ValueError(f"model must be 'cbr' or 'vbr', got {model!r}")
        duration = self.session_duration_s if duration_s is None else duration_s
        if model == "cbr":
            bursts = generate_cbr_bursts(self.video, duration)
        else:
            rng = np.random.default_rng(derive_seed(seed, 0x7BA))
            bursts = generate_vbr_bursts(self.video, duration, rng)
        sched = schedule_from(duty, mf) if duty is not None else None
        flows = (self._dut_flow("burst"),) + (self._background_flows() if loaded else ())
        return Scenario(
            stations=self._with_twt(sched),
            flows=flows,
            bursts=tuple(bursts),
            duration_s=duration,
            seed=seed,
            mac=self.mac,
            record_cwnd=record_cwnd,
        )

    def background_only_scenario(self, seed: int, duration_s: float | None = None) -> Scenario:
        """Peak background congestion without the DUT's stream."""
        duration = self.session_duration_s if duration_s is None else duration_s
        return Scenario(
            stations=self.stations,
            flows=self._background_flows(),
            duration_s=duration,
            seed=seed,
            mac=self.mac,
            record_cwnd=False,
        )


def paper_setup(
    bitrate_mbps: float = 15.6,
    seeds: int = 5,
    master_seed: int = 1,
    mac: MacParams | None = None,
) -> ScenarioTemplate:
    """Default four-client BSS, rates back-solved from standalone figures."""
    mac = mac or MacParams()
    spec = [
        ("client1", -46.0, 63.5),
        ("client2", -45.0, 75.4),
        ("client3", -37.0, 163.0),
        ("client4", -36.0, 95.0),
    ]
    stations = [Station(id="ap", role="ap", phy_rate_mbps=1000.0)]
    for sid, rssi, standalone in spec:
        stations.append(
            Station(
                id=sid,
                role="client",
                phy_rate_mbps=back_solve_phy_rate(standalone, mac),
                rssi_dbm=rssi,
            )
        )
    return ScenarioTemplate(
        stations=tuple(stations),
        dut="client4",
        video=VideoParams(bitrate_mbps=bitrate_mbps),
        background=(("client1", 8), ("client2", 8), ("client3", 8)),
        mac=mac,
        seeds=seeds,
        master_seed=master_seed,
    )
