"""Discrete-event simulator of a single 20 MHz Wi-Fi 6 BSS.

The AP is one CSMA/CA contender holding a FIFO downlink queue per
destination; stations contend to return transport ACKs.  Channel access is
resolved in contention cycles: after the medium goes idle every backlogged
contender waits DIFS and counts down its binary-exponential backoff, the
smallest counter transmits, ties collide and escalate their stage.  A
transmission is an A-MPDU bounded by the aggregation cap, the TXOP limit and
-- for a TWT station -- the remainder of the current wake window; nothing
addressed to or sent by a TWT station may cross a wake-window boundary.

Time is tracked in integer nanoseconds; all randomness comes from streams
derived from the scenario seed, so a scenario replays byte-identically.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .schedule import TwtSchedule, wake_windows
from .traffic import Burst
from .transport import Flow, offer_load, on_ack, on_idle_restart, on_loss

NS_PER_US = 1000
TCP_ACK_BYTES = 64

# event kinds (heap dispatch codes)
_TX_START, _TX_END, _ARRIVE, _SERVER_ACK, _BURST, _WAKE = range(6)
# transmission kinds
_DATA, _ACK, _COLLISION = range(3)

COLLISION_ID = "!collision"


@dataclass(frozen=True)
class MacParams:
    """802.11 MAC constants (microseconds unless noted)."""

    slot_us: int = 9
    sifs_us: int = 16
    difs_us: int = 34
    cw_min: int = 15
    cw_max: int = 1023
    max_ampdu_mpdus: int = 64
    mpdu_payload_bytes: int = 1500
    txop_limit_us: int = 5484
    per_frame_overhead_us: int = 100

    def __post_init__(self) -> None:
        for name in ("slot_us", "difs_us", "max_ampdu_mpdus", "mpdu_payload_bytes",
                     "txop_limit_us", "per_frame_overhead_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("cw_min", "cw_max"):
            v = getattr(self, name)
            if v < 1 or (v & (v + 1)) != 0:
                raise ValueError(f"{name} must be of the form 2^k - 1, got {v}")
        if self.cw_min > self.cw_max:
            raise ValueError("cw_min must be <= cw_max")
        if self.txop_limit_us <= self.per_frame_overhead_us:
            raise ValueError("txop_limit_us must exceed per_frame_overhead_us")

    @property
    def max_stage(self) -> int:
        return ((self.cw_max + 1) // (self.cw_min + 1)).bit_length() - 1


@dataclass(frozen=True)
class Station:
    """One node of the BSS; the DUT is the station carrying a TWT schedule."""

    id: str
    role: str  # "ap" | "client"
    phy_rate_mbps: float = 100.0
    rssi_dbm: float | None = None
    twt: TwtSchedule | None = None

    def __post_init__(self) -> None:
        if self.role not in ("ap", "client"):
            raise ValueError(f"station role must be 'ap' or 'client', got {self.role!r}")
        if self.phy_rate_mbps <= 0:
            raise ValueError(f"phy_rate_mbps must be > 0, got {self.phy_rate_mbps}")


@dataclass(frozen=True)
class Scenario:
    """A complete simulation input: stations, flows, DUT traffic, duration, seed."""

    stations: tuple[Station, ...]
    flows: tuple[Flow, ...]
    bursts: tuple[Burst, ...] = ()
    duration_s: float = 120.0
    seed: int = 1
    mac: MacParams = MacParams()
    record_cwnd: bool = True

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")
        aps = [s for s in self.stations if s.role == "ap"]
        if len(aps) != 1:
            raise ValueError(f"scenario needs exactly one AP, got {len(aps)}")
        ids = [s.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ValueError("station ids must be unique")
        twt_holders = [s for s in self.stations if s.twt is not None]
        if len(twt_holders) > 1:
            raise ValueError("at most one station may carry a TWT schedule")
        if twt_holders and twt_holders[0].role != "client":
            raise ValueError("the TWT schedule must sit on a client")
        by_id = {s.id: s for s in self.stations}
        flow_ids = [f.id for f in self.flows]
        if len(set(flow_ids)) != len(flow_ids):
            raise ValueError("flow ids must be unique")
        burst_flows = [f for f in self.flows if f.kind == "burst"]
        if len(burst_flows) > 1:
            raise ValueError("at most one burst-driven flow is supported")
        for f in self.flows:
            dst = by_id.get(f.dst)
            if dst is None or dst.role != "client":
                raise ValueError(f"flow {f.id!r} targets unknown or non-client {f.dst!r}")
        if burst_flows:
            if not self.bursts:
                raise ValueError("a burst-driven flow requires a burst list")
            if twt_holders and burst_flows[0].dst != twt_holders[0].id:
                raise ValueError("the burst-driven flow must target the TWT station")
            for i, b in enumerate(self.bursts):
                if b.index != i:
                    raise ValueError("burst indices must be contiguous from 0")
        elif self.bursts:
            raise ValueError("bursts supplied without a burst-driven flow")

    @property
    def dut_flow_id(self) -> str | None:
        for f in self.flows:
            if f.kind == "burst":
                return f.id
        return None

    @property
    def dut_station_id(self) -> str | None:
        for s in self.stations:
            if s.twt is not None:
                return s.id
        f = self.dut_flow_id
        if f is not None:
            return next(fl.dst for fl in self.flows if fl.id == f)
        return None


@dataclass
class SimTrace:
    """Everything observable from one run (times in seconds)."""

    duration_s: float
    dut_flow_id: str | None
    dut_station_id: str | None
    wake_windows_s: list[tuple[float, float]] | None
    deliveries: list[tuple[float, str, str, int]] = field(default_factory=list)
    airtime: list[tuple[float, float, str]] = field(default_factory=list)
    dut_burst_serve: list[tuple[int, float, float]] = field(default_factory=list)
    cwnd_series: list[tuple[float, str, float]] = field(default_factory=list)
    delivered_bytes: dict[str, int] = field(default_factory=dict)
    drops: dict[str, int] = field(default_factory=dict)
    collisions: int = 0

    def flow_throughput_mbps(self, flow_id: str) -> float:
        return 8.0 * self.delivered_bytes.get(flow_id, 0) / self.duration_s / 1e6


def backoff_draw(mac: MacParams, stage: int, rng: random.Random) -> int:
    """Draw a backoff counter uniform on [0, cw] with cw = min(cw_max, (cw_min+1)*2^stage - 1)."""
    if not (0 <= stage <= mac.max_stage):
        raise ValueError(f"stage must be in [0, {mac.max_stage}], got {stage}")
    cw = min(mac.cw_max, ((mac.cw_min + 1) << stage) - 1)
    return rng.randint(0, cw)


def mpdu_airtime_ns(mac: MacParams, phy_rate_mbps: float) -> int:
    """Airtime of one full MPDU in ns (ceil)."""
    return math.ceil(mac.mpdu_payload_bytes * 8 * NS_PER_US / phy_rate_mbps)


def aggregate(
    queue_bytes: float,
    phy_rate_mbps: float,
    window_remaining_us: float,
    mac: MacParams,
) -> int:
    """MPDUs in the next A-MPDU so the whole exchange fits its time budget.

    The budget is min(txop_limit, window_remaining); the per-exchange
    overhead is paid once.  Returns 0 when not even one MPDU fits.  (The
    engine itself additionally caps by the number of queued segments.)
    """
    if phy_rate_mbps <= 0:
        raise ValueError("phy_rate_mbps must be > 0")
    if queue_bytes <= 0 or window_remaining_us <= 0:
        return 0
    budget_ns = min(mac.txop_limit_us, window_remaining_us) * NS_PER_US - \
        mac.per_frame_overhead_us * NS_PER_US
    if budget_ns <= 0:
        return 0
    t_mpdu = mpdu_airtime_ns(mac, phy_rate_mbps)
    n_time = int(budget_ns // t_mpdu)
    n_queue = math.ceil(queue_bytes / mac.mpdu_payload_bytes)
    return max(0, min(mac.max_ampdu_mpdus, n_queue, n_time))


def single_contender_bound_mbps(phy_rate_mbps: float, mac: MacParams) -> float:
    """Closed-form saturation throughput of a lone contender (upper bound)."""
    t_mpdu_us = mac.mpdu_payload_bytes * 8 / phy_rate_mbps
    n = min(mac.max_ampdu_mpdus,
            int((mac.txop_limit_us - mac.per_frame_overhead_us) // t_mpdu_us))
    payload_us = n * t_mpdu_us
    mean_backoff_us = mac.cw_min / 2 * mac.slot_us
    return phy_rate_mbps * payload_us / (payload_us + mac.per_frame_overhead_us + mean_backoff_us)


_CALIBRATION_SEED = 0xCA11B
_CALIBRATION_DURATION_S = 4.0


def _calibration_throughput_mbps(phy_rate_mbps: float, mac: MacParams) -> float:
    """Simulated saturation throughput of a lone client at a given PHY rate."""
    scenario = Scenario(
        stations=(
            Station(id="ap", role="ap", phy_rate_mbps=max(1000.0, 4 * phy_rate_mbps)),
            Station(id="sta", role="client", phy_rate_mbps=phy_rate_mbps),
        ),
        flows=(Flow(id="cal", dst="sta", kind="saturated", base_rtt_s=0.002),),
        duration_s=_CALIBRATION_DURATION_S,
        seed=_CALIBRATION_SEED,
        mac=mac,
        record_cwnd=False,
    )
    return run_sim(scenario).flow_throughput_mbps("cal")


def back_solve_phy_rate(standalone_mbps: float, mac: MacParams) -> float:
    """PHY rate whose simulated single-client saturation matches a measured figure.

    Bisects on short fixed-seed calibration runs, so the returned rate is
    consistent with the engine's own contention/aggregation behaviour rather
    than an analytic approximation of it.
    """
    if standalone_mbps <= 0:
        raise ValueError("standalone_mbps must be > 0")
    lo, hi = standalone_mbps, standalone_mbps * 4
    if _calibration_throughput_mbps(hi, mac) < standalone_mbps:
        raise ValueError(
            f"standalone figure {standalone_mbps} Mbit/s is not reachable "
            "under the configured MAC parameters"
        )
    for _ in range(24):
        mid = (lo + hi) / 2
        if _calibration_throughput_mbps(mid, mac) < standalone_mbps:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


class _FlowState:
    __slots__ = ("flow", "released", "sent", "delivered", "in_flight",
                 "queued_segments", "last_send_ns", "drops")

    def __init__(self, flow: Flow, saturated: bool):
        self.flow = flow
        self.released: float = math.inf if saturated else 0.0
        self.sent = 0
        self.delivered = 0
        self.in_flight = 0
        self.queued_segments = 0
        self.last_send_ns: int | None = None
        self.drops = 0


class _Contender:
    __slots__ = ("sid", "is_ap", "bo", "stage", "rng")

    def __init__(self, sid: str, is_ap: bool, rng: random.Random):
        self.sid = sid
        self.is_ap = is_ap
        self.bo: int | None = None
        self.stage = 0
        self.rng = rng


class _Gate:
    """Wake-window arithmetic for the DUT (integer ns); inactive when wi == 0."""

    __slots__ = ("sp", "wi", "offset", "period")

    def __init__(self, twt: TwtSchedule):
        self.sp = twt.sp_us * NS_PER_US
        self.wi = twt.wi_us * NS_PER_US
        self.offset = twt.offset_us * NS_PER_US
        self.period = self.sp + self.wi

    def awake(self, t: int) -> bool:
        if t < self.offset:
            return False
        return (t - self.offset) % self.period < self.sp

    def remaining(self, t: int) -> int:
        """ns of wake window left at t (0 if asleep)."""
        if t < self.offset:
            return 0
        into = (t - self.offset) % self.period
        return self.sp - into if into < self.sp else 0

    def next_wake(self, t: int) -> int:
        if t < self.offset:
            return self.offset
        k = (t - self.offset) // self.period + 1
        return self.offset + k * self.period


class _Engine:
    def __init__(self, sc: Scenario):
        sc.validate()
        self.sc = sc
        self.mac = sc.mac
        self.horizon = round(sc.duration_s * 1e9 / NS_PER_US) * NS_PER_US  # exact us grid
        self.slot = sc.mac.slot_us * NS_PER_US
        self.difs = sc.mac.difs_us * NS_PER_US
        self.overhead = sc.mac.per_frame_overhead_us * NS_PER_US
        self.txop = sc.mac.txop_limit_us * NS_PER_US

        self.ap = next(s for s in sc.stations if s.role == "ap")
        self.clients = [s for s in sc.stations if s.role == "client"]
        self.by_id = {s.id: s for s in sc.stations}
        self.dut_id = sc.dut_station_id
        dut_station = self.by_id.get(self.dut_id) if self.dut_id else None
        twt = dut_station.twt if dut_station else None
        self.gate = _Gate(twt) if twt is not None and twt.wi_us > 0 else None

        self.t_mpdu = {s.id: mpdu_airtime_ns(sc.mac, s.phy_rate_mbps) for s in self.clients}
        for s in self.clients:
            if self.t_mpdu[s.id] > self.txop - self.overhead:
                raise ValueError(
                    f"station {s.id!r}: one MPDU at {s.phy_rate_mbps} Mbps "
                    f"does not fit the TXOP limit"
                )

        ss = np.random.SeedSequence(sc.seed)
        children = ss.spawn(1 + len(self.clients))
        self.ap_cont = _Contender(self.ap.id, True,
                                  random.Random(int(children[0].generate_state(1)[0])))
        self.client_cont = {
            s.id: _Contender(s.id, False, random.Random(int(c.generate_state(1)[0])))
            for s, c in zip(self.clients, children[1:])
        }

        self.flows: dict[str, _FlowState] = {
            f.id: _FlowState(f, f.kind == "saturated") for f in sc.flows
        }
        self.queues: dict[str, deque] = {s.id: deque() for s in self.clients}
        self.qbytes: dict[str, int] = {s.id: 0 for s in self.clients}
        self.acks: dict[str, list] = {s.id: [] for s in self.clients}

        rr_ids = [s.id for s in self.clients]
        self.rr = rr_ids
        self.rr_ptr = 0

        self.heap: list = []
        self.seq = 0
        self.busy_until = 0
        self.tx_scheduled = False
        self.race: tuple | None = None  # (contender list, min_bo)

        # burst bookkeeping
        self.burst_offsets: list[int] = []
        self.burst_sizes: list[int] = []
        self.burst_serve_start: dict[int, int] = {}
        self.ptr_start = 0
        self.ptr_end = 0

        windows = None
        if self.gate is not None:
            win_us = wake_windows(twt, round(sc.duration_s * 1e6))
            windows = [(a / 1e6, b / 1e6) for a, b in win_us]
        self.trace = SimTrace(
            duration_s=sc.duration_s,
            dut_flow_id=sc.dut_flow_id,
            dut_station_id=self.dut_id,
            wake_windows_s=windows,
        )
        for f in sc.flows:
            self.trace.delivered_bytes[f.id] = 0

    # -- heap helpers ---------------------------------------------------
    def _push(self, t: int, kind: int, payload=None) -> None:
        heapq.heappush(self.heap, (t, self.seq, kind, payload))
        self.seq += 1

    # -- transport ------------------------------------------------------
    def _record_cwnd(self, t: int, fs: _FlowState) -> None:
        if self.sc.record_cwnd:
            self.trace.cwnd_series.append((t / 1e9, fs.flow.id, fs.flow.cwnd_segments))

    def _try_send(self, t: int, fid: str) -> None:
        fs = self.flows[fid]
        pending = fs.released - fs.sent
        offer = offer_load(fs.flow, pending, fs.in_flight)
        if offer <= 0:
            return
        idle_ns = round(fs.flow.idle_restart_s * 1e9)
        if fs.last_send_ns is not None and t - fs.last_send_ns > idle_ns:
            fs.flow = on_idle_restart(fs.flow)
            self._record_cwnd(t, fs)
            offer = offer_load(fs.flow, pending, fs.in_flight)
            if offer <= 0:
                return
        fs.sent += offer
        fs.in_flight += offer
        fs.last_send_ns = t
        self._push(t + round(fs.flow.base_rtt_s * 1e9 / 2), _ARRIVE, (fid, offer))

    def _on_arrive(self, t: int, fid: str, nbytes: int) -> None:
        fs = self.flows[fid]
        seg = fs.flow.segment_bytes
        full, tail = divmod(nbytes, seg)
        chunks = [seg] * full + ([tail] if tail else [])
        room = fs.flow.queue_limit_segments - fs.queued_segments
        accepted = chunks[:max(0, room)]
        dropped = chunks[len(accepted):]
        if accepted:
            dst = fs.flow.dst
            q = self.queues[dst]
            for c in accepted:
                q.append((fid, c))
            self.qbytes[dst] += sum(accepted)
            fs.queued_segments += len(accepted)
        if dropped:
            dbytes = sum(dropped)
            fs.in_flight -= dbytes
            fs.sent -= dbytes
            fs.drops += 1
            self.trace.drops[fid] = self.trace.drops.get(fid, 0) + len(dropped)
            fs.flow = on_loss(fs.flow)
            self._record_cwnd(t, fs)
        self._kick(t)

    def _on_server_ack(self, t: int, fid: str, segs: int, nbytes: int) -> None:
        fs = self.flows[fid]
        fs.in_flight -= nbytes
        fs.flow = on_ack(fs.flow, segs)
        self._record_cwnd(t, fs)
        self._try_send(t, fid)

    def _on_burst(self, t: int, index: int) -> None:
        fid = self.sc.dut_flow_id
        fs = self.flows[fid]
        fs.released += self.burst_sizes[index]
        self._try_send(t, fid)

    # -- gating ---------------------------------------------------------
    def _dut_remaining(self, t: int) -> int:
        """ns the DUT may still occupy the air; unbounded without gating."""
        if self.gate is None:
            return 1 << 62
        return self.gate.remaining(t)

    # -- contention -----------------------------------------------------
    def _ack_duration(self, sid: str) -> int:
        records = self.acks[sid]
        bits = len(records) * TCP_ACK_BYTES * 8
        rate = self.by_id[sid].phy_rate_mbps
        return self.overhead + math.ceil(bits * NS_PER_US / rate)

    def _client_pending(self, t: int, sid: str) -> bool:
        if not self.acks[sid]:
            return False
        if sid == self.dut_id and self.gate is not None:
            return self._dut_remaining(t) >= self.difs + self._ack_duration(sid)
        return True

    def _ap_pending(self, t: int) -> bool:
        for dst, q in self.queues.items():
            if not q:
                continue
            if dst == self.dut_id and self.gate is not None:
                rem = self._dut_remaining(t)
                if rem > self.difs and aggregate_ns(
                        self.qbytes[dst], self.t_mpdu[dst],
                        min(self.txop, rem - self.difs), self.overhead,
                        self.mac.max_ampdu_mpdus, len(q)) >= 1:
                    return True
            else:
                return True
        return False

    def _select_ap_tx(self, t: int):
        """Pick (dest, n_mpdus, duration, from_rr) or None; DUT first inside windows."""
        if self.dut_id is not None and self.gate is not None:
            q = self.queues.get(self.dut_id)
            if q:
                rem = self._dut_remaining(t)
                n = aggregate_ns(self.qbytes[self.dut_id], self.t_mpdu[self.dut_id],
                                 min(self.txop, rem), self.overhead,
                                 self.mac.max_ampdu_mpdus, len(q))
                if n >= 1:
                    dur = self.overhead + n * self.t_mpdu[self.dut_id]
                    return (self.dut_id, n, dur, False)
        k = len(self.rr)
        for i in range(k):
            dst = self.rr[(self.rr_ptr + i) % k]
            if dst == self.dut_id and self.gate is not None:
                continue  # handled above (or asleep)
            q = self.queues[dst]
            if not q:
                continue
            n = aggregate_ns(self.qbytes[dst], self.t_mpdu[dst], self.txop,
                             self.overhead, self.mac.max_ampdu_mpdus, len(q))
            if n >= 1:
                dur = self.overhead + n * self.t_mpdu[dst]
                return (dst, n, dur, True)
        return None

    def _kick(self, t: int) -> None:
        """Resolve the next contention cycle if the channel is idle."""
        if self.tx_scheduled or t < self.busy_until:
            return
        racers = []
        if self._ap_pending(t):
            racers.append(self.ap_cont)
        for sid, cont in self.client_cont.items():
            if self._client_pending(t, sid):
                racers.append(cont)
        if not racers:
            return
        for c in racers:
            if c.bo is None:
                c.bo = backoff_draw(self.mac, c.stage, c.rng)
        min_bo = min(c.bo for c in racers)
        start = t + self.difs + min_bo * self.slot
        self.race = (racers, min_bo)
        self.tx_scheduled = True
        self._push(start, _TX_START, None)

    def _tentative_duration(self, t: int, cont: _Contender) -> int:
        if cont.is_ap:
            sel = self._select_ap_tx(t)
            return sel[2] if sel else 0
        return self._ack_duration(cont.sid)

    def _on_tx_start(self, t: int) -> None:
        self.tx_scheduled = False
        racers, min_bo = self.race
        self.race = None
        for c in racers:
            c.bo = max(0, c.bo - min_bo)
        winners = []
        for c in racers:
            if c.bo == 0:
                ok = self._ap_pending(t) if c.is_ap else self._client_pending(t, c.sid)
                if ok:
                    winners.append(c)
                else:
                    c.bo = None  # stale claim; redraw when pending again
        if not winners:
            self._kick(t)
            return
        if len(winners) > 1:
            dur = 0
            for w in winners:
                dur = max(dur, self._tentative_duration(t, w))
                w.stage = min(w.stage + 1, self.mac.max_stage)
                w.bo = backoff_draw(self.mac, w.stage, w.rng)
            if dur == 0:  # defensive: all winners stale simultaneously
                self._kick(t)
                return
            end = t + dur
            self.busy_until = end
            self.trace.collisions += 1
            self.trace.airtime.append((t / 1e9, end / 1e9, COLLISION_ID))
            self._push(end, _TX_END, (_COLLISION, None))
            return
        w = winners[0]
        if w.is_ap:
            sel = self._select_ap_tx(t)
            if sel is None:
                w.bo = None
                self._kick(t)
                return
            dst, n, dur, from_rr = sel
            if dst == self.dut_id and self.gate is not None:
                assert dur <= self._dut_remaining(t), "gated transmission would cross window end"
            end = t + dur
            payload = (_DATA, (dst, n, from_rr))
        else:
            if w.sid == self.dut_id and self.gate is not None:
                dur = self._ack_duration(w.sid)
                if dur > self._dut_remaining(t):
                    w.bo = None
                    self._kick(t)
                    return
            else:
                dur = self._ack_duration(w.sid)
            end = t + dur
            payload = (_ACK, w.sid)
        w.bo = None
        w.stage = 0
        self.busy_until = end
        self.trace.airtime.append((t / 1e9, end / 1e9, w.sid))
        self._push(end, _TX_END, payload)

    def _on_tx_end(self, t: int, kind: int, info) -> None:
        if kind == _DATA:
            dst, n, from_rr = info
            q = self.queues[dst]
            per_flow_bytes: dict[str, int] = {}
            per_flow_segs: dict[str, int] = {}
            total = 0
            for _ in range(n):
                fid, nbytes = q.popleft()
                per_flow_bytes[fid] = per_flow_bytes.get(fid, 0) + nbytes
                per_flow_segs[fid] = per_flow_segs.get(fid, 0) + 1
                total += nbytes
            self.qbytes[dst] -= total
            ts = t / 1e9
            for fid, nbytes in per_flow_bytes.items():
                fs = self.flows[fid]
                fs.queued_segments -= per_flow_segs[fid]
                fs.delivered += nbytes
                self.trace.delivered_bytes[fid] += nbytes
                self.trace.deliveries.append((ts, dst, fid, nbytes))
                self.acks[dst].append((fid, per_flow_segs[fid], nbytes))
                if fid == self.sc.dut_flow_id:
                    self._advance_bursts(t, fs.delivered)
            if from_rr:
                self.rr_ptr = (self.rr.index(dst) + 1) % len(self.rr)
        elif kind == _ACK:
            sid = info
            records = self.acks[sid]
            self.acks[sid] = []
            for fid, segs, nbytes in records:
                fs = self.flows[fid]
                half_rtt = round(fs.flow.base_rtt_s * 1e9 / 2)
                self._push(t + half_rtt, _SERVER_ACK, (fid, segs, nbytes))
        self._kick(t)

    def _advance_bursts(self, t: int, delivered_cum: int) -> None:
        ts = t / 1e9
        n = len(self.burst_offsets)
        while self.ptr_start < n and self.burst_offsets[self.ptr_start] < delivered_cum:
            self.burst_serve_start[self.ptr_start] = t
            self.ptr_start += 1
        while (self.ptr_end < n and
               self.burst_offsets[self.ptr_end] + self.burst_sizes[self.ptr_end] <= delivered_cum):
            start_ns = self.burst_serve_start[self.ptr_end]
            self.trace.dut_burst_serve.append((self.ptr_end, start_ns / 1e9, ts))
            self.ptr_end += 1

    # -- main loop ------------------------------------------------------
    def run(self) -> SimTrace:
        sc = self.sc
        if sc.bursts:
            off = 0
            for b in sc.bursts:
                self.burst_offsets.append(off)
                self.burst_sizes.append(b.size_bytes)
                off += b.size_bytes
                self._push(round(b.release_time_s * 1e9), _BURST, b.index)
        if self.gate is not None:
            first = self.gate.offset if self.gate.offset > 0 else 0
            self._push(first, _WAKE, None)
        for f in sc.flows:
            if f.kind == "saturated":
                self._try_send(0, f.id)
        self._kick(0)

        heap = self.heap
        horizon = self.horizon
        while heap:
            t, _, kind, payload = heapq.heappop(heap)
            if t >= horizon:
                break
            if kind == _TX_START:
                self._on_tx_start(t)
            elif kind == _TX_END:
                self._on_tx_end(t, payload[0], payload[1])
            elif kind == _ARRIVE:
                self._on_arrive(t, payload[0], payload[1])
            elif kind == _SERVER_ACK:
                self._on_server_ack(t, payload[0], payload[1], payload[2])
            elif kind == _BURST:
                self._on_burst(t, payload)
            else:  # _WAKE
                self._push(t + self.gate.period, _WAKE, None)
                self._kick(t)
        return self.trace


def aggregate_ns(queue_bytes: int, t_mpdu_ns: int, budget_ns: int,
                 overhead_ns: int, max_ampdu: int, queued_segments: int) -> int:
    """Engine-side aggregation: cap by time budget, A-MPDU limit and queued segments."""
    if queue_bytes <= 0 or queued_segments <= 0:
        return 0
    avail = budget_ns - overhead_ns
    if avail < t_mpdu_ns:
        return 0
    return min(max_ampdu, queued_segments, avail // t_mpdu_ns)


def run_sim(scenario: Scenario) -> SimTrace:
    """Execute a scenario and return its trace (deterministic per seed)."""
    return _Engine(scenario).run()
