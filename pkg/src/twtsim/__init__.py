"""Deterministic Wi-Fi 6 TWT streaming simulator and schedule search toolkit."""

from .config import ConfigError, ParsedConfig, parse, parse_config, parse_template
from .macsim import (
    MacParams,
    Scenario,
    SimTrace,
    Station,
    aggregate,
    back_solve_phy_rate,
    backoff_draw,
    run_sim,
    single_contender_bound_mbps,
)
from .qos import QosReport, compute_qos, qos_pass
from .scenarios import ScenarioTemplate, derive_seed, paper_setup
from .schedule import TwtSchedule, duty_cycle, schedule_from, wake_windows
from .search import (
    DutyPoint,
    InfeasibleTargetError,
    MfPoint,
    SearchResult,
    SessionRecord,
    phase1_min_duty,
    phase2_select_mf,
    phase3_validate,
    run_full_search,
)
from .traffic import (
    Burst,
    VideoParams,
    available_bandwidth,
    generate_cbr_bursts,
    generate_vbr_bursts,
    sample_frame_size,
    sample_inter_burst_time,
    write_bursts_csv,
)
from .transport import Flow, offer_load, on_ack, on_idle_restart, on_loss

__version__ = "0.1.0"

__all__ = [
    "Burst",
    "ConfigError",
    "DutyPoint",
    "Flow",
    "InfeasibleTargetError",
    "MacParams",
    "MfPoint",
    "ParsedConfig",
    "QosReport",
    "Scenario",
    "ScenarioTemplate",
    "SearchResult",
    "SessionRecord",
    "SimTrace",
    "Station",
    "TwtSchedule",
    "VideoParams",
    "aggregate",
    "available_bandwidth",
    "back_solve_phy_rate",
    "backoff_draw",
    "compute_qos",
    "derive_seed",
    "duty_cycle",
    "generate_cbr_bursts",
    "generate_vbr_bursts",
    "offer_load",
    "on_ack",
    "on_idle_restart",
    "on_loss",
    "paper_setup",
    "parse",
    "parse_config",
    "parse_template",
    "phase1_min_duty",
    "phase2_select_mf",
    "phase3_validate",
    "qos_pass",
    "run_full_search",
    "run_sim",
    "sample_frame_size",
    "sample_inter_burst_time",
    "schedule_from",
    "single_contender_bound_mbps",
    "wake_windows",
    "write_bursts_csv",
]
