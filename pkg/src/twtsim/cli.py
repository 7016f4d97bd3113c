"""Batch command-line front-end.

Every command reads a scenario config, runs deterministically from (config,
seed), and writes plot-ready CSV/JSON artifacts into the output directory.
Floats are serialised with ``repr`` and JSON keys are sorted, so re-running a
command with the same inputs yields byte-identical files.

Exit codes: 0 success, 1 validation error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .config import ConfigError, ParsedConfig, parse
from .macsim import run_sim
from .qos import compute_qos, qos_pass
from .scenarios import derive_seed
from .search import InfeasibleTargetError, phase1_min_duty, phase2_select_mf, run_full_search

COMMANDS = ("simulate", "qos", "search", "sweep-duty", "sweep-mf", "table3", "table4", "table5")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NO_CONVERGENCE = 2

OUT_DIR_ENV = "TWTSIM_OUT"


def default_config_text() -> str:
    """The bundled four-client setup."""
    return resources.files("twtsim.configs").joinpath("paper_setup.cfg").read_text()


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _bg_aggregate_mbps(trace) -> float:
    total = sum(nb for fid, nb in trace.delivered_bytes.items() if fid != trace.dut_flow_id)
    return 8 * total / trace.duration_s / 1e6


def cmd_simulate(cfg: ParsedConfig, seed: int, out: Path) -> int:
    scenario = cfg.scenario(seed)
    trace = run_sim(scenario)
    _write_csv(
        out / "deliveries.csv",
        ["time_s", "station", "flow", "bytes"],
        [(t, st, fl, nb) for (t, st, fl, nb) in trace.deliveries],
    )
    _write_csv(
        out / "airtime.csv",
        ["start_s", "end_s", "station"],
        [(a, b, st) for (a, b, st) in trace.airtime],
    )
    _write_csv(
        out / "burst_serve.csv",
        ["burst_index", "serve_start_s", "serve_end_s"],
        [(i, a, b) for (i, a, b) in trace.dut_burst_serve],
    )
    _write_csv(
        out / "cwnd.csv",
        ["time_s", "flow", "cwnd_segments"],
        [(t, fl, w) for (t, fl, w) in trace.cwnd_series],
    )
    sched = None
    for st in scenario.stations:
        if st.twt is not None:
            sched = st.twt.to_dict()
    _write_json(
        out / "summary.json",
        {
            "seed": seed,
            "duration_s": scenario.duration_s,
            "model": cfg.model,
            "twt_schedule": sched,
            "flow_throughput_mbps": {
                fid: trace.flow_throughput_mbps(fid) for fid in sorted(trace.delivered_bytes)
            },
            "delivered_bytes": dict(sorted(trace.delivered_bytes.items())),
            "drops": dict(sorted(trace.drops.items())),
            "collisions": trace.collisions,
        },
    )
    return EXIT_OK


def cmd_qos(cfg: ParsedConfig, seed: int, out: Path) -> int:
    scenario = cfg.scenario(seed)
    trace = run_sim(scenario)
    report = compute_qos(trace, list(scenario.bursts), interval_s=cfg.template.qos_interval_s)
    payload = report.to_dict()
    payload["seed"] = seed
    payload["model"] = cfg.model
    payload["qos_pass"] = qos_pass(
        report, cfg.template.bitrate_mbps, cfg.template.max_underruns
    )
    _write_json(out / "qos_report.json", payload)
    _write_csv(
        out / "instantaneous.csv",
        ["interval_start_s", "throughput_mbps"],
        list(report.instantaneous_mbps),
    )
    return EXIT_OK


def cmd_search(cfg: ParsedConfig, seed: int, out: Path) -> int:
    result = run_full_search(replace(cfg.template, master_seed=seed))
    _write_json(out / "search_result.json", result.to_dict())
    _write_csv(
        out / "phase1_curve.csv",
        ["duty_percent", "mean_throughput_mbps", "std_throughput_mbps"],
        [(p.duty_percent, p.mean_throughput_mbps, p.std_throughput_mbps) for p in result.phase1_curve],
    )
    _write_csv(
        out / "phase2_curve.csv",
        ["mf", "mean_underrun_time_s", "mean_underrun_events", "mean_throughput_cv"],
        [
            (p.mf, p.mean_underrun_time_s, p.mean_underrun_events, p.mean_cv)
            for p in result.phase2_curve
        ],
    )
    _write_csv(
        out / "sessions.csv",
        [
            "model",
            "duty_percent",
            "mf",
            "seed",
            "avg_throughput_mbps",
            "underrun_events",
            "underrun_time_s",
            "throughput_cv",
            "passed",
        ],
        [
            (
                s.model,
                s.duty_percent,
                s.mf,
                s.seed,
                s.report.avg_throughput_mbps,
                s.report.underrun_events,
                s.report.underrun_time_s,
                s.report.throughput_variation,
                s.passed,
            )
            for s in result.sessions
        ],
    )
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_sweep_duty(cfg: ParsedConfig, seed: int, out: Path) -> int:
    template = replace(cfg.template, master_seed=seed)
    try:
        _, curve = phase1_min_duty(template)
    except InfeasibleTargetError as exc:
        # The sweep itself is still useful output; surface the error code.
        _write_json(out / "error.json", {"error": "infeasible-target", "detail": str(exc)})
        return EXIT_NO_CONVERGENCE
    _write_csv(
        out / "duty_sweep.csv",
        ["duty_percent", "mean_throughput_mbps", "std_throughput_mbps"],
        [(p.duty_percent, p.mean_throughput_mbps, p.std_throughput_mbps) for p in curve],
    )
    return EXIT_OK


def cmd_sweep_mf(cfg: ParsedConfig, seed: int, out: Path) -> int:
    template = replace(cfg.template, master_seed=seed)
    _, curve = phase2_select_mf(template, cfg.duty_percent)
    _write_csv(
        out / "mf_sweep.csv",
        ["mf", "mean_underrun_time_s", "mean_underrun_events", "mean_throughput_cv"],
        [(p.mf, p.mean_underrun_time_s, p.mean_underrun_events, p.mean_cv) for p in curve],
    )
    return EXIT_OK


def cmd_table3(cfg: ParsedConfig, seed: int, out: Path) -> int:
    """Aggregate background throughput per iteration: no DUT, DUT without TWT,
    DUT with the configured TWT schedule."""
    template = cfg.template
    rows = []
    cols: dict[str, list[float]] = {"no_dut": [], "twt_off": [], "twt_on": []}
    for i in range(template.seeds):
        s = derive_seed(seed, 30, i)
        no_dut = _bg_aggregate_mbps(run_sim(template.background_only_scenario(s)))
        twt_off = _bg_aggregate_mbps(
            run_sim(template.session_scenario(None, 1, cfg.model, s, loaded=True))
        )
        twt_on = _bg_aggregate_mbps(
            run_sim(
                template.session_scenario(cfg.duty_percent, cfg.mf, cfg.model, s, loaded=True)
            )
        )
        rows.append((i + 1, no_dut, twt_off, twt_on))
        cols["no_dut"].append(no_dut)
        cols["twt_off"].append(twt_off)
        cols["twt_on"].append(twt_on)
    rows.append(
        (
            "mean",
            statistics.fmean(cols["no_dut"]),
            statistics.fmean(cols["twt_off"]),
            statistics.fmean(cols["twt_on"]),
        )
    )
    _write_csv(
        out / "table3.csv",
        [
            "iteration",
            "background_mbps_no_dut",
            "background_mbps_dut_twt_off",
            "background_mbps_dut_twt_on",
        ],
        rows,
    )
    return EXIT_OK


def _qos_rows(cfg: ParsedConfig, model: str, seed: int, phase: int):
    template = cfg.template
    duty = cfg.duty_percent if cfg.twt_enabled else None
    rows = []
    for i in range(template.seeds):
        s = derive_seed(seed, phase, i)
        scenario = template.session_scenario(duty, cfg.mf, model, s, loaded=True)
        report = compute_qos(run_sim(scenario), scenario.bursts, interval_s=template.qos_interval_s)
        rows.append((i + 1, report.avg_throughput_mbps, report.underrun_events))
    return rows


def cmd_table4(cfg: ParsedConfig, seed: int, out: Path) -> int:
    """Per-iteration QoS grid for the configured model and schedule."""
    rows = _qos_rows(cfg, cfg.model, seed, 40)
    mean_q1 = statistics.fmean(r[1] for r in rows)
    mean_q2 = statistics.fmean(r[2] for r in rows)
    rows.append(("mean", mean_q1, mean_q2))
    _write_csv(
        out / "table4.csv",
        ["iteration", "qos1_avg_throughput_mbps", "qos2_underrun_events"],
        rows,
    )
    return EXIT_OK


def cmd_table5(cfg: ParsedConfig, seed: int, out: Path) -> int:
    """CBR-vs-VBR QoS grid at the configured schedule."""
    cbr = _qos_rows(cfg, "cbr", seed, 50)
    vbr = _qos_rows(cfg, "vbr", seed, 51)
    rows = [
        (i + 1, cbr[i][1], cbr[i][2], vbr[i][1], vbr[i][2]) for i in range(len(cbr))
    ]
    rows.append(
        (
            "mean",
            statistics.fmean(r[1] for r in cbr),
            statistics.fmean(r[2] for r in cbr),
            statistics.fmean(r[1] for r in vbr),
            statistics.fmean(r[2] for r in vbr),
        )
    )
    _write_csv(
        out / "table5.csv",
        [
            "iteration",
            "cbr_qos1_avg_throughput_mbps",
            "cbr_qos2_underrun_events",
            "vbr_qos1_avg_throughput_mbps",
            "vbr_qos2_underrun_events",
        ],
        rows,
    )
    return EXIT_OK


_HANDLERS = {
    "simulate": cmd_simulate,
    "qos": cmd_qos,
    "search": cmd_search,
    "sweep-duty": cmd_sweep_duty,
    "sweep-mf": cmd_sweep_mf,
    "table3": cmd_table3,
    "table4": cmd_table4,
    "table5": cmd_table5,
}


def _error_json(kind: str, detail: str, line: int | None = None) -> str:
    payload: dict = {"error": kind, "detail": detail}
    if line is not None:
        payload["line"] = line
    return json.dumps(payload, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="twtsim",
        description="Deterministic Wi-Fi TWT streaming simulator and schedule search.",
    )
    parser.add_argument("--config", help="scenario config path (default: bundled setup)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--out",
        help=f"output directory (default: ./out, or ${OUT_DIR_ENV} when set)",
    )
    parser.add_argument("--command", required=True, choices=COMMANDS)
    args = parser.parse_args(argv)

    try:
        if args.config is None:
            text = default_config_text()
        else:
            path = Path(args.config)
            if not path.is_file():
                print(_error_json("config-not-found", str(path)))
                return EXIT_VALIDATION
            text = path.read_text()
        cfg = parse(text)
    except ConfigError as exc:
        print(_error_json("config", str(exc), exc.line))
        return EXIT_VALIDATION
    except ValueError as exc:
        print(_error_json("validation", str(exc)))
        return EXIT_VALIDATION

    out_dir = args.out or os.environ.get(OUT_DIR_ENV) or "out"
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.seed

    try:
        return _HANDLERS[args.command](cfg, seed, out)
    except InfeasibleTargetError as exc:
        print(_error_json("infeasible-target", str(exc)))
        return EXIT_NO_CONVERGENCE
    except ValueError as exc:
        print(_error_json("validation", str(exc)))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
