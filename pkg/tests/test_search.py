import pytest

from twtsim import (
    InfeasibleTargetError,
    MacParams,
    ScenarioTemplate,
    Station,
    VideoParams,
    derive_seed,
    phase1_min_duty,
    phase2_select_mf,
    phase3_validate,
    run_full_search,
)


def small_template(bitrate=10.0, seeds=2) -> ScenarioTemplate:
    return ScenarioTemplate(
        stations=(
            Station(id="ap", role="ap", phy_rate_mbps=1000.0),
            Station(id="bg1", role="client", phy_rate_mbps=120.0),
            Station(id="dut", role="client", phy_rate_mbps=100.0),
        ),
        dut="dut",
        video=VideoParams(bitrate_mbps=bitrate),
        background=(("bg1", 4),),
        mac=MacParams(),
        seeds=seeds,
        master_seed=7,
        phase1_duration_s=6.0,
        session_duration_s=24.0,
    )


def test_derive_seed_is_stable_and_sensitive():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
    assert derive_seed(1, 2, 3) != derive_seed(3, 2, 1)


def test_phase1_returns_smallest_sufficient_duty():
    duty, curve = phase1_min_duty(small_template())
    assert len(curve) == 20
    assert [p.duty_percent for p in curve] == list(range(5, 101, 5))
    chosen = next(p for p in curve if p.duty_percent == duty)
    assert chosen.mean_throughput_mbps >= 10.0
    for p in curve:
        if p.duty_percent < duty:
            assert p.mean_throughput_mbps < 10.0


def test_phase1_curve_grows_with_duty():
    _, curve = phase1_min_duty(small_template())
    means = [p.mean_throughput_mbps for p in curve]
    # allow small local noise but demand overall growth
    assert means[-1] > means[0] * 3
    decreases = sum(1 for a, b in zip(means, means[1:]) if b < a - 0.5)
    assert decreases == 0


def test_phase1_unreachable_target_raises():
    with pytest.raises(InfeasibleTargetError):
        phase1_min_duty(small_template(bitrate=500.0))


def test_phase2_curve_stops_after_first_degradation():
    tpl = small_template()
    duty, _ = phase1_min_duty(tpl)
    mf, curve = phase2_select_mf(tpl, duty)
    mfs = [p.mf for p in curve]
    assert mfs == [2**i for i in range(len(mfs))]
    times = [p.mean_underrun_time_s for p in curve]
    for a, b in zip(times[:-2], times[1:-1]):
        assert b < a  # every kept step strictly improved
    if len(times) > 1 and times[-1] >= times[-2]:
        assert mf == mfs[-2]
    else:
        assert mf == mfs[-1]


def test_phase3_steps_duty_until_all_sessions_pass():
    tpl = small_template()
    duty, records = phase3_validate(tpl, 20, 2, "cbr")
    assert records
    assert all(r.model == "cbr" and r.mf == 2 for r in records)
    if duty is not None:
        final = [r for r in records if r.duty_percent == duty]
        assert len(final) == tpl.seeds
        assert all(r.passed for r in final)
        tried = sorted({r.duty_percent for r in records})
        assert tried == list(range(20, duty + 1, 5))


def test_full_search_converges_and_reports_everything():
    res = run_full_search(small_template())
    assert res.converged
    assert res.duty_percent is not None and res.duty_percent >= res.phase1_duty_percent
    assert res.mf >= 1
    assert res.schedule is not None
    from twtsim import duty_cycle

    assert abs(duty_cycle(res.schedule) - res.duty_percent) <= 0.5
    cbr = res.sessions_for("cbr")
    vbr = res.sessions_for("vbr")
    assert len(vbr) == 2
    assert all(s.duty_percent == res.duty_percent for s in vbr)
    final_cbr = [s for s in cbr if s.duty_percent == res.duty_percent]
    assert all(s.passed for s in final_cbr)
    d = res.to_dict()
    assert d["converged"] is True
    assert len(d["phase1_curve"]) == 20
    assert d["schedule"]["sp_us"] == res.schedule.sp_us


def test_search_is_deterministic():
    a = run_full_search(small_template())
    b = run_full_search(small_template())
    assert a.to_dict() == b.to_dict()
