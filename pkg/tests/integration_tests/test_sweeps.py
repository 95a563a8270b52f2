import numpy as np
import pytest

from octane.config import SweepConfig, apply_overrides, load_profile
from octane.enums import SweepAxis
from octane.exceptions import FormatError, SweepError
from octane.metrics.gmi import gmi_monte_carlo
from octane.modfmt.registry import build_format
from octane.phy.link import center_frequency_of, link_from_section, linear_snr_db
from octane.sim.chain import run_distances
from octane.sim.reach import (
    compare_reach,
    crossing_points,
    crossing_tolerance,
    ngmi_gap,
    optimum_launch_power,
)
from octane.sim.results import config_from_metadata, read_sweep_csv
from octane.sim.sweeps import awgn_sweep, launch_power_sweep, plan_tasks, reach_sweep

TINY_LINK = [
    "formats=pmqpsk",
    "channels=1",
    "n_symbols=1024",
    "step_km=5",
    "launch_power_dbm=0",
    "distance_spans_points=0,1,2",
    "launch_power_dbm_points=-2,0",
    "n_spans=2",
]


def tiny_awgn(*overrides: str) -> SweepConfig:
    config = apply_overrides(SweepConfig(), ["formats=pmqpsk", "n_blocks=1000", "snr_db_points=5", *overrides])
    return config.with_axis(SweepAxis.SNR_DB)


def test_single_awgn_row():
    result = awgn_sweep(tiny_awgn())
    assert len(result.rows) == 1
    row = result.rows[0]
    assert (row.format, row.axis_name, row.axis_value, row.n_blocks, row.seed) == ("pmqpsk", "snr_db", 5.0, 1000, 1)
    assert 0 < row.ngmi < 1
    assert result.metadata["axis"] == "snr_db"


def test_axis_must_match_the_sweep():
    with pytest.raises(SweepError):
        reach_sweep(tiny_awgn())


def test_unknown_format_fails_before_any_work():
    with pytest.raises(FormatError):
        awgn_sweep(tiny_awgn("formats=pmqpsk,pm16qam"))


def test_plan_has_one_task_per_awgn_point():
    config = tiny_awgn("formats=pmqpsk,pm8qam", "snr_db_points=0,5,10")
    assert len(plan_tasks(config)) == 6


def test_workers_do_not_change_the_result():
    config = tiny_awgn("formats=pmqpsk,pm8qam", "snr_db_points=0,6")
    serial = awgn_sweep(config, workers=1)
    parallel = awgn_sweep(config, workers=2)
    assert serial.to_csv() == parallel.to_csv()
    assert [row.format for row in serial.rows] == ["pmqpsk", "pmqpsk", "pm8qam", "pm8qam"]


def test_rerun_from_metadata():
    result = awgn_sweep(tiny_awgn("seed=11"))
    restored = config_from_metadata(read_sweep_csv(result.to_csv()))
    assert awgn_sweep(restored).to_csv() == result.to_csv()


def test_tiny_reach_sweep():
    config = apply_overrides(SweepConfig(), TINY_LINK).with_axis(SweepAxis.DISTANCE_SPANS)
    assert len(plan_tasks(config)) == 1
    result = reach_sweep(config)
    assert [row.axis_value for row in result.rows] == [0.0, 1.0, 2.0]
    back_to_back = result.rows[0]
    assert back_to_back.ngmi > 0.99
    assert all(0 <= row.ngmi <= 1 for row in result.rows)


def test_tiny_power_sweep():
    config = apply_overrides(SweepConfig(), TINY_LINK).with_axis(SweepAxis.LAUNCH_POWER_DBM)
    result = launch_power_sweep(config)
    assert [row.axis_value for row in result.rows] == [-2.0, 0.0]
    assert all(row.axis_name == "launch_power_dbm" for row in result.rows)


@pytest.mark.slow
def test_linear_regime_chain_matches_awgn():
    config = apply_overrides(
        SweepConfig(),
        ["channels=1", "n_symbols=32768", "step_km=75", "launch_power_dbm=-32", "n_spans=126"],
    )
    fmt = build_format("pm8qam")
    span_counts = [42, 126]
    reports = run_distances(fmt, config, span_counts)
    for n, report in zip(span_counts, reports):
        link = link_from_section(config.link, n_spans=n)
        snr_db = linear_snr_db(link, 1, config.sweep.symbol_rate_gbd * 1e9, center_frequency_of(config.link))
        assert report.snr_db == pytest.approx(snr_db, abs=0.3)
        assert report.ngmi == pytest.approx(gmi_monte_carlo(fmt, snr_db, n_blocks=100_000).ngmi, abs=0.02)


@pytest.mark.slow
def test_parity_types_cross_once_near_the_threshold():
    config = apply_overrides(
        SweepConfig(), ["formats=8d2048prs-t1,8d2048prs-t2", "n_blocks=20000"]
    ).with_axis(SweepAxis.SNR_DB)
    result = awgn_sweep(config, workers=4)
    axis, t1 = result.curve("8d2048prs-t1")
    _, t2 = result.curve("8d2048prs-t2")
    tolerance = crossing_tolerance(result, "8d2048prs-t1", "8d2048prs-t2")
    assert np.all((tolerance > 0) & (tolerance < 0.01))
    crossings = crossing_points(axis, t1, t2, tolerance=tolerance)
    assert len(crossings) == 1
    assert 0.82 <= crossings[0][1] <= 0.88


@pytest.mark.slow
def test_desk_reach_ordering():
    config = load_profile("desk").with_axis(SweepAxis.DISTANCE_SPANS)
    result = reach_sweep(config, workers=4)
    reach = {c.format: c for c in compare_reach(result, "pm8qam", 0.85)}
    for parity in ("8d2048prs-t1", "8d2048prs-t2"):
        assert 20 <= reach[parity].gain_percent <= 40
        assert reach[parity].reach_km >= reach["th4d-2a8psk"].reach_km
    assert reach["th4d-2a8psk"].reach_km > reach["pm8qam"].reach_km


@pytest.mark.slow
def test_desk_gain_grows_above_the_optimum_power():
    config = apply_overrides(
        load_profile("desk"), ["formats=pm8qam,8d2048prs-t2"]
    ).with_axis(SweepAxis.LAUNCH_POWER_DBM)
    result = launch_power_sweep(config, workers=4)
    powers, ngmi = result.curve("8d2048prs-t2")
    optimum = optimum_launch_power(powers, ngmi).power_dbm
    above = ngmi_gap(result, "8d2048prs-t2", "pm8qam", optimum + 2)
    below = ngmi_gap(result, "8d2048prs-t2", "pm8qam", optimum - 6)
    assert above > below
