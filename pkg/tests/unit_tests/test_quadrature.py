import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from octane.config import FormatSection
from octane.exceptions import MetricError
from octane.metrics.gmi import gmi_monte_carlo
from octane.metrics.quadrature import block_mi_bound, gmi_reference, mi_reference
from octane.modfmt.builders import build_pm8qam, build_pm_qpsk, build_qpsk
from octane.modfmt.constellation import from_points, int_to_bits
from octane.modfmt.formats import plain_4d
from octane.modfmt.registry import build_format


def bpsk_mi(amplitude: float, sigma2: float) -> float:
    """MI of antipodal signalling by direct integration over the received value."""
    sigma = math.sqrt(sigma2)
    y = np.linspace(amplitude - 14 * sigma, amplitude + 14 * sigma, 400_001)
    density = np.exp(-((y - amplitude) ** 2) / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
    loss = np.logaddexp(0.0, -2 * amplitude * y / sigma2) / math.log(2)
    return 1.0 - float(trapezoid(density * loss, y))


def test_zero_snr_limit():
    assert mi_reference(build_qpsk(), -40.0) <= 0.01
    assert mi_reference(build_pm8qam(), -40.0) <= 0.01


def test_high_snr_limit():
    assert mi_reference(build_qpsk(), 40.0) == pytest.approx(2.0, abs=0.01)
    assert mi_reference(build_pm8qam(), 40.0) == pytest.approx(6.0, abs=0.01)


def test_qpsk_matches_direct_integration():
    snr_db = 5.0
    sigma2 = 1 / (2 * 10 ** (snr_db / 10))
    expected = 2 * bpsk_mi(1 / math.sqrt(2), sigma2)
    assert mi_reference(build_qpsk(), snr_db) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0, 15.0])
def test_gray_pm_qpsk_gmi_equals_mi(snr_db):
    report = gmi_monte_carlo(plain_4d(build_pm_qpsk()), snr_db, n_blocks=100_000, seed=1)
    assert report.gmi == pytest.approx(mi_reference(build_pm_qpsk(), snr_db), abs=0.02)


@pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0, 15.0])
def test_pm8qam_gmi_matches_bit_wise_quadrature(snr_db):
    report = gmi_monte_carlo(plain_4d(build_pm8qam()), snr_db, n_blocks=100_000, seed=1)
    assert report.gmi == pytest.approx(gmi_reference(build_pm8qam(), snr_db), abs=0.02)


def test_gray_qpsk_bit_levels_lose_nothing():
    for snr_db in (0.0, 10.0):
        assert gmi_reference(build_qpsk(), snr_db) == pytest.approx(mi_reference(build_qpsk(), snr_db), abs=1e-6)


def test_pm8qam_labeling_loses_bits_at_low_snr():
    gap = mi_reference(build_pm8qam(), 0.0) - gmi_reference(build_pm8qam(), 0.0)
    assert 0.04 < gap < 0.12


def test_gmi_does_not_exceed_mi():
    report = gmi_monte_carlo(plain_4d(build_pm8qam()), 10.0, n_blocks=20_000, seed=1)
    assert report.gmi <= mi_reference(build_pm8qam(), 10.0) + 2 * report.gmi_std_error + 1e-3


def test_block_bound_of_a_plain_format_is_its_mi():
    assert block_mi_bound(plain_4d(build_pm8qam()), 5.0) == pytest.approx(mi_reference(build_pm8qam(), 5.0))


def test_block_bound_of_a_time_hybrid_sums_its_slots():
    fmt = build_format("th4d-2a8psk", FormatSection(ring_ratio=0.6))
    expected = sum(mi_reference(slot, 5.0) for slot in fmt.slot_constellations())
    assert block_mi_bound(fmt, 5.0) == pytest.approx(expected)
    assert block_mi_bound(fmt, 40.0) == pytest.approx(fmt.bits_per_block, abs=0.01)


FOUR_D_FORMATS = ["pm8qam", "pmqpsk", "4d64prs", "6b4d-2a8psk", "5b4d-2a8psk", "th4d-2a8psk"]
EIGHT_D_FORMATS = ["8d2048prs-t1", "8d2048prs-t2"]


def check_gmi_below_bound(format_id: str, snr_db: float, n_blocks: int):
    fmt = build_format(format_id, FormatSection(ring_ratio=0.6))
    report = gmi_monte_carlo(fmt, snr_db, n_blocks=n_blocks, seed=3)
    assert report.gmi <= block_mi_bound(fmt, snr_db) + 2 * report.gmi_std_error + 1e-3


@pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0, 15.0])
@pytest.mark.parametrize("format_id", FOUR_D_FORMATS)
def test_gmi_below_mi_for_every_4d_format(format_id, snr_db):
    check_gmi_below_bound(format_id, snr_db, n_blocks=20_000)


@pytest.mark.slow
@pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0, 15.0])
@pytest.mark.parametrize("format_id", EIGHT_D_FORMATS)
def test_gmi_below_mi_for_every_8d_format(format_id, snr_db):
    check_gmi_below_bound(format_id, snr_db, n_blocks=20_000)


def test_rejects_unsupported_dimensions():
    rng = np.random.default_rng(0)
    eight_dimensional = from_points("8D", rng.normal(size=(16, 8)), int_to_bits(np.arange(16), 4))
    with pytest.raises(MetricError):
        mi_reference(eight_dimensional, 5.0)
    with pytest.raises(MetricError):
        gmi_reference(eight_dimensional, 5.0)
