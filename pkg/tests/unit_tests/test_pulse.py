import numpy as np
import pytest

from octane.exceptions import WaveformError
from octane.modfmt.builders import build_pm_qpsk
from octane.modfmt.formats import Symbol4DStream, plain_4d, symbols_from_indices
from octane.phy.pulse import matched_filter_downsample, occupied_bandwidth, raised_cosine_response, rrc_shape
from octane.phy.waveform import WaveformGrid

SYMBOL_RATE = 32e9


def rms(a, b):
    return float(np.sqrt(np.mean((a - b) ** 2)))


@pytest.fixture
def stream():
    fmt = plain_4d(build_pm_qpsk())
    return symbols_from_indices(fmt, np.random.default_rng(2).integers(0, 16, size=512))


def test_occupied_bandwidth():
    assert occupied_bandwidth(0.01, 41.79e9) == pytest.approx(42.21e9, abs=0.01e9)


def test_raised_cosine_is_nyquist():
    frequencies = np.linspace(0, SYMBOL_RATE, 1001)
    folded = raised_cosine_response(frequencies, 0.3, SYMBOL_RATE) + raised_cosine_response(
        frequencies - SYMBOL_RATE, 0.3, SYMBOL_RATE
    )
    np.testing.assert_allclose(folded, 1.0, atol=1e-12)


@pytest.mark.parametrize("rolloff, sps", [(0.01, 4), (0.1, 2), (1.0, 8)])
def test_matched_filter_recovers_the_symbols(stream, rolloff, sps):
    waveform = rrc_shape(stream, rolloff, sps, SYMBOL_RATE)
    assert waveform.sample_rate == sps * SYMBOL_RATE
    assert len(waveform) == sps * len(stream)
    received = matched_filter_downsample(waveform, rolloff, sps, SYMBOL_RATE)
    assert rms(received.slots, stream.slots) < 1e-9


def test_single_symbol_has_no_intersymbol_interference():
    slots = np.zeros((64, 4))
    slots[32, 0] = 1.0
    waveform = rrc_shape(Symbol4DStream(slots), 0.2, 4, SYMBOL_RATE)
    received = matched_filter_downsample(waveform, 0.2, 4, SYMBOL_RATE).slots[:, 0]
    assert received[32] == pytest.approx(1.0, abs=1e-9)
    assert np.max(np.abs(np.delete(received, 32))) < 1e-3


def test_waveform_power_is_the_slot_energy(stream):
    waveform = rrc_shape(stream, 0.1, 4, SYMBOL_RATE)
    assert waveform.power() == pytest.approx(stream.mean_energy(), rel=0.05)
    assert waveform.occupied_bandwidth == pytest.approx(1.1 * SYMBOL_RATE)


def test_mismatched_rolloff_leaves_interference(stream):
    waveform = rrc_shape(stream, 0.9, 4, SYMBOL_RATE)
    received = matched_filter_downsample(waveform, 0.1, 4, SYMBOL_RATE)
    assert rms(received.slots, stream.slots) > 1e-3


def test_white_noise_through_the_matched_filter():
    rng = np.random.default_rng(9)
    sps, n = 4, 2**18
    variance = 2.0
    scale = np.sqrt(variance / 2)
    noise = WaveformGrid(
        samples_x=scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
        samples_y=scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
        sample_rate=sps * SYMBOL_RATE,
    )
    received = matched_filter_downsample(noise, 0.1, sps, SYMBOL_RATE)
    x, y = received.to_complex()
    measured = (np.mean(np.abs(x) ** 2) + np.mean(np.abs(y) ** 2)) / 2
    # the raised-cosine noise bandwidth is the symbol rate
    assert measured == pytest.approx(variance / sps, rel=0.02)


class TestChecks:
    def test_rolloff_range(self, stream):
        with pytest.raises(WaveformError):
            rrc_shape(stream, 0.0, 4, SYMBOL_RATE)

    def test_samples_per_symbol(self, stream):
        with pytest.raises(WaveformError):
            rrc_shape(stream, 0.1, 1, SYMBOL_RATE)

    def test_partial_symbol(self, stream):
        waveform = rrc_shape(stream, 0.1, 4, SYMBOL_RATE)
        trimmed = WaveformGrid(waveform.samples_x[:-1], waveform.samples_y[:-1], waveform.sample_rate)
        with pytest.raises(WaveformError):
            matched_filter_downsample(trimmed, 0.1, 4, SYMBOL_RATE)

    def test_sample_rate_must_match(self, stream):
        waveform = rrc_shape(stream, 0.1, 4, SYMBOL_RATE)
        with pytest.raises(WaveformError, match="sample rate"):
            matched_filter_downsample(waveform, 0.1, 4, 2 * SYMBOL_RATE)
