import math

import numpy as np
import pytest
from scipy import fft

from octane.exceptions import LinkParameterError, PropagationError
from octane.modfmt.builders import build_pm_qpsk
from octane.modfmt.formats import plain_4d, symbols_from_indices
from octane.phy.fiber import MANAKOV_FACTOR, FiberSpan, beta2_from_dispersion, cd_compensate, ssfm_span
from octane.phy.pulse import rrc_shape
from octane.phy.waveform import DEFAULT_CENTER_FREQUENCY, WaveformGrid, dbm_to_watt
from octane.phy.wdm import wdm_mux


def qpsk_waveform(power_w: float = 1e-3, n_symbols: int = 256) -> WaveformGrid:
    fmt = plain_4d(build_pm_qpsk())
    symbols = symbols_from_indices(fmt, np.random.default_rng(5).integers(0, 16, size=n_symbols))
    waveform = rrc_shape(symbols, 0.1, 4, 32e9)
    return waveform.scaled(math.sqrt(power_w / waveform.power()))


def relative_rms(a: WaveformGrid, b: WaveformGrid) -> float:
    error = np.abs(a.samples_x - b.samples_x) ** 2 + np.abs(a.samples_y - b.samples_y) ** 2
    return float(np.sqrt(np.mean(error) / b.power()))


def qpsk_comb(channel_power_dbm: float, n_channels: int = 3, n_symbols: int = 1024) -> WaveformGrid:
    fmt = plain_4d(build_pm_qpsk())
    channels = []
    for seed in range(n_channels):
        symbols = symbols_from_indices(fmt, np.random.default_rng(seed).integers(0, 16, size=n_symbols))
        waveform = rrc_shape(symbols, 0.1, 8, 32e9)
        channels.append(waveform.scaled(math.sqrt(dbm_to_watt(channel_power_dbm) / waveform.power())))
    return wdm_mux(channels, 50e9, [0] * n_channels)


def test_beta2_of_standard_fibre():
    # D = 17 ps/(nm km) at 1550 nm is about -21.7 ps^2/km
    beta2 = beta2_from_dispersion(17.0, DEFAULT_CENTER_FREQUENCY)
    assert beta2 * 1e27 == pytest.approx(-21.7, abs=0.1)


class TestSteps:
    def test_whole_steps(self):
        steps = FiberSpan(length_km=75.0, step_km=0.1).steps_m()
        assert len(steps) == 750
        assert steps[0] == pytest.approx(100.0)

    def test_partial_last_step(self):
        steps = FiberSpan(length_km=1.0, step_km=0.3).steps_m()
        assert steps == pytest.approx([300.0, 300.0, 300.0, 100.0])

    @pytest.mark.parametrize("length_km, step_km", [(0.0, 0.1), (10.0, 0.0), (10.0, 20.0)])
    def test_invalid_geometry(self, length_km, step_km):
        with pytest.raises(LinkParameterError):
            FiberSpan(length_km=length_km, step_km=step_km)

    def test_negative_loss(self):
        with pytest.raises(LinkParameterError):
            FiberSpan(length_km=10.0, alpha_db_per_km=-0.1)


def test_continuous_wave_nonlinear_phase():
    power = 1e-2
    n = 64
    cw = WaveformGrid(
        samples_x=np.full(n, math.sqrt(power / 2), dtype=np.complex128),
        samples_y=np.full(n, math.sqrt(power / 2), dtype=np.complex128),
        sample_rate=100e9,
    )
    span = FiberSpan(length_km=10.0, alpha_db_per_km=0.0, dispersion_ps_nm_km=0.0, gamma_per_w_km=1.3, step_km=1.0)
    out = ssfm_span(cw, span)
    expected = MANAKOV_FACTOR * 1.3e-3 * power * 10e3
    np.testing.assert_allclose(np.angle(out.samples_x / cw.samples_x), expected, atol=1e-9)
    np.testing.assert_allclose(np.angle(out.samples_y / cw.samples_y), expected, atol=1e-9)
    np.testing.assert_allclose(np.abs(out.samples_x), np.abs(cw.samples_x), rtol=1e-9)


def test_gaussian_pulse_broadening():
    sample_rate, n = 200e9, 2048
    t0 = 20e-12
    t = (np.arange(n) - n / 2) / sample_rate
    pulse = np.exp(-(t**2) / (2 * t0**2)).astype(np.complex128)
    waveform = WaveformGrid(samples_x=pulse, samples_y=np.zeros(n, dtype=np.complex128), sample_rate=sample_rate)
    span = FiberSpan(length_km=30.0, alpha_db_per_km=0.0, dispersion_ps_nm_km=17.0, gamma_per_w_km=0.0, step_km=30.0)
    out = ssfm_span(waveform, span)

    np.testing.assert_allclose(np.abs(fft.fft(out.samples_x)), np.abs(fft.fft(pulse)), rtol=1e-9, atol=1e-9)
    intensity = np.abs(out.samples_x) ** 2
    measured = math.sqrt(2 * np.sum(t**2 * intensity) / np.sum(intensity))
    beta2 = beta2_from_dispersion(17.0, waveform.center_frequency)
    expected = t0 * math.sqrt(1 + (beta2 * 30e3 / t0**2) ** 2)
    assert measured == pytest.approx(expected, rel=1e-3)


def test_loss_only():
    waveform = qpsk_waveform()
    span = FiberSpan(length_km=75.0, alpha_db_per_km=0.2, dispersion_ps_nm_km=0.0, gamma_per_w_km=0.0, step_km=1.0)
    out = ssfm_span(waveform, span)
    assert 10 * math.log10(out.power() / waveform.power()) == pytest.approx(-15.0, abs=1e-9)


def test_dispersion_compensation_is_exact():
    waveform = qpsk_waveform()
    span = FiberSpan(length_km=100.0, alpha_db_per_km=0.0, dispersion_ps_nm_km=17.0, gamma_per_w_km=0.0, step_km=10.0)
    dispersed = ssfm_span(waveform, span)
    assert relative_rms(dispersed, waveform) > 0.1
    assert relative_rms(cd_compensate(dispersed, span.accumulated_dispersion_ps_nm), waveform) < 1e-6


def test_zero_dispersion_compensation_is_identity():
    waveform = qpsk_waveform()
    assert cd_compensate(waveform, 0.0) is waveform


def test_halving_the_step_converges():
    waveform = qpsk_waveform(power_w=3e-3)
    coarse = ssfm_span(waveform, FiberSpan(length_km=20.0, step_km=1.0))
    fine = ssfm_span(waveform, FiberSpan(length_km=20.0, step_km=0.5))
    assert relative_rms(coarse, fine) < 1e-3


def test_non_finite_field():
    waveform = qpsk_waveform()
    samples_x = waveform.samples_x.copy()
    samples_x[3] = np.inf
    broken = waveform.with_samples(samples_x, waveform.samples_y)
    with pytest.raises(PropagationError):
        ssfm_span(broken, FiberSpan(length_km=1.0, step_km=0.5))


def test_halving_the_step_on_a_comb_converges():
    comb = qpsk_comb(0.0)
    coarse, medium, fine = (ssfm_span(comb, FiberSpan(length_km=10.0, step_km=step)) for step in (0.2, 0.1, 0.05))
    assert relative_rms(coarse, medium) < 1e-3
    assert relative_rms(medium, fine) < 2.5e-4


def test_without_nonlinearity_the_span_is_linear():
    span = FiberSpan(length_km=40.0, gamma_per_w_km=0.0, step_km=5.0)
    a = qpsk_waveform(power_w=1e-2, n_symbols=512)
    b = a.with_samples(np.roll(a.samples_y, 37), np.roll(a.samples_x, 11)).scaled(0.1)
    combined = a.with_samples(0.7 * a.samples_x + 2j * b.samples_x, 0.7 * a.samples_y + 2j * b.samples_y)

    out_a, out_b, out = ssfm_span(a, span), ssfm_span(b, span), ssfm_span(combined, span)
    expected_x = 0.7 * out_a.samples_x + 2j * out_b.samples_x
    expected_y = 0.7 * out_a.samples_y + 2j * out_b.samples_y
    scale = np.max(np.abs(expected_x))
    np.testing.assert_allclose(out.samples_x, expected_x, rtol=1e-9, atol=1e-9 * scale)
    np.testing.assert_allclose(out.samples_y, expected_y, rtol=1e-9, atol=1e-9 * scale)


def test_lossless_span_conserves_energy():
    comb = qpsk_comb(6.0)
    span = FiberSpan(length_km=80.0, alpha_db_per_km=0.0, gamma_per_w_km=1.3, step_km=0.5)
    out = ssfm_span(comb, span)
    assert out.energy() == pytest.approx(comb.energy(), rel=1e-9)
    assert relative_rms(out, comb) > 0.1
