import logging
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import fft

from octane.exceptions import GridCapacityError, WaveformError
from octane.phy.waveform import WaveformGrid

log = logging.getLogger(__name__)


def channel_offsets(n_channels: int, spacing: float) -> NDArray[np.float64]:
    """Grid offsets (Hz) of `n_channels` slots, the centre channel (index n // 2) at zero."""
    return (np.arange(n_channels) - n_channels // 2) * spacing


def _offset_bins(offset: float, waveform: WaveformGrid) -> int:
    resolution = waveform.sample_rate / len(waveform)
    bins = int(round(offset / resolution))
    if abs(bins * resolution - offset) > 1e-9 * resolution:
        log.warning(
            "Frequency offset %.6g Hz rounded to %.6g Hz to stay on the %.6g Hz grid",
            offset,
            bins * resolution,
            resolution,
        )
    return bins


def _check_band(offset: float, bandwidth: float, sample_rate: float) -> None:
    if abs(offset) + bandwidth / 2 > sample_rate / 2:
        raise GridCapacityError(
            f"band at {offset:.6g} Hz with {bandwidth:.6g} Hz width exceeds the +/-{sample_rate / 2:.6g} Hz grid"
        )


def wdm_mux(
    channels: Sequence[WaveformGrid],
    spacing: float,
    decorrelation_delays: Sequence[int],
) -> WaveformGrid:
    """Delay each channel circularly, shift it to its grid slot and sum the fields per polarisation."""
    if not channels:
        raise WaveformError("at least one channel is needed")
    if len(decorrelation_delays) != len(channels):
        raise WaveformError(f"{len(channels)} channels but {len(decorrelation_delays)} delays")
    reference = channels[0]
    for channel in channels[1:]:
        if channel.sample_rate != reference.sample_rate or len(channel) != len(reference):
            raise WaveformError("all channels must share sample rate and length")

    offsets = channel_offsets(len(channels), spacing)
    bandwidth = max(channel.occupied_bandwidth for channel in channels)
    for offset in offsets:
        _check_band(float(offset), bandwidth, reference.sample_rate)

    spectrum_x = np.zeros(len(reference), dtype=np.complex128)
    spectrum_y = np.zeros(len(reference), dtype=np.complex128)
    for channel, offset, delay in zip(channels, offsets, decorrelation_delays):
        bins = _offset_bins(float(offset), reference)
        x = np.roll(channel.samples_x, int(delay))
        y = np.roll(channel.samples_y, int(delay))
        spectrum_x += np.roll(fft.fft(x), bins)
        spectrum_y += np.roll(fft.fft(y), bins)

    return WaveformGrid(
        samples_x=fft.ifft(spectrum_x),
        samples_y=fft.ifft(spectrum_y),
        sample_rate=reference.sample_rate,
        center_frequency=reference.center_frequency,
        occupied_bandwidth=min(float(np.ptp(offsets)) + bandwidth, np.nextafter(reference.sample_rate, 0)),
    )


def channel_select(waveform: WaveformGrid, offset: float, bandwidth: float) -> WaveformGrid:
    """Bring the slot at `offset` to baseband and keep |f| <= bandwidth / 2 (ideal brick wall)."""
    if not bandwidth > 0:
        raise WaveformError(f"bandwidth must be positive, got {bandwidth}")
    _check_band(offset, bandwidth, waveform.sample_rate)
    bins = _offset_bins(offset, waveform)
    frequencies = fft.fftfreq(len(waveform), d=1.0 / waveform.sample_rate)
    passband = np.abs(frequencies) <= bandwidth / 2

    selected = []
    for samples in (waveform.samples_x, waveform.samples_y):
        spectrum = np.roll(fft.fft(samples), -bins)
        selected.append(fft.ifft(np.where(passband, spectrum, 0)))
    return waveform.with_samples(
        selected[0],
        selected[1],
        center_frequency=waveform.center_frequency + bins * waveform.sample_rate / len(waveform),
        occupied_bandwidth=min(bandwidth, waveform.occupied_bandwidth or bandwidth),
    )
