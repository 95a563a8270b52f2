import math

import numpy as np
from numpy.typing import NDArray
from scipy import fft

from octane.exceptions import WaveformError
from octane.modfmt.formats import Symbol4DStream
from octane.phy.waveform import DEFAULT_CENTER_FREQUENCY, WaveformGrid

RATE_TOLERANCE = 1e-9


def occupied_bandwidth(rolloff: float, symbol_rate: float) -> float:
    return (1 + rolloff) * symbol_rate


def _check_shaping(rolloff: float, samples_per_symbol: int, symbol_rate: float) -> None:
    if not 0 < rolloff <= 1:
        raise WaveformError(f"roll-off must lie in (0, 1], got {rolloff}")
    if int(samples_per_symbol) != samples_per_symbol or samples_per_symbol < 2:
        raise WaveformError(f"samples per symbol must be an integer >= 2, got {samples_per_symbol}")
    if not symbol_rate > 0:
        raise WaveformError(f"symbol rate must be positive, got {symbol_rate}")


def raised_cosine_response(frequencies: NDArray[np.float64], rolloff: float, symbol_rate: float) -> NDArray[np.float64]:
    """Raised-cosine transfer function with unit passband gain."""
    f = np.abs(frequencies)
    f1 = (1 - rolloff) * symbol_rate / 2
    f2 = (1 + rolloff) * symbol_rate / 2
    response = np.zeros_like(f)
    response[f <= f1] = 1.0
    edge = (f > f1) & (f <= f2)
    response[edge] = 0.5 * (1 + np.cos(math.pi / (rolloff * symbol_rate) * (f[edge] - f1)))
    return response


def rrc_response(n_samples: int, sample_rate: float, rolloff: float, symbol_rate: float) -> NDArray[np.float64]:
    """Root-raised-cosine response on the FFT bins of an `n_samples` circular grid."""
    return np.sqrt(raised_cosine_response(fft.fftfreq(n_samples, d=1.0 / sample_rate), rolloff, symbol_rate))


def rrc_shape(
    symbols: Symbol4DStream,
    rolloff: float,
    samples_per_symbol: int,
    symbol_rate: float,
    center_frequency: float = DEFAULT_CENTER_FREQUENCY,
) -> WaveformGrid:
    """Upsample and RRC-filter a symbol stream over the whole (circular) sequence.

    Symbols are zero-stuffed with weight `samples_per_symbol`, so the waveform power equals the
    mean slot energy and matched filtering returns the symbols themselves.
    """
    _check_shaping(rolloff, samples_per_symbol, symbol_rate)
    sps = int(samples_per_symbol)
    sample_rate = sps * symbol_rate
    x, y = symbols.to_complex()
    response = rrc_response(sps * len(symbols), sample_rate, rolloff, symbol_rate)

    shaped = []
    for pol in (x, y):
        upsampled = np.zeros(sps * pol.size, dtype=np.complex128)
        upsampled[::sps] = sps * pol
        shaped.append(fft.ifft(fft.fft(upsampled) * response))
    return WaveformGrid(
        samples_x=shaped[0],
        samples_y=shaped[1],
        sample_rate=sample_rate,
        center_frequency=center_frequency,
        occupied_bandwidth=occupied_bandwidth(rolloff, symbol_rate),
    )


def matched_filter_downsample(
    waveform: WaveformGrid,
    rolloff: float,
    samples_per_symbol: int,
    symbol_rate: float,
) -> Symbol4DStream:
    """Filter with the (real, even) RRC response and sample at the symbol instants."""
    _check_shaping(rolloff, samples_per_symbol, symbol_rate)
    sps = int(samples_per_symbol)
    if len(waveform) % sps:
        raise WaveformError(f"{len(waveform)} samples do not hold a whole number of {sps}-sample symbols")
    if abs(waveform.sample_rate - sps * symbol_rate) > RATE_TOLERANCE * waveform.sample_rate:
        raise WaveformError(
            f"sample rate {waveform.sample_rate:.6g} Hz does not match {sps} x {symbol_rate:.6g} Bd"
        )
    response = rrc_response(len(waveform), waveform.sample_rate, rolloff, symbol_rate)
    x = fft.ifft(fft.fft(waveform.samples_x) * response)[::sps]
    y = fft.ifft(fft.fft(waveform.samples_y) * response)[::sps]
    return Symbol4DStream.from_complex(x, y)
