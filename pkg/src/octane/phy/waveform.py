import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft
from scipy.constants import c as SPEED_OF_LIGHT

from octane.exceptions import GridCapacityError, WaveformError

log = logging.getLogger(__name__)

DEFAULT_WAVELENGTH_NM = 1550.116


def frequency_from_wavelength(wavelength_nm: float) -> float:
    return SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


DEFAULT_CENTER_FREQUENCY = frequency_from_wavelength(DEFAULT_WAVELENGTH_NM)


def dbm_to_watt(power_dbm: float) -> float:
    return 1e-3 * 10 ** (power_dbm / 10)


def watt_to_dbm(power_w: float) -> float:
    return 10 * math.log10(power_w / 1e-3)


@dataclass(frozen=True, eq=False)
class WaveformGrid:
    """Dual-polarisation complex envelope in sqrt(W), sampled at `sample_rate` Hz.

    `occupied_bandwidth` (Hz) is the two-sided width of the signal spectrum; zero means unknown.
    """

    samples_x: NDArray[np.complex128]
    samples_y: NDArray[np.complex128]
    sample_rate: float
    center_frequency: float = DEFAULT_CENTER_FREQUENCY
    occupied_bandwidth: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples_x, dtype=np.complex128)
        y = np.asarray(self.samples_y, dtype=np.complex128)
        if x.ndim != 1 or x.shape != y.shape:
            raise WaveformError(f"polarisation sample arrays must be 1D of equal length, got {x.shape} and {y.shape}")
        if not self.sample_rate > 0:
            raise WaveformError(f"sample rate must be positive, got {self.sample_rate}")
        if self.occupied_bandwidth < 0:
            raise WaveformError(f"occupied bandwidth must be non-negative, got {self.occupied_bandwidth}")
        if self.occupied_bandwidth >= self.sample_rate:
            raise GridCapacityError(
                f"sample rate {self.sample_rate:.6g} Hz does not exceed the occupied bandwidth "
                f"{self.occupied_bandwidth:.6g} Hz"
            )
        object.__setattr__(self, "samples_x", x)
        object.__setattr__(self, "samples_y", y)

    def __len__(self) -> int:
        return int(self.samples_x.size)

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples_x) ** 2 + np.abs(self.samples_y) ** 2))

    def energy(self) -> float:
        return self.power() * len(self) / self.sample_rate

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples_x)) and np.all(np.isfinite(self.samples_y)))

    def with_samples(self, samples_x: ArrayLike, samples_y: ArrayLike, **changes) -> "WaveformGrid":
        return replace(self, samples_x=samples_x, samples_y=samples_y, **changes)

    def scaled(self, factor: complex) -> "WaveformGrid":
        return self.with_samples(self.samples_x * factor, self.samples_y * factor)

    def angular_frequencies(self) -> NDArray[np.float64]:
        """Baseband angular frequency (rad/s) of every FFT bin, in FFT order."""
        return 2 * np.pi * fft.fftfreq(len(self), d=1.0 / self.sample_rate)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".txt")


def write_waveform(waveform: WaveformGrid, path: Union[str, Path]) -> None:
    """Write interleaved little-endian complex64 samples (x, y per instant) plus a text sidecar."""
    path = Path(path)
    interleaved = np.empty(2 * len(waveform), dtype="<c8")
    interleaved[0::2] = waveform.samples_x
    interleaved[1::2] = waveform.samples_y
    interleaved.tofile(path)
    _sidecar(path).write_text(
        f"sample_rate={waveform.sample_rate!r} center_frequency={waveform.center_frequency!r} "
        f"occupied_bandwidth={waveform.occupied_bandwidth!r}\n"
    )
    log.debug("Wrote %d samples to %s", len(waveform), path)


def read_waveform(path: Union[str, Path]) -> WaveformGrid:
    path = Path(path)
    sidecar = _sidecar(path)
    if not path.is_file() or not sidecar.is_file():
        raise WaveformError(f"waveform dump or sidecar not found: {path}")
    fields = {}
    for token in sidecar.read_text().split():
        key, _, value = token.partition("=")
        fields[key] = float(value)
    if "sample_rate" not in fields or "center_frequency" not in fields:
        raise WaveformError(f"{sidecar}: sidecar must carry sample_rate and center_frequency")
    interleaved = np.fromfile(path, dtype="<c8")
    if interleaved.size % 2:
        raise WaveformError(f"{path}: odd number of complex samples")
    return WaveformGrid(
        samples_x=interleaved[0::2].astype(np.complex128),
        samples_y=interleaved[1::2].astype(np.complex128),
        sample_rate=fields["sample_rate"],
        center_frequency=fields["center_frequency"],
        occupied_bandwidth=fields.get("occupied_bandwidth", 0.0),
    )
