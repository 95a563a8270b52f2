import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import fft
from scipy.constants import c as SPEED_OF_LIGHT

from octane.exceptions import LinkParameterError, PropagationError, WaveformError
from octane.phy.waveform import WaveformGrid

log = logging.getLogger(__name__)

MANAKOV_FACTOR = 8 / 9
STEP_TOLERANCE = 1e-9


def beta2_from_dispersion(dispersion_ps_nm_km: float, center_frequency: float) -> float:
    """Group-velocity dispersion beta2 (s^2/m) from D (ps/(nm km)) at `center_frequency` (Hz)."""
    wavelength = SPEED_OF_LIGHT / center_frequency
    dispersion = dispersion_ps_nm_km * 1e-6  # s/m^2
    return -dispersion * wavelength**2 / (2 * math.pi * SPEED_OF_LIGHT)


def db_to_neper_power(alpha_db_per_km: float) -> float:
    """Power attenuation coefficient in 1/m."""
    return alpha_db_per_km * math.log(10) / 10 / 1e3


@dataclass(frozen=True)
class FiberSpan:
    length_km: float
    alpha_db_per_km: float = 0.2
    dispersion_ps_nm_km: float = 17.0
    gamma_per_w_km: float = 1.3
    step_km: float = 0.1

    def __post_init__(self):
        if not self.length_km > 0:
            raise LinkParameterError(f"span length must be positive, got {self.length_km}")
        if not 0 < self.step_km <= self.length_km:
            raise LinkParameterError(f"step must lie in (0, {self.length_km}] km, got {self.step_km}")
        if self.alpha_db_per_km < 0 or self.gamma_per_w_km < 0:
            raise LinkParameterError("attenuation and nonlinearity coefficients must be non-negative")
        if not math.isfinite(self.dispersion_ps_nm_km):
            raise LinkParameterError(f"dispersion must be finite, got {self.dispersion_ps_nm_km}")

    @property
    def loss_db(self) -> float:
        return self.alpha_db_per_km * self.length_km

    @property
    def accumulated_dispersion_ps_nm(self) -> float:
        return self.dispersion_ps_nm_km * self.length_km

    def steps_m(self) -> list[float]:
        """Step sizes in metres: whole steps, then a partial last step if the length is not a multiple."""
        ratio = self.length_km / self.step_km
        n_full = round(ratio) if abs(ratio - round(ratio)) < STEP_TOLERANCE * ratio else math.floor(ratio)
        steps = [self.step_km * 1e3] * n_full
        remainder = self.length_km - n_full * self.step_km
        if remainder > STEP_TOLERANCE * self.length_km:
            steps.append(remainder * 1e3)
        return steps


def _linear_operator(waveform: WaveformGrid, beta2: float, alpha: float) -> NDArray[np.complex128]:
    """Per-metre exponent of the linear step: exp((j beta2/2 w^2 - alpha/2) h)."""
    omega = waveform.angular_frequencies()
    return 0.5j * beta2 * omega**2 - alpha / 2


def ssfm_span(waveform: WaveformGrid, span: FiberSpan) -> WaveformGrid:
    """Symmetric split-step solution of the Manakov equation over one span.

    Linear half-steps (dispersion and loss) are applied in the frequency domain around a full
    nonlinear step in the time domain; consecutive half-steps are merged.
    """
    beta2 = beta2_from_dispersion(span.dispersion_ps_nm_km, waveform.center_frequency)
    alpha = db_to_neper_power(span.alpha_db_per_km)
    gamma = span.gamma_per_w_km / 1e3
    linear = _linear_operator(waveform, beta2, alpha)
    steps = span.steps_m()

    spectrum_x = fft.fft(waveform.samples_x)
    spectrum_y = fft.fft(waveform.samples_y)
    for i, h in enumerate(steps):
        # half step into this step, plus the half step out of the previous one
        dz = h / 2 if i == 0 else (steps[i - 1] + h) / 2
        propagator = np.exp(linear * dz)
        x = fft.ifft(spectrum_x * propagator)
        y = fft.ifft(spectrum_y * propagator)
        if gamma:
            phase = np.exp(1j * MANAKOV_FACTOR * gamma * (np.abs(x) ** 2 + np.abs(y) ** 2) * h)
            x *= phase
            y *= phase
        spectrum_x = fft.fft(x)
        spectrum_y = fft.fft(y)
    propagator = np.exp(linear * steps[-1] / 2)
    out = waveform.with_samples(fft.ifft(spectrum_x * propagator), fft.ifft(spectrum_y * propagator))
    if not out.is_finite():
        raise PropagationError(f"field became non-finite within a {span.length_km} km span")
    return out


def cd_compensate(waveform: WaveformGrid, total_dispersion_ps_per_nm: float) -> WaveformGrid:
    """Undo `total_dispersion_ps_per_nm` of accumulated dispersion with the exact all-pass inverse."""
    if not math.isfinite(total_dispersion_ps_per_nm):
        raise WaveformError(f"accumulated dispersion must be finite, got {total_dispersion_ps_per_nm}")
    if total_dispersion_ps_per_nm == 0:
        return waveform
    # beta2 * L for D * L, with L folded into the dispersion value
    beta2_length = beta2_from_dispersion(total_dispersion_ps_per_nm, waveform.center_frequency) * 1e3
    omega = waveform.angular_frequencies()
    inverse = np.exp(-0.5j * beta2_length * omega**2)
    return waveform.with_samples(
        fft.ifft(fft.fft(waveform.samples_x) * inverse),
        fft.ifft(fft.fft(waveform.samples_y) * inverse),
    )
