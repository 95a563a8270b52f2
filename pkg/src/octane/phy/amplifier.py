import logging
import math
from dataclasses import dataclass

from scipy.constants import h as PLANCK

from octane.exceptions import LinkParameterError
from octane.phy.waveform import WaveformGrid
from octane.seeding import derive_rng

log = logging.getLogger(__name__)

# quantum limit of a high-gain phase-insensitive amplifier
MIN_NOISE_FIGURE_DB = 3.0


@dataclass(frozen=True)
class Amplifier:
    gain_db: float
    noise_figure_db: float = 5.0

    def __post_init__(self):
        if not self.gain_db >= 0:
            raise LinkParameterError(f"amplifier gain must be >= 0 dB, got {self.gain_db}")
        if self.gain_db > 0 and self.noise_figure_db < MIN_NOISE_FIGURE_DB:
            log.warning(
                "Noise figure %.2f dB is below the %.0f dB limit for an amplifier with gain",
                self.noise_figure_db,
                MIN_NOISE_FIGURE_DB,
            )

    @property
    def gain(self) -> float:
        return 10 ** (self.gain_db / 10)

    @property
    def spontaneous_emission_factor(self) -> float:
        return 10 ** (self.noise_figure_db / 10) / 2

    def ase_psd(self, frequency: float) -> float:
        """One-polarisation ASE power spectral density (W/Hz) at the output."""
        return (self.gain - 1) * self.spontaneous_emission_factor * PLANCK * frequency


def edfa_amplify(waveform: WaveformGrid, amp: Amplifier, seed: int) -> WaveformGrid:
    """Apply gain and add white circular Gaussian ASE over the simulation bandwidth."""
    if amp.gain_db == 0:
        return waveform
    field_gain = math.sqrt(amp.gain)
    noise_power = amp.ase_psd(waveform.center_frequency) * waveform.sample_rate
    scale = math.sqrt(noise_power / 2)
    rng = derive_rng(seed)
    n = len(waveform)
    noise_x = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    noise_y = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return waveform.with_samples(field_gain * waveform.samples_x + noise_x, field_gain * waveform.samples_y + noise_y)
