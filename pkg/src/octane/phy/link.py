import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

from octane.config import LinkSection
from octane.exceptions import LinkParameterError, WaveformError
from octane.phy.amplifier import Amplifier, edfa_amplify
from octane.phy.fiber import FiberSpan, ssfm_span
from octane.phy.waveform import DEFAULT_CENTER_FREQUENCY, WaveformGrid, dbm_to_watt, frequency_from_wavelength
from octane.seeding import derive_seed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkSpec:
    spans: tuple[tuple[FiberSpan, Amplifier], ...]
    launch_power_dbm_total: float

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(tuple(pair) for pair in self.spans))
        if not self.spans:
            raise LinkParameterError("a link needs at least one span")
        if not math.isfinite(self.launch_power_dbm_total):
            raise LinkParameterError(f"launch power must be finite, got {self.launch_power_dbm_total}")

    @classmethod
    def uniform(
        cls,
        n_spans: int,
        span: FiberSpan,
        launch_power_dbm_total: float,
        amplifier: Optional[Amplifier] = None,
    ) -> "LinkSpec":
        """`n_spans` identical spans; the default amplifier exactly offsets the span loss."""
        amplifier = amplifier or Amplifier(gain_db=span.loss_db)
        return cls(
            spans=tuple((span, amplifier) for _ in range(n_spans)),
            launch_power_dbm_total=launch_power_dbm_total,
        )

    @property
    def length_km(self) -> float:
        return sum(span.length_km for span, _ in self.spans)

    @property
    def accumulated_dispersion_ps_nm(self) -> float:
        return sum(span.accumulated_dispersion_ps_nm for span, _ in self.spans)


def link_from_section(
    section: LinkSection,
    n_spans: Optional[int] = None,
    launch_power_dbm: Optional[float] = None,
) -> LinkSpec:
    span = FiberSpan(
        length_km=section.span_length_km,
        alpha_db_per_km=section.alpha_db_per_km,
        dispersion_ps_nm_km=section.dispersion_ps_nm_km,
        gamma_per_w_km=section.gamma_per_w_km,
        step_km=section.step_km,
    )
    gain_db = span.loss_db if section.amplifier_gain_db is None else section.amplifier_gain_db
    return LinkSpec.uniform(
        n_spans=section.n_spans if n_spans is None else n_spans,
        span=span,
        launch_power_dbm_total=section.launch_power_dbm if launch_power_dbm is None else launch_power_dbm,
        amplifier=Amplifier(gain_db=gain_db, noise_figure_db=section.noise_figure_db),
    )


def center_frequency_of(section: LinkSection) -> float:
    return frequency_from_wavelength(section.wavelength_nm)


def set_launch_power(waveform: WaveformGrid, power_dbm: float) -> WaveformGrid:
    power = waveform.power()
    if not power > 0:
        raise WaveformError("cannot set the launch power of a waveform without power")
    return waveform.scaled(math.sqrt(dbm_to_watt(power_dbm) / power))


def iter_link(waveform: WaveformGrid, link: LinkSpec, seed: int) -> Iterator[WaveformGrid]:
    """Yield the field after every span (fibre then amplifier), launch power applied first.

    Span i draws its ASE from a seed derived from (seed, i), so the field after n spans does
    not depend on how many spans follow.
    """
    field = set_launch_power(waveform, link.launch_power_dbm_total)
    for index, (span, amplifier) in enumerate(link.spans):
        field = ssfm_span(field, span)
        field = edfa_amplify(field, amplifier, derive_seed(seed, index))
        log.debug("Span %d/%d: %.3f dBm", index + 1, len(link.spans), 10 * math.log10(field.power() / 1e-3))
        yield field


def propagate_link(waveform: WaveformGrid, link: LinkSpec, seed: int) -> WaveformGrid:
    field = waveform
    for field in iter_link(waveform, link, seed):
        pass
    return field


def linear_snr_db(
    link: LinkSpec,
    n_channels: int,
    symbol_rate: float,
    center_frequency: float = DEFAULT_CENTER_FREQUENCY,
) -> float:
    """ASE-limited SNR of one channel (per polarisation, matched-filter bandwidth `symbol_rate`)."""
    channel_power = dbm_to_watt(link.launch_power_dbm_total) / n_channels
    signal = channel_power
    noise = 0.0
    for span, amplifier in link.spans:
        net_gain = amplifier.gain * 10 ** (-span.loss_db / 10)
        signal *= net_gain
        noise = noise * net_gain + amplifier.ase_psd(center_frequency) * symbol_rate
    if noise == 0:
        return math.inf
    return 10 * math.log10(signal / (2 * noise))
