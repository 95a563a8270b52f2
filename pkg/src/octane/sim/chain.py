import logging
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from octane.config import SweepConfig
from octane.metrics.gmi import GmiReport, gmi_from_symbols
from octane.modfmt.formats import FormatSpec, symbols_from_indices
from octane.phy.fiber import cd_compensate
from octane.phy.link import center_frequency_of, iter_link, link_from_section, set_launch_power
from octane.phy.pulse import matched_filter_downsample, occupied_bandwidth, rrc_shape
from octane.phy.waveform import WaveformGrid
from octane.phy.wdm import channel_select, wdm_mux
from octane.seeding import derive_rng, derive_seed

log = logging.getLogger(__name__)

CENTER_DATA_KEY = 0
NEIGHBOUR_DATA_KEY = 1
PROPAGATION_KEY = 2


def _random_indices(fmt: FormatSpec, n_blocks: int, seed: int, key: int) -> NDArray[np.int64]:
    return derive_rng(seed, key).integers(0, fmt.codebook.size, size=n_blocks)


def transmit_wdm(fmt: FormatSpec, config: SweepConfig) -> tuple[WaveformGrid, NDArray[np.int64]]:
    """WDM comb of `config.sweep.channels` equal-power channels and the block indices of the centre one.

    The neighbours carry one shared random sequence, each delayed by its own decorrelation delay.
    """
    sweep = config.sweep
    symbol_rate = sweep.symbol_rate_gbd * 1e9
    n_blocks = sweep.n_symbols // fmt.slots_per_block
    center_frequency = center_frequency_of(config.link)

    def shape(indices: NDArray[np.int64]) -> WaveformGrid:
        symbols = symbols_from_indices(fmt, indices)
        return rrc_shape(symbols, sweep.rolloff, sweep.samples_per_symbol, symbol_rate, center_frequency)

    center_indices = _random_indices(fmt, n_blocks, sweep.seed, CENTER_DATA_KEY)
    center = shape(center_indices)
    if sweep.channels == 1:
        return center, center_indices

    neighbour = shape(_random_indices(fmt, n_blocks, sweep.seed, NEIGHBOUR_DATA_KEY))
    channels = []
    delays = []
    delay_cycle = sweep.decorrelation_delays_symbols
    for slot in range(sweep.channels):
        if slot == sweep.channels // 2:
            channels.append(center)
            delays.append(0)
            continue
        k = slot if slot < sweep.channels // 2 else slot - 1
        channels.append(neighbour)
        delays.append(delay_cycle[k % len(delay_cycle)] * sweep.samples_per_symbol)
    return wdm_mux(channels, sweep.spacing_ghz * 1e9, delays), center_indices


def receive(
    field: WaveformGrid,
    fmt: FormatSpec,
    config: SweepConfig,
    tx_indices: NDArray[np.int64],
    accumulated_dispersion_ps_nm: float,
) -> GmiReport:
    """Centre-channel receiver: select, compensate dispersion, matched filter, demap."""
    sweep = config.sweep
    symbol_rate = sweep.symbol_rate_gbd * 1e9
    selected = channel_select(field, 0.0, occupied_bandwidth(sweep.rolloff, symbol_rate))
    compensated = cd_compensate(selected, accumulated_dispersion_ps_nm)
    received = matched_filter_downsample(compensated, sweep.rolloff, sweep.samples_per_symbol, symbol_rate)
    return gmi_from_symbols(fmt, tx_indices, received, sweep.llr_method)


def run_distances(
    fmt: FormatSpec,
    config: SweepConfig,
    span_counts: Sequence[int],
    launch_power_dbm: Optional[float] = None,
) -> list[GmiReport]:
    """Centre-channel GMI after each of `span_counts` spans, all tapped from one propagation.

    Zero spans is back-to-back: the launched comb goes straight to the receiver.
    """
    span_counts = [int(n) for n in span_counts]
    launch_power_dbm = config.link.launch_power_dbm if launch_power_dbm is None else launch_power_dbm
    comb, tx_indices = transmit_wdm(fmt, config)

    reports: dict[int, GmiReport] = {}
    if 0 in span_counts:
        reports[0] = receive(set_launch_power(comb, launch_power_dbm), fmt, config, tx_indices, 0.0)

    longest = max(span_counts)
    if longest > 0:
        link = link_from_section(config.link, n_spans=longest, launch_power_dbm=launch_power_dbm)
        wanted = set(span_counts)
        dispersion = 0.0
        seed = derive_seed(config.sweep.seed, PROPAGATION_KEY)
        for n, (field, (span, _)) in enumerate(zip(iter_link(comb, link, seed), link.spans), start=1):
            dispersion += span.accumulated_dispersion_ps_nm
            if n in wanted:
                reports[n] = receive(field, fmt, config, tx_indices, dispersion)
                log.info(
                    "%s after %d spans at %.2f dBm: NGMI %.4f", fmt.name, n, launch_power_dbm, reports[n].ngmi
                )
    return [reports[n] for n in span_counts]
