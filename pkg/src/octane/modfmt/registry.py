import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from scipy.optimize import minimize_scalar

from octane.config import FormatSection
from octane.enums import LlrMethod, ParityType
from octane.exceptions import FormatError
from octane.metrics.gmi import default_bracket, gmi_monte_carlo, required_snr
from octane.modfmt.builders import build_2a8psk, build_pm8qam, build_pm_qpsk, load_prs_fixture
from octane.modfmt.constellation import Constellation, load_constellation_file
from octane.modfmt.formats import FormatSpec, TimeHybrid, build_time_hybrid, extend_to_8d, plain_4d

log = logging.getLogger(__name__)

RING_RATIO_BOUNDS = (0.3, 1.0)
RING_RATIO_SEARCH_BLOCKS = 20_000
RING_RATIO_SEARCH_SEED = 1


def load_base(section: FormatSection) -> Constellation:
    if section.constellation_file:
        return load_constellation_file(section.constellation_file)
    return load_prs_fixture()


def time_hybrid_2a8psk(ring_ratio: float) -> TimeHybrid:
    return build_time_hybrid(build_2a8psk(ring_ratio, 5), build_2a8psk(ring_ratio, 6), name="TH4D-2A8PSK")


@dataclass(frozen=True)
class RingRatioResult:
    ring_ratio: float
    snr_db: float
    gmi: float


def optimize_ring_ratio(
    snr_db: Optional[float] = None,
    target_ngmi: float = 0.85,
    n_blocks: int = RING_RATIO_SEARCH_BLOCKS,
    seed: int = RING_RATIO_SEARCH_SEED,
    bounds: tuple[float, float] = RING_RATIO_BOUNDS,
    method: LlrMethod = LlrMethod.EXACT,
) -> RingRatioResult:
    """Ring ratio of the time-hybrid 2A8PSK format that maximizes AWGN GMI.

    Without an explicit SNR the search runs at the SNR where the format, at the centre of
    `bounds`, reaches `target_ngmi`. The search is a bounded golden-section (Brent) search
    with common random numbers across evaluations.
    """
    if snr_db is None:
        start = time_hybrid_2a8psk(sum(bounds) / 2)
        snr_db = required_snr(start, target_ngmi, default_bracket(start), n_blocks, seed, method)

    def negative_gmi(ring_ratio: float) -> float:
        return -gmi_monte_carlo(time_hybrid_2a8psk(ring_ratio), snr_db, n_blocks, seed, method).gmi

    result = minimize_scalar(negative_gmi, bounds=bounds, method="bounded", options={"xatol": 1e-3})
    log.info("2A8PSK ring ratio %.4f maximizes GMI (%.4f bit) at %.2f dB", result.x, -result.fun, snr_db)
    return RingRatioResult(ring_ratio=float(result.x), snr_db=float(snr_db), gmi=float(-result.fun))


@lru_cache(maxsize=None)
def _auto_ring_ratio(target_ngmi: float) -> float:
    return optimize_ring_ratio(target_ngmi=target_ngmi).ring_ratio


def resolve_ring_ratio(section: FormatSection, target_ngmi: float = 0.85) -> float:
    if section.ring_ratio is not None:
        return section.ring_ratio
    return _auto_ring_ratio(target_ngmi)


def _parity_8d(parity_type: ParityType) -> Callable[[FormatSection], FormatSpec]:
    return lambda section: extend_to_8d(load_base(section), parity_type)


FORMAT_BUILDERS: dict[str, Callable[[FormatSection], FormatSpec]] = {
    "pm8qam": lambda section: plain_4d(build_pm8qam(section.qam8_geometry)),
    "pmqpsk": lambda section: plain_4d(build_pm_qpsk()),
    "4d64prs": lambda section: plain_4d(load_base(section)),
    "6b4d-2a8psk": lambda section: plain_4d(build_2a8psk(resolve_ring_ratio(section), 6)),
    "5b4d-2a8psk": lambda section: plain_4d(build_2a8psk(resolve_ring_ratio(section), 5)),
    "8d2048prs-t1": _parity_8d(ParityType.T1),
    "8d2048prs-t2": _parity_8d(ParityType.T2),
    "th4d-2a8psk": lambda section: time_hybrid_2a8psk(resolve_ring_ratio(section)),
}


def check_format_ids(format_ids: list[str]) -> None:
    unknown = [format_id for format_id in format_ids if format_id not in FORMAT_BUILDERS]
    if unknown:
        raise FormatError(
            f"unknown format identifier(s) {', '.join(unknown)}; known: {', '.join(FORMAT_BUILDERS)}"
        )


def build_format(format_id: str, section: Optional[FormatSection] = None) -> FormatSpec:
    check_format_ids([format_id])
    return FORMAT_BUILDERS[format_id](section or FormatSection())


def uses_ring_ratio(format_ids: list[str]) -> bool:
    return any("2a8psk" in format_id for format_id in format_ids)
