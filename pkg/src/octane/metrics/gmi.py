import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from rich.console import Console
from rich.table import Table

from octane.enums import LlrMethod
from octane.exceptions import BracketError, ConvergenceError, MetricError
from octane.metrics.isotonic import isotonic_fit
from octane.metrics.llr import NoiseModel, block_llrs
from octane.modfmt.formats import FormatSpec, Symbol4DStream, received_blocks, symbols_from_indices
from octane.seeding import derive_rng

console = Console()
log = logging.getLogger(__name__)

MIN_BLOCKS = 1000
CHUNK_BLOCKS = 8192
RANGE_TOLERANCE = 1e-9
# relative to the transmitted slot energy
NOISE_FLOOR = 1e-15


@dataclass
class GmiReport:
    per_bit_mi: list[float]
    gmi: float
    ngmi: float
    m: int
    snr_db: float
    n_blocks: int
    gmi_std_error: float = 0.0

    def to_dict(self) -> dict:
        return {
            "per_bit_mi": list(self.per_bit_mi),
            "gmi": self.gmi,
            "ngmi": self.ngmi,
            "m": self.m,
            "snr_db": self.snr_db,
            "n_blocks": self.n_blocks,
            "gmi_std_error": self.gmi_std_error,
        }

    def print_to_console(self, json_output: bool = False, title: str = "GMI"):
        if json_output:
            print(json.dumps(self.to_dict()))  # noqa: T201
            return

        table = Table(title=f"{title}: {self.gmi:.4f} bit ({self.ngmi:.4f} NGMI) at {self.snr_db:.2f} dB")
        table.add_column("bit")
        table.add_column("MI", justify="right")
        for k, mi in enumerate(self.per_bit_mi, start=1):
            table.add_row(f"b{k}", f"{mi:.4f}")
        console.print(table)


@dataclass
class _GmiAccumulator:
    m: int
    terms: NDArray[np.float64] = field(init=False)
    row_sum: float = 0.0
    row_sum_sq: float = 0.0
    n: int = 0

    def __post_init__(self):
        self.terms = np.zeros(self.m)

    def add(self, llrs: NDArray[np.float64], bits: NDArray[np.uint8]) -> None:
        sign = 1.0 - 2.0 * bits.astype(np.float64)
        # 1 - log2(1 + exp(-(1-2b) L)) per sample and bit level
        terms = 1.0 - np.logaddexp(0.0, -sign * llrs) / math.log(2.0)
        rows = np.sum(terms, axis=1)
        self.terms += np.sum(terms, axis=0)
        self.row_sum += float(np.sum(rows))
        self.row_sum_sq += float(np.sum(rows**2))
        self.n += llrs.shape[0]

    def report(self, snr_db: float) -> GmiReport:
        per_bit = np.clip(self.terms / self.n, 0.0, 1.0)
        gmi = float(np.sum(per_bit))
        mean = self.row_sum / self.n
        variance = max(self.row_sum_sq / self.n - mean**2, 0.0) * self.n / max(self.n - 1, 1)
        return GmiReport(
            per_bit_mi=[float(v) for v in per_bit],
            gmi=gmi,
            ngmi=ngmi_from_gmi(gmi, self.m),
            m=self.m,
            snr_db=float(snr_db),
            n_blocks=self.n,
            gmi_std_error=math.sqrt(variance / self.n),
        )


def ngmi_from_gmi(gmi: float, m: int) -> float:
    if m < 1:
        raise MetricError(f"bits per block must be positive, got {m}")
    if not -RANGE_TOLERANCE <= gmi <= m + RANGE_TOLERANCE:
        raise MetricError(f"GMI {gmi!r} lies outside [0, {m}]")
    return float(min(max(gmi / m, 0.0), 1.0))


def gmi_from_llrs(llrs: ArrayLike, bits: ArrayLike, snr_db: float = math.nan) -> GmiReport:
    """GMI of bit-wise decoding from LLRs and the transmitted bits (both shape (n, m))."""
    llrs = np.asarray(llrs, dtype=np.float64)
    bits = np.asarray(bits, dtype=np.uint8)
    if llrs.shape != bits.shape or llrs.ndim != 2:
        raise MetricError(f"LLRs {llrs.shape} and bits {bits.shape} must share an (n, m) shape")
    if llrs.shape[0] == 0:
        raise MetricError("no samples to estimate GMI from")
    accumulator = _GmiAccumulator(llrs.shape[1])
    accumulator.add(llrs, bits)
    return accumulator.report(snr_db)


def gmi_monte_carlo(
    fmt: FormatSpec,
    snr_db: float,
    n_blocks: int = 100_000,
    seed: int = 1,
    method: LlrMethod = LlrMethod.EXACT,
) -> GmiReport:
    """Monte-Carlo GMI of a format over AWGN at `snr_db` per 4D slot.

    Blocks are drawn in fixed-size chunks, each with its own generator derived from
    (seed, chunk index), and reduced in chunk order.
    """
    if n_blocks < MIN_BLOCKS:
        raise MetricError(f"n_blocks must be at least {MIN_BLOCKS}, got {n_blocks}")
    noise = NoiseModel.from_snr_db(snr_db)
    sigma = math.sqrt(noise.variance_per_real_dimension)
    codebook = fmt.codebook

    accumulator = _GmiAccumulator(fmt.bits_per_block)
    for chunk, start in enumerate(range(0, n_blocks, CHUNK_BLOCKS)):
        size = min(CHUNK_BLOCKS, n_blocks - start)
        rng = derive_rng(seed, chunk)
        indices = rng.integers(0, codebook.size, size=size)
        tx = codebook.points[indices]
        rx = tx + rng.normal(scale=sigma, size=tx.shape)
        accumulator.add(block_llrs(fmt, rx, noise, method), codebook.labels[indices])
    report = accumulator.report(snr_db)
    log.debug("%s at %.2f dB: GMI %.4f (NGMI %.4f)", fmt.name, snr_db, report.gmi, report.ngmi)
    return report


@dataclass(frozen=True)
class SnrEstimate:
    gain_x: complex
    gain_y: complex
    noise: NoiseModel
    snr_db: float
    corrected: Symbol4DStream


def estimate_snr(transmitted: Symbol4DStream, received: Symbol4DStream) -> SnrEstimate:
    """Data-aided receiver: per-polarisation complex gain removal, then noise variance estimation."""
    if len(transmitted) != len(received):
        raise MetricError(f"{len(transmitted)} transmitted slots but {len(received)} received")
    tx_x, tx_y = transmitted.to_complex()
    rx_x, rx_y = received.to_complex()

    gains = []
    corrected = []
    for tx, rx in ((tx_x, rx_x), (tx_y, rx_y)):
        gain = complex(np.vdot(tx, rx) / np.vdot(tx, tx).real)
        if gain == 0 or not np.isfinite(gain):
            raise MetricError("received signal carries no transmitted component")
        gains.append(gain)
        corrected.append(rx / gain)

    energy = transmitted.mean_energy()
    error = np.abs(corrected[0] - tx_x) ** 2 + np.abs(corrected[1] - tx_y) ** 2
    variance = max(float(np.mean(error)) / 4.0, NOISE_FLOOR * energy)
    noise = NoiseModel(variance)
    return SnrEstimate(
        gain_x=gains[0],
        gain_y=gains[1],
        noise=noise,
        snr_db=noise.snr_db(energy=energy),
        corrected=Symbol4DStream.from_complex(corrected[0], corrected[1]),
    )


def gmi_from_symbols(
    fmt: FormatSpec,
    tx_indices: ArrayLike,
    received: Symbol4DStream,
    method: LlrMethod = LlrMethod.EXACT,
) -> GmiReport:
    """GMI of a received symbol stream whose transmitted block indices are known."""
    tx_indices = np.asarray(tx_indices, dtype=np.int64)
    estimate = estimate_snr(symbols_from_indices(fmt, tx_indices), received)
    llrs = block_llrs(fmt, received_blocks(fmt, estimate.corrected), estimate.noise, method)
    return gmi_from_llrs(llrs, fmt.codebook.labels[tx_indices], estimate.snr_db)


def required_snr(
    fmt: FormatSpec,
    target_ngmi: float,
    bracket: tuple[float, float],
    n_blocks: int = 100_000,
    seed: int = 1,
    method: LlrMethod = LlrMethod.EXACT,
    tolerance_db: float = 0.05,
    max_iterations: int = 30,
) -> float:
    """SNR at which the format reaches `target_ngmi`, by bisection on an isotonic fit of the samples."""
    if not 0 < target_ngmi < 1:
        raise MetricError(f"target NGMI must lie in (0, 1), got {target_ngmi}")
    low, high = bracket
    if not low < high:
        raise BracketError(f"bracket ({low}, {high}) dB is empty")

    samples: dict[float, float] = {}

    def sample(snr_db: float) -> float:
        if snr_db not in samples:
            samples[snr_db] = gmi_monte_carlo(fmt, snr_db, n_blocks, seed, method).ngmi
        return samples[snr_db]

    def fitted(snr_db: float) -> float:
        axis = sorted(samples)
        smooth = isotonic_fit([samples[x] for x in axis])
        return float(smooth[axis.index(snr_db)])

    low_ngmi, high_ngmi = sample(low), sample(high)
    if not low_ngmi < target_ngmi <= high_ngmi:
        raise BracketError(
            f"{fmt.name}: bracket ({low}, {high}) dB does not straddle NGMI {target_ngmi} "
            f"(NGMI {low_ngmi:.4f} .. {high_ngmi:.4f})"
        )

    for _ in range(max_iterations):
        if high - low < tolerance_db:
            return (low + high) / 2
        mid = (low + high) / 2
        sample(mid)
        if fitted(mid) >= target_ngmi:
            high = mid
        else:
            low = mid
    raise ConvergenceError(
        f"{fmt.name}: no convergence to {tolerance_db} dB after {max_iterations} iterations ({low}, {high})"
    )


def default_bracket(fmt: FormatSpec) -> tuple[float, float]:
    """An SNR range (dB) wide enough to straddle any NGMI target of the format."""
    return (-10.0, 10.0 + 3.0 * float(fmt.bits_per_4d))

