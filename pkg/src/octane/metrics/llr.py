import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from octane.enums import LlrMethod
from octane.exceptions import MetricError
from octane.modfmt.constellation import Constellation
from octane.modfmt.formats import FormatSpec

# floor for class likelihood sums; bounds |LLR| near 690
_TINY = 1e-300
CHUNK_ROWS = 4096


@dataclass(frozen=True)
class NoiseModel:
    variance_per_real_dimension: float

    def __post_init__(self):
        if not (math.isfinite(self.variance_per_real_dimension) and self.variance_per_real_dimension > 0):
            raise MetricError(f"noise variance must be positive and finite, got {self.variance_per_real_dimension!r}")

    @classmethod
    def from_snr_db(cls, snr_db: float, dimension: int = 4, energy: float = 1.0) -> "NoiseModel":
        """Noise of a `dimension`-real-dimensional slot of mean energy `energy` at the given SNR.

        SNR counts signal energy against noise energy per complex dimension, so a 4D slot
        at SNR s has variance energy / (4 s) per real dimension.
        """
        return cls(energy / (dimension * 10 ** (snr_db / 10)))

    def snr_db(self, dimension: int = 4, energy: float = 1.0) -> float:
        return 10 * math.log10(energy / (dimension * self.variance_per_real_dimension))


def _metrics(points: NDArray[np.float64], received: NDArray[np.float64], sigma2: float) -> NDArray[np.float64]:
    # -|y - x|^2 / (2 sigma^2) up to a per-row constant
    return (received @ points.T - 0.5 * np.sum(points**2, axis=1)[None, :]) / sigma2


def _exact(metric: NDArray[np.float64], labels: NDArray[np.uint8]) -> NDArray[np.float64]:
    weights = np.exp(metric - np.max(metric, axis=1, keepdims=True))
    ones = labels.astype(np.float64)
    s1 = weights @ ones
    s0 = weights @ (1.0 - ones)
    return np.log(np.maximum(s0, _TINY)) - np.log(np.maximum(s1, _TINY))


def _maxlog(metric: NDArray[np.float64], labels: NDArray[np.uint8]) -> NDArray[np.float64]:
    llrs = np.empty((metric.shape[0], labels.shape[1]))
    for k in range(labels.shape[1]):
        ones = labels[:, k] == 1
        llrs[:, k] = np.max(metric[:, ~ones], axis=1) - np.max(metric[:, ones], axis=1)
    return llrs


def point_set_llrs(
    points: NDArray[np.float64],
    labels: NDArray[np.uint8],
    received: ArrayLike,
    noise: NoiseModel,
    method: LlrMethod = LlrMethod.EXACT,
) -> NDArray[np.float64]:
    """Bit LLRs log(P(b=0|y) / P(b=1|y)) of every received row against a labeled point set."""
    received = np.asarray(received, dtype=np.float64)
    if received.ndim != 2 or received.shape[1] != points.shape[1]:
        raise MetricError(f"received vectors have shape {received.shape}, expected (n, {points.shape[1]})")
    demap = _exact if LlrMethod(method) == LlrMethod.EXACT else _maxlog
    out = np.empty((received.shape[0], labels.shape[1]))
    for start in range(0, received.shape[0], CHUNK_ROWS):
        stop = start + CHUNK_ROWS
        out[start:stop] = demap(_metrics(points, received[start:stop], noise.variance_per_real_dimension), labels)
    return out


def bit_llrs(
    constellation: Constellation,
    received: ArrayLike,
    noise: NoiseModel,
    method: LlrMethod = LlrMethod.EXACT,
) -> NDArray[np.float64]:
    """LLRs of one received vector (shape (m,)) or of a batch (shape (n, m))."""
    received = np.asarray(received, dtype=np.float64)
    single = received.ndim == 1
    if single:
        received = received[None, :]
    if received.shape[-1] != constellation.dimension:
        raise MetricError(
            f"{constellation.name}: received dimension {received.shape[-1]} does not match {constellation.dimension}"
        )
    llrs = point_set_llrs(constellation.points, constellation.labels, received, noise, method)
    return llrs[0] if single else llrs


def block_llrs(
    fmt: FormatSpec,
    blocks: ArrayLike,
    noise: NoiseModel,
    method: LlrMethod = LlrMethod.EXACT,
) -> NDArray[np.float64]:
    """LLRs of the information bits of every received block, shape (n, bits_per_block).

    Parity8D formats demap jointly over the full 8D codebook; time-hybrid blocks factor per slot.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim != 2 or blocks.shape[1] != fmt.block_dimension:
        raise MetricError(f"{fmt.name}: received blocks have shape {blocks.shape}, expected (n, {fmt.block_dimension})")
    llrs = np.empty((blocks.shape[0], fmt.bits_per_block))
    for component in fmt.demap_components():
        llrs[:, component.bits] = point_set_llrs(
            component.points, component.labels, blocks[:, component.dims], noise, method
        )
    return llrs
