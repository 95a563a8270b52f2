import math
from typing import Optional

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.typing import NDArray
from scipy.special import logsumexp

from octane.exceptions import MetricError
from octane.metrics.llr import NoiseModel
from octane.modfmt.constellation import Constellation
from octane.modfmt.formats import FormatSpec, Parity8D, Plain4D, TimeHybrid

MAX_POINTS = 256
DEFAULT_NODES = {2: 48, 4: 14}


def _tensor_rule(nodes: int, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = hermgauss(nodes)
    grids = np.meshgrid(*([t] * dimension), indexing="ij")
    weights = np.meshgrid(*([w] * dimension), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weight = np.prod(np.stack([g.ravel() for g in weights], axis=1), axis=1) / math.pi ** (dimension / 2)
    return points, weight


def _noise_grid(
    constellation: Constellation, snr_db: float, nodes: Optional[int]
) -> tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    d = constellation.dimension
    if d not in DEFAULT_NODES:
        raise MetricError(f"{constellation.name}: quadrature supports 2 or 4 dimensions, got {d}")
    if constellation.size > MAX_POINTS:
        raise MetricError(f"{constellation.name}: at most {MAX_POINTS} points are supported, got {constellation.size}")
    sigma2 = NoiseModel.from_snr_db(snr_db, dimension=d).variance_per_real_dimension
    grid, weight = _tensor_rule(nodes or DEFAULT_NODES[d], d)
    return sigma2, math.sqrt(2.0 * sigma2) * grid, weight


def _exponents(
    x: NDArray[np.float64], points: NDArray[np.float64], z: NDArray[np.float64], sigma2: float
) -> NDArray[np.float64]:
    # log p(x + z | x') - log p(x + z | x) for every node (rows) and candidate x' (columns)
    diff = x[None, :] - points
    return -(np.sum(diff**2, axis=1)[None, :] + 2.0 * z @ diff.T) / (2.0 * sigma2)


def mi_reference(constellation: Constellation, snr_db: float, nodes: Optional[int] = None) -> float:
    """Symbol-wise mutual information over AWGN by Gauss-Hermite tensor quadrature.

    Uses the same SNR convention as the Monte-Carlo estimator: unit slot energy and
    variance 1 / (d * snr) per real dimension.
    """
    sigma2, z, weight = _noise_grid(constellation, snr_db, nodes)
    expected = 0.0
    for x in constellation.points:
        expected += float(weight @ logsumexp(_exponents(x, constellation.points, z, sigma2), axis=1))
    mi = constellation.bits - expected / (constellation.size * math.log(2.0))
    return float(min(max(mi, 0.0), constellation.bits))


def gmi_reference(constellation: Constellation, snr_db: float, nodes: Optional[int] = None) -> float:
    """Bit-wise (BICM) GMI over AWGN by the same quadrature as `mi_reference`.

    The sum over bit levels of I(b_k; y) with matched demapping. Equals the symbol-wise MI only
    for labelings where every bit level is independent of the others given y, as for Gray QPSK.
    """
    sigma2, z, weight = _noise_grid(constellation, snr_db, nodes)
    points, labels = constellation.points, constellation.labels
    loss = 0.0
    for x, label in zip(points, labels):
        exponents = _exponents(x, points, z, sigma2)
        total = logsumexp(exponents, axis=1)
        same = labels == label[None, :]
        for k in range(constellation.bits):
            loss += float(weight @ (total - logsumexp(exponents[:, same[:, k]], axis=1)))
    gmi = constellation.bits - loss / (constellation.size * math.log(2.0))
    return float(min(max(gmi, 0.0), constellation.bits))


def block_mi_bound(fmt: FormatSpec, snr_db: float, nodes: Optional[int] = None) -> float:
    """Upper reference for the GMI of one block of `fmt` (bit per block).

    Exact symbol-wise MI for Plain4D and per-slot time-hybrid blocks. A Parity8D block is bounded by
    twice the MI of its 4D base, since either slot alone is uniform over the base.
    """
    if isinstance(fmt, Plain4D):
        return mi_reference(fmt.constellation, snr_db, nodes)
    if isinstance(fmt, TimeHybrid):
        return sum(mi_reference(slot, snr_db, nodes) for slot in fmt.slots)
    if isinstance(fmt, Parity8D):
        return 2.0 * mi_reference(fmt.base, snr_db, nodes)
    raise MetricError(f"{fmt.name}: no MI reference for {type(fmt).__name__}")
