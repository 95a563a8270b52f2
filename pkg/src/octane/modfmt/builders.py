import math
from importlib.resources import files
from pathlib import Path

import numpy as np

from octane.enums import Qam8Geometry
from octane.exceptions import ConstellationError
from octane.modfmt.constellation import (
    Constellation,
    complex_to_real4,
    from_points,
    gray_code,
    int_to_bits,
    load_constellation_file,
)

PRS_FIXTURE = "4d_64prs.txt"

# Gray-labelled rectangular 8QAM: two Gray bits select the in-phase level, the third the quadrature sign
_RECT_8QAM = {
    (0, 0, 0): -3 - 1j,
    (0, 0, 1): -3 + 1j,
    (0, 1, 0): -1 - 1j,
    (0, 1, 1): -1 + 1j,
    (1, 1, 0): 1 - 1j,
    (1, 1, 1): 1 + 1j,
    (1, 0, 0): 3 - 1j,
    (1, 0, 1): 3 + 1j,
}


def _complex_constellation_2d(name: str, symbols: dict[tuple[int, ...], complex]) -> Constellation:
    labels = np.array(list(symbols.keys()), dtype=np.uint8)
    values = np.array(list(symbols.values()), dtype=np.complex128)
    points = np.stack([values.real, values.imag], axis=-1)
    return from_points(name, points, labels)


def polmux(name: str, base: Constellation) -> Constellation:
    """Cartesian product of a 2D constellation on both polarisations; X bits come first."""
    if base.dimension != 2:
        raise ConstellationError(f"{base.name}: polarisation multiplexing needs a 2D constellation")
    x_index, y_index = np.meshgrid(np.arange(base.size), np.arange(base.size), indexing="ij")
    x_index, y_index = x_index.ravel(), y_index.ravel()
    points = np.concatenate([base.points[x_index], base.points[y_index]], axis=1)
    labels = np.concatenate([base.labels[x_index], base.labels[y_index]], axis=1)
    return from_points(name, points, labels)


def build_qpsk() -> Constellation:
    symbols = {
        (0, 0): 1 + 1j,
        (0, 1): 1 - 1j,
        (1, 0): -1 + 1j,
        (1, 1): -1 - 1j,
    }
    return _complex_constellation_2d("QPSK", symbols)


def build_pm_qpsk() -> Constellation:
    return polmux("PM-QPSK", build_qpsk())


def build_8qam(geometry: Qam8Geometry = Qam8Geometry.RECT) -> Constellation:
    geometry = Qam8Geometry(geometry)
    if geometry == Qam8Geometry.RECT:
        return _complex_constellation_2d("8QAM-rect", _RECT_8QAM)

    # star: QPSK inner ring at odd multiples of pi/4, outer ring on the axes
    outer_radius = 1.0 + math.sqrt(3.0)
    symbols: dict[tuple[int, ...], complex] = {}
    for k in range(4):
        phase_bits = tuple(int(b) for b in int_to_bits(gray_code(k), 2))
        symbols[(0, *phase_bits)] = complex(np.exp(1j * (math.pi / 4 + k * math.pi / 2)))
        symbols[(1, *phase_bits)] = complex(outer_radius * np.exp(1j * k * math.pi / 2))
    return _complex_constellation_2d("8QAM-star", symbols)


def build_pm8qam(geometry: Qam8Geometry = Qam8Geometry.RECT) -> Constellation:
    """PM-8QAM: 8QAM on each polarisation, 6-bit labels (X bits then Y bits)."""
    return polmux("PM-8QAM", build_8qam(geometry))


def ring_radii(ring_ratio: float) -> tuple[float, float]:
    """Radii (r1, r2) with r2/r1 = ring_ratio and r1^2 + r2^2 = 1."""
    r1 = 1.0 / math.sqrt(1.0 + ring_ratio**2)
    return r1, ring_ratio * r1


def build_2a8psk(ring_ratio: float, m: int = 6) -> Constellation:
    """Constant-modulus two-amplitude 8PSK in 4D.

    Each polarisation carries 8PSK on one of two rings; the X ring is r1 when the Gray-coded
    phase labels have even parity and r2 otherwise, and Y takes the other ring. The 5-bit
    variant keeps the even-parity half, whose sixth label bit is implied.
    """
    if not 0 < ring_ratio <= 1:
        raise ConstellationError(f"ring_ratio must lie in (0, 1], got {ring_ratio}")
    if m not in (5, 6):
        raise ConstellationError(f"2A8PSK is defined for 5 or 6 bits, got {m}")

    r1, r2 = ring_radii(ring_ratio)
    points = []
    labels = []
    for nx in range(8):
        for ny in range(8):
            label = np.concatenate([int_to_bits(gray_code(nx), 3), int_to_bits(gray_code(ny), 3)])
            odd = (nx + ny) % 2 == 1
            if m == 5 and odd:
                continue
            x_radius, y_radius = (r2, r1) if odd else (r1, r2)
            x = x_radius * np.exp(2j * math.pi * nx / 8)
            y = y_radius * np.exp(2j * math.pi * ny / 8)
            points.append(complex_to_real4(x, y))
            labels.append(label[:m])
    return from_points(f"{m}b-4D-2A8PSK", np.array(points), np.array(labels))


def prs_fixture_path() -> Path:
    return Path(str(files("octane.modfmt").joinpath("data", PRS_FIXTURE)))


def load_prs_fixture() -> Constellation:
    return load_constellation_file(prs_fixture_path())
