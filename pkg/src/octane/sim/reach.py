import json
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from rich.console import Console
from rich.table import Table

from octane.enums import SweepAxis
from octane.exceptions import SweepError, ThresholdNotReachedError
from octane.metrics.isotonic import isotonic_fit
from octane.sim.results import SweepResult

console = Console()
log = logging.getLogger(__name__)

DEFAULT_SPAN_LENGTH_KM = 75.0


def _sorted_axis(axis: ArrayLike) -> NDArray[np.float64]:
    axis = np.asarray(axis, dtype=np.float64)
    if axis.ndim != 1 or axis.size == 0:
        raise SweepError("a curve needs at least one point")
    if np.any(np.diff(axis) <= 0):
        raise SweepError("curve points must be sorted by strictly increasing axis value")
    return axis


def reach_at_threshold(curve: Sequence[tuple[float, float]], threshold: float) -> float:
    """Largest distance at which the (monotone-fitted) NGMI is still at or above `threshold`."""
    if not curve:
        raise SweepError("a curve needs at least one point")
    distances = _sorted_axis([point[0] for point in curve])
    fitted = isotonic_fit([point[1] for point in curve], increasing=False)

    above = np.flatnonzero(fitted >= threshold)
    if above.size == 0:
        raise ThresholdNotReachedError(f"NGMI threshold {threshold} not reached (best {fitted.max():.4f})")
    k = int(above[-1])
    if fitted[k] == threshold:
        return float(distances[k])
    if k == len(fitted) - 1:
        raise ThresholdNotReachedError(
            f"NGMI threshold {threshold} not crossed up to {distances[-1]:g} (NGMI {fitted[-1]:.4f})"
        )
    fraction = (fitted[k] - threshold) / (fitted[k] - fitted[k + 1])
    return float(distances[k] + fraction * (distances[k + 1] - distances[k]))


@dataclass
class ReachComparison:
    format: str
    reach_km: float
    gain_percent: float

    def to_dict(self) -> dict:
        return {"format": self.format, "reach_km": self.reach_km, "gain_percent": self.gain_percent}


def _span_length_km(result: SweepResult) -> float:
    config = result.metadata.get("config") or {}
    return float(config.get("link", {}).get("span_length_km", DEFAULT_SPAN_LENGTH_KM))


def compare_reach(
    result: SweepResult,
    baseline: str,
    threshold: float,
    span_length_km: Optional[float] = None,
) -> list[ReachComparison]:
    """Reach of every format of a distance sweep and its gain over `baseline` in percent."""
    if baseline not in result.formats():
        raise SweepError(f"baseline format '{baseline}' is not in the result (have: {', '.join(result.formats())})")
    axes = {row.axis_name for row in result.rows}
    if axes != {SweepAxis.DISTANCE_SPANS.value}:
        raise SweepError(f"reach needs a {SweepAxis.DISTANCE_SPANS.value} sweep, got axis {', '.join(sorted(axes))}")
    span_length_km = _span_length_km(result) if span_length_km is None else span_length_km

    reach = {}
    for format_id in result.formats():
        spans, ngmi = result.curve(format_id)
        reach[format_id] = reach_at_threshold(list(zip(spans * span_length_km, ngmi)), threshold)
        log.debug("%s reaches %.1f km at NGMI %.3f", format_id, reach[format_id], threshold)

    reference = reach[baseline]
    return [
        ReachComparison(format=format_id, reach_km=km, gain_percent=(km - reference) / reference * 100)
        for format_id, km in reach.items()
    ]


def print_reach_table(comparisons: list[ReachComparison], baseline: str, json_output: bool = False):
    if json_output:
        for comparison in comparisons:
            print(json.dumps(comparison.to_dict()))  # noqa: T201
        return

    table = Table(title=f"Reach vs {baseline}")
    table.add_column("format")
    table.add_column("reach (km)", justify="right")
    table.add_column("gain (%)", justify="right")
    for comparison in comparisons:
        table.add_row(comparison.format, f"{comparison.reach_km:.0f}", f"{comparison.gain_percent:+.1f}")
    console.print(table)


def crossing_points(
    axis: ArrayLike,
    ngmi_a: ArrayLike,
    ngmi_b: ArrayLike,
    increasing: bool = True,
    tolerance: ArrayLike = 0.0,
) -> list[tuple[float, float]]:
    """(axis value, NGMI) where two monotone-fitted curves cross.

    Gaps within `tolerance` (one value, or one per axis point) count as ties, so curves that only
    trade places by less than the Monte-Carlo error do not cross. A stretch of ties without a
    change of order is not a crossing.
    """
    axis = _sorted_axis(axis)
    try:
        tolerance = np.broadcast_to(np.asarray(tolerance, dtype=np.float64), axis.shape)
    except ValueError as e:
        raise SweepError(f"tolerance must be one value or one per axis point ({axis.size})") from e
    if np.any(tolerance < 0):
        raise SweepError("crossing tolerance must be non-negative")
    fitted_a = isotonic_fit(ngmi_a, increasing=increasing)
    fitted_b = isotonic_fit(ngmi_b, increasing=increasing)
    if fitted_a.shape != axis.shape or fitted_b.shape != axis.shape:
        raise SweepError("both curves must be sampled on the same axis points")

    difference = fitted_a - fitted_b
    separated = np.flatnonzero(np.abs(difference) > tolerance)
    crossings = []
    for i, j in zip(separated, separated[1:]):
        if np.sign(difference[i]) == np.sign(difference[j]):
            continue
        # last point of the tie stretch still on the side of i
        k = i + int(np.flatnonzero(np.sign(difference[i : j + 1]) != np.sign(difference[i]))[0]) - 1
        if difference[k + 1] == 0:
            crossings.append((float(axis[k + 1]), float(fitted_a[k + 1])))
            continue
        fraction = difference[k] / (difference[k] - difference[k + 1])
        x = axis[k] + fraction * (axis[k + 1] - axis[k])
        crossings.append((float(x), float(fitted_a[k] + fraction * (fitted_a[k + 1] - fitted_a[k]))))
    return crossings


def crossing_tolerance(result: SweepResult, format_a: str, format_b: str, sigmas: float = 3.0) -> NDArray[np.float64]:
    """Per-point crossing tolerance: `sigmas` standard errors of the NGMI difference of two formats."""
    errors = []
    for format_id in (format_a, format_b):
        rows = sorted((row for row in result.rows if row.format == format_id), key=lambda row: row.axis_value)
        if not rows:
            raise SweepError(f"format '{format_id}' is not in the result (have: {', '.join(result.formats())})")
        errors.append(np.array([row.ngmi_std_error for row in rows]))
    if errors[0].shape != errors[1].shape:
        raise SweepError("both curves must be sampled on the same axis points")
    return sigmas * np.hypot(errors[0], errors[1])


@dataclass(frozen=True)
class LaunchOptimum:
    power_dbm: float
    ngmi: float
    quasi_concave: bool


def optimum_launch_power(powers: ArrayLike, ngmi: ArrayLike) -> LaunchOptimum:
    """Vertex of the parabola through the best sampled power and its two neighbours."""
    powers = _sorted_axis(powers)
    ngmi = np.asarray(ngmi, dtype=np.float64)
    if ngmi.shape != powers.shape:
        raise SweepError(f"{powers.size} powers but {ngmi.size} NGMI values")
    k = int(np.argmax(ngmi))
    if k in (0, powers.size - 1):
        raise SweepError(f"NGMI peaks at the edge of the swept range ({powers[k]:g} dBm), widen it")

    steps = np.diff(ngmi)
    quasi_concave = bool(np.all(steps[:k] >= 0) and np.all(steps[k:] <= 0))
    a, b, c = np.polyfit(powers[k - 1 : k + 2], ngmi[k - 1 : k + 2], 2)
    if a >= 0:
        return LaunchOptimum(power_dbm=float(powers[k]), ngmi=float(ngmi[k]), quasi_concave=quasi_concave)
    vertex = float(np.clip(-b / (2 * a), powers[k - 1], powers[k + 1]))
    return LaunchOptimum(power_dbm=vertex, ngmi=float(np.polyval([a, b, c], vertex)), quasi_concave=quasi_concave)


def ngmi_gap(result: SweepResult, format_a: str, format_b: str, axis_value: float) -> float:
    """NGMI of `format_a` minus that of `format_b` at `axis_value`, linearly interpolated."""
    values = []
    for format_id in (format_a, format_b):
        axis, ngmi = result.curve(format_id)
        if not axis[0] <= axis_value <= axis[-1]:
            raise SweepError(f"{axis_value:g} lies outside the swept range of {format_id} ({axis[0]:g}..{axis[-1]:g})")
        values.append(float(np.interp(axis_value, axis, ngmi)))
    return values[0] - values[1]
