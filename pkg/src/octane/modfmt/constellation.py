import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import pdist

from octane.exceptions import ConstellationError, ConstellationFileError

log = logging.getLogger(__name__)

ENERGY_TOLERANCE = 1e-12


def bits_to_int(bits: ArrayLike) -> NDArray[np.int64]:
    """Convert bit rows (b1 first, most significant) to integer indices."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1, dtype=np.int64)
    return bits @ weights


def int_to_bits(values: ArrayLike, width: int) -> NDArray[np.uint8]:
    """Convert integers to bit rows of the given width, b1 first."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def gray_code(n: int) -> int:
    return n ^ (n >> 1)


def mean_power(points: ArrayLike) -> float:
    points = np.asarray(points, dtype=np.float64)
    return float(np.mean(np.sum(points**2, axis=-1)))


def normalize(points: ArrayLike) -> NDArray[np.float64]:
    """Scale points to unit mean squared norm."""
    points = np.asarray(points, dtype=np.float64)
    power = mean_power(points)
    if not power > 0:
        raise ConstellationError("cannot normalize a constellation with zero power")
    return points / math.sqrt(power)


def min_distance(points: ArrayLike) -> float:
    """Minimum pairwise Euclidean distance of a point set (rows are points)."""
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] < 2:
        return 0.0
    return float(np.min(pdist(points)))


@dataclass(frozen=True, eq=False)
class Constellation:
    """A labeled point set in `dimension` real dimensions with unit mean energy.

    Row i of `points` carries label row i of `labels` (b1 first).
    """

    name: str
    points: NDArray[np.float64]
    labels: NDArray[np.uint8]
    dimension: int = field(init=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.uint8)
        if points.ndim != 2 or labels.ndim != 2:
            raise ConstellationError(f"{self.name}: points and labels must be 2D arrays")
        if points.shape[0] != labels.shape[0]:
            raise ConstellationError(
                f"{self.name}: {points.shape[0]} points but {labels.shape[0]} labels"
            )
        m = labels.shape[1]
        if points.shape[0] != 2**m:
            raise ConstellationError(f"{self.name}: expected {2**m} points for {m}-bit labels, got {points.shape[0]}")
        if np.any(labels > 1):
            raise ConstellationError(f"{self.name}: labels must be binary")
        if not np.all(np.isfinite(points)):
            raise ConstellationError(f"{self.name}: non-finite coordinate")
        if np.unique(bits_to_int(labels)).size != labels.shape[0]:
            raise ConstellationError(f"{self.name}: duplicate label")
        power = mean_power(points)
        if abs(power - 1.0) > ENERGY_TOLERANCE:
            raise ConstellationError(f"{self.name}: mean power {power!r} is not unit")

        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dimension", points.shape[1])

    @property
    def bits(self) -> int:
        return int(self.labels.shape[1])

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def indexed_points(self) -> NDArray[np.float64]:
        """Points reordered so that row k carries the label whose integer value is k."""
        order = np.argsort(bits_to_int(self.labels))
        return self.points[order]

    def mean_power(self) -> float:
        return mean_power(self.points)

    def squared_norms(self) -> NDArray[np.float64]:
        return np.sum(self.points**2, axis=1)

    def min_distance(self) -> float:
        return min_distance(self.points)


def from_points(name: str, points: ArrayLike, labels: ArrayLike, normalize_energy: bool = True) -> Constellation:
    points = np.asarray(points, dtype=np.float64)
    if normalize_energy:
        points = normalize(points)
    return Constellation(name=name, points=points, labels=np.asarray(labels, dtype=np.uint8))


def complex_to_real4(x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """Stack X and Y complex symbols as (Re X, Im X, Re Y, Im Y) rows."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    return np.stack([x.real, x.imag, y.real, y.imag], axis=-1)


def _parse_header(line: str, line_number: int) -> tuple[int, int, bool, str]:
    fields: dict[str, str] = {}
    for token in line.split():
        if "=" not in token:
            raise ConstellationFileError(f"line {line_number}: malformed header token '{token}'")
        key, value = token.split("=", 1)
        fields[key] = value
    missing = {"dim", "bits", "normalize", "name"} - fields.keys()
    if missing:
        raise ConstellationFileError(f"line {line_number}: malformed header, missing {sorted(missing)}")
    try:
        dim = int(fields["dim"])
        bits = int(fields["bits"])
    except ValueError as e:
        raise ConstellationFileError(f"line {line_number}: malformed header, {e}") from e
    if fields["normalize"] not in ("0", "1"):
        raise ConstellationFileError(f"line {line_number}: malformed header, normalize must be 0 or 1")
    if dim < 1 or bits < 1:
        raise ConstellationFileError(f"line {line_number}: malformed header, dim and bits must be positive")
    return dim, bits, fields["normalize"] == "1", fields["name"]


def load_constellation(source: str) -> Constellation:
    """Parse the constellation text format.

    Header `dim=<d> bits=<m> normalize=<0|1> name=<string>` followed by 2^m rows of
    `<label> <coord_1> ... <coord_d>`; `#` starts a comment.
    """
    header = None
    labels: list[list[int]] = []
    points: list[list[float]] = []
    seen: dict[str, int] = {}

    for line_number, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line, line_number)
            continue

        dim, bits, _, _ = header
        tokens = line.split()
        label = tokens[0]
        if len(label) != bits or set(label) - {"0", "1"}:
            raise ConstellationFileError(f"line {line_number}: label '{label}' is not {bits} binary digits")
        if len(tokens) != dim + 1:
            raise ConstellationFileError(f"line {line_number}: expected {dim} coordinates, got {len(tokens) - 1}")
        if label in seen:
            raise ConstellationFileError(
                f"line {line_number}: duplicate label {label} (first on line {seen[label]})"
            )
        try:
            coords = [float(token) for token in tokens[1:]]
        except ValueError as e:
            raise ConstellationFileError(f"line {line_number}: {e}") from e
        if not all(math.isfinite(c) for c in coords):
            raise ConstellationFileError(f"line {line_number}: non-finite coordinate")
        seen[label] = line_number
        labels.append([int(c) for c in label])
        points.append(coords)

    if header is None:
        raise ConstellationFileError("malformed header: empty constellation file")
    dim, bits, normalize_energy, name = header
    if len(points) != 2**bits:
        raise ConstellationFileError(f"wrong point count: expected {2**bits}, got {len(points)}")

    point_array = np.array(points, dtype=np.float64)
    if normalize_energy:
        point_array = normalize(point_array)
    try:
        return Constellation(name=name, points=point_array, labels=np.array(labels, dtype=np.uint8))
    except ConstellationError as e:
        raise ConstellationFileError(str(e)) from e


def write_constellation(constellation: Constellation, comments: Sequence[str] = ()) -> str:
    lines = [f"# {comment}" for comment in comments]
    lines.append(f"dim={constellation.dimension} bits={constellation.bits} normalize=0 name={constellation.name}")
    order = np.argsort(bits_to_int(constellation.labels))
    for i in order:
        label = "".join(str(int(b)) for b in constellation.labels[i])
        coords = " ".join(repr(float(c)) for c in constellation.points[i])
        lines.append(f"{label} {coords}")
    return "\n".join(lines) + "\n"


def load_constellation_file(path: Union[str, Path]) -> Constellation:
    path = Path(path)
    if not path.is_file():
        raise ConstellationFileError(f"constellation file not found: {path}")
    log.debug("Loading constellation from %s", path)
    return load_constellation(path.read_text())


def write_constellation_file(constellation: Constellation, path: Union[str, Path]) -> None:
    Path(path).write_text(write_constellation(constellation))
