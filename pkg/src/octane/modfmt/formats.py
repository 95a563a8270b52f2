from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from octane.enums import FormatKind, ParityType
from octane.exceptions import BitLengthError, FormatError
from octane.modfmt.constellation import Constellation, bits_to_int, int_to_bits, min_distance

SLOT_DIMENSION = 4
MAX_ENUMERABLE_BITS = 16
POLARISATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Symbol4DStream:
    """Sequence of 4D slots, each (Re X, Im X, Re Y, Im Y)."""

    slots: NDArray[np.float64]

    def __post_init__(self):
        slots = np.asarray(self.slots, dtype=np.float64)
        if slots.ndim != 2 or slots.shape[1] != SLOT_DIMENSION:
            raise FormatError(f"a 4D symbol stream needs shape (n, 4), got {slots.shape}")
        object.__setattr__(self, "slots", slots)

    def __len__(self) -> int:
        return int(self.slots.shape[0])

    @classmethod
    def from_complex(cls, x: ArrayLike, y: ArrayLike) -> "Symbol4DStream":
        x = np.asarray(x, dtype=np.complex128)
        y = np.asarray(y, dtype=np.complex128)
        return cls(np.stack([x.real, x.imag, y.real, y.imag], axis=-1))

    def to_complex(self) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        x = self.slots[:, 0] + 1j * self.slots[:, 1]
        y = self.slots[:, 2] + 1j * self.slots[:, 3]
        return x, y

    def mean_energy(self) -> float:
        return float(np.mean(np.sum(self.slots**2, axis=1)))


@dataclass(frozen=True)
class Codebook:
    """All block codewords; row k is the codeword of the information word with integer value k."""

    points: NDArray[np.float64]
    labels: NDArray[np.uint8]

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class DemapComponent:
    """A part of a block that can be demapped independently of the rest."""

    points: NDArray[np.float64]
    labels: NDArray[np.uint8]
    dims: slice
    bits: slice


def parity_bit(parity_type: ParityType, info: ArrayLike) -> int:
    """Return b12 for an 11-bit information word.

    T1 negates the XOR of all eleven bits, T2 negates b3 XOR b6 XOR b9.
    """
    info = np.asarray(info, dtype=np.int64).ravel()
    if info.size != 11:
        raise BitLengthError(f"parity needs exactly 11 information bits, got {info.size}")
    return int(_parity_bits(ParityType(parity_type), info[None, :])[0])


def _parity_bits(parity_type: ParityType, info: NDArray[np.int64]) -> NDArray[np.uint8]:
    if parity_type == ParityType.T1:
        xor = np.bitwise_xor.reduce(info, axis=1)
    else:
        xor = info[:, 2] ^ info[:, 5] ^ info[:, 8]
    return (1 ^ xor).astype(np.uint8)


class FormatSpec(ABC):
    """How information bits become blocks of 4D slots."""

    name: str

    @property
    @abstractmethod
    def kind(self) -> FormatKind: ...

    @property
    @abstractmethod
    def bits_per_block(self) -> int: ...

    @property
    @abstractmethod
    def slots_per_block(self) -> int: ...

    @abstractmethod
    def _build_codebook(self) -> Codebook: ...

    @abstractmethod
    def demap_components(self) -> list[DemapComponent]: ...

    @abstractmethod
    def slot_constellations(self) -> list[Constellation]: ...

    @property
    def bits_per_4d(self) -> Fraction:
        return Fraction(self.bits_per_block, self.slots_per_block)

    @property
    def block_dimension(self) -> int:
        return SLOT_DIMENSION * self.slots_per_block

    @cached_property
    def codebook(self) -> Codebook:
        if self.bits_per_block > MAX_ENUMERABLE_BITS:
            raise FormatError(f"{self.name}: {self.bits_per_block}-bit blocks are too large to enumerate")
        codebook = self._build_codebook()
        codebook.points.setflags(write=False)
        codebook.labels.setflags(write=False)
        return codebook


@dataclass(frozen=True, eq=False)
class Plain4D(FormatSpec):
    constellation: Constellation
    name: str = ""

    def __post_init__(self):
        if self.constellation.dimension != SLOT_DIMENSION:
            raise FormatError(f"{self.constellation.name}: a 4D format needs a 4D constellation")
        if not self.name:
            object.__setattr__(self, "name", self.constellation.name)

    @property
    def kind(self) -> FormatKind:
        return FormatKind.PLAIN_4D

    @property
    def bits_per_block(self) -> int:
        return self.constellation.bits

    @property
    def slots_per_block(self) -> int:
        return 1

    def _build_codebook(self) -> Codebook:
        m = self.constellation.bits
        return Codebook(
            points=np.array(self.constellation.indexed_points),
            labels=int_to_bits(np.arange(2**m), m),
        )

    def demap_components(self) -> list[DemapComponent]:
        return [DemapComponent(self.codebook.points, self.codebook.labels, slice(0, 4), slice(0, self.bits_per_block))]

    def slot_constellations(self) -> list[Constellation]:
        return [self.constellation]


@dataclass(frozen=True, eq=False)
class Parity8D(FormatSpec):
    """Two 4D slots of a 64-point base; the 12th label bit is a parity of the other eleven."""

    base: Constellation
    parity_type: ParityType
    name: str = ""

    def __post_init__(self):
        if self.base.size != 64 or self.base.bits != 6 or self.base.dimension != SLOT_DIMENSION:
            raise FormatError(
                f"{self.base.name}: parity extension needs a 64-point 4D base with 6-bit labels, "
                f"got {self.base.size} points, {self.base.bits}-bit labels, {self.base.dimension} dimensions"
            )
        object.__setattr__(self, "parity_type", ParityType(self.parity_type))
        if not self.name:
            object.__setattr__(self, "name", f"8D-2048PRS-{self.parity_type.value}")

    @property
    def kind(self) -> FormatKind:
        return FormatKind.PARITY_8D

    @property
    def bits_per_block(self) -> int:
        return 11

    @property
    def slots_per_block(self) -> int:
        return 2

    def full_labels(self) -> NDArray[np.uint8]:
        """The 12-bit base-pair labels (b1..b12) of all 2048 codewords, in information-word order."""
        info = int_to_bits(np.arange(2**11), 11)
        parity = _parity_bits(self.parity_type, info.astype(np.int64))
        return np.concatenate([info, parity[:, None]], axis=1)

    def _build_codebook(self) -> Codebook:
        full = self.full_labels()
        base_points = self.base.indexed_points
        first = base_points[bits_to_int(full[:, :6])]
        second = base_points[bits_to_int(full[:, 6:])]
        return Codebook(points=np.concatenate([first, second], axis=1), labels=full[:, :11].copy())

    def demap_components(self) -> list[DemapComponent]:
        return [DemapComponent(self.codebook.points, self.codebook.labels, slice(0, 8), slice(0, 11))]

    def slot_constellations(self) -> list[Constellation]:
        return [self.base, self.base]


@dataclass(frozen=True, eq=False)
class TimeHybrid(FormatSpec):
    """Constellations used in turn, one slot each per block (a 1:1 cycle for two slots)."""

    slots: tuple[Constellation, ...]
    name: str = ""
    _offsets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        slots = tuple(self.slots)
        if len(slots) < 2:
            raise FormatError("a time-hybrid format needs at least two slot constellations")
        for slot in slots:
            if slot.dimension != SLOT_DIMENSION:
                raise FormatError(f"{slot.name}: time-hybrid slots must be 4D")
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "_offsets", tuple(np.cumsum([0, *[s.bits for s in slots]]).tolist()))
        if not self.name:
            object.__setattr__(self, "name", "TH-" + "+".join(s.name for s in slots))

    @property
    def kind(self) -> FormatKind:
        return FormatKind.TIME_HYBRID

    @property
    def bits_per_block(self) -> int:
        return int(self._offsets[-1])

    @property
    def slots_per_block(self) -> int:
        return len(self.slots)

    def _build_codebook(self) -> Codebook:
        m = self.bits_per_block
        labels = int_to_bits(np.arange(2**m), m)
        parts = []
        for i, slot in enumerate(self.slots):
            slot_bits = labels[:, self._offsets[i] : self._offsets[i + 1]]
            parts.append(slot.indexed_points[bits_to_int(slot_bits)])
        return Codebook(points=np.concatenate(parts, axis=1), labels=labels)

    def demap_components(self) -> list[DemapComponent]:
        # the block codebook is a product, so per-slot demapping gives the exact joint LLRs
        components = []
        for i, slot in enumerate(self.slots):
            components.append(
                DemapComponent(
                    points=slot.indexed_points,
                    labels=int_to_bits(np.arange(slot.size), slot.bits),
                    dims=slice(4 * i, 4 * (i + 1)),
                    bits=slice(self._offsets[i], self._offsets[i + 1]),
                )
            )
        return components

    def slot_constellations(self) -> list[Constellation]:
        return list(self.slots)


def plain_4d(constellation: Constellation) -> Plain4D:
    return Plain4D(constellation)


def extend_to_8d(base: Constellation, parity_type: ParityType) -> Parity8D:
    return Parity8D(base=base, parity_type=ParityType(parity_type))


def build_time_hybrid(slot_a: Constellation, slot_b: Constellation, name: str = "") -> TimeHybrid:
    """Alternate a 5-bit and a 6-bit 4D constellation slot by slot (5.5 bit/4D)."""
    if slot_a.bits != 5 or slot_b.bits != 6:
        raise FormatError(f"time-hybrid slots must carry 5 and 6 bits, got {slot_a.bits} and {slot_b.bits}")
    return TimeHybrid(slots=(slot_a, slot_b), name=name)


def _bit_blocks(fmt: FormatSpec, bits: ArrayLike) -> NDArray[np.uint8]:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % fmt.bits_per_block:
        raise BitLengthError(
            f"{fmt.name}: {bits.size} bits is not a multiple of the {fmt.bits_per_block}-bit block size"
        )
    if np.any(bits > 1):
        raise BitLengthError(f"{fmt.name}: bit stream must contain only 0 and 1")
    return bits.reshape(-1, fmt.bits_per_block)


def encode_indices(fmt: FormatSpec, bits: ArrayLike) -> NDArray[np.int64]:
    """Information-word index of each block, b1 of the block most significant."""
    return bits_to_int(_bit_blocks(fmt, bits))


def symbols_from_indices(fmt: FormatSpec, indices: ArrayLike) -> Symbol4DStream:
    blocks = fmt.codebook.points[np.asarray(indices, dtype=np.int64)]
    return Symbol4DStream(blocks.reshape(-1, SLOT_DIMENSION))


def map_bits(fmt: FormatSpec, bits: ArrayLike) -> Symbol4DStream:
    return symbols_from_indices(fmt, encode_indices(fmt, bits))


def received_blocks(fmt: FormatSpec, stream: Symbol4DStream) -> NDArray[np.float64]:
    if len(stream) % fmt.slots_per_block:
        raise BitLengthError(f"{fmt.name}: {len(stream)} slots do not fill whole {fmt.slots_per_block}-slot blocks")
    return stream.slots.reshape(-1, fmt.block_dimension)


def hard_decision(fmt: FormatSpec, stream: Symbol4DStream) -> NDArray[np.uint8]:
    """Nearest-codeword decision per block, ties going to the lowest label index."""
    blocks = received_blocks(fmt, stream)
    decided = np.zeros((blocks.shape[0], fmt.bits_per_block), dtype=np.uint8)
    for component in fmt.demap_components():
        y = blocks[:, component.dims]
        sq = np.sum(component.points**2, axis=1)
        for start in range(0, y.shape[0], 512):
            chunk = y[start : start + 512]
            d2 = sq[None, :] - 2.0 * chunk @ component.points.T
            # argmin returns the first minimum, i.e. the lowest label index
            decided[start : start + 512, component.bits] = component.labels[np.argmin(d2, axis=1)]
    return decided.ravel()


def min_euclidean_distance(fmt: FormatSpec) -> float:
    return min_distance(fmt.codebook.points)


def polarisation_identical_count(fmt: FormatSpec) -> int:
    """Codewords whose X and Y complex symbols coincide in every slot of the block."""
    slots = fmt.codebook.points.reshape(fmt.codebook.size, fmt.slots_per_block, SLOT_DIMENSION)
    same = np.all(np.abs(slots[:, :, :2] - slots[:, :, 2:]) <= POLARISATION_TOLERANCE, axis=(1, 2))
    return int(np.count_nonzero(same))


def constant_modulus_variance(fmt: FormatSpec) -> float:
    slots = fmt.codebook.points.reshape(-1, SLOT_DIMENSION)
    return float(np.var(np.sum(slots**2, axis=1)))


def parity_violations(fmt: Parity8D) -> int:
    """Count codewords whose 12-bit base-pair index breaks the parity equation."""
    base_points = fmt.base.indexed_points
    first = fmt.codebook.points[:, :4]
    second = fmt.codebook.points[:, 4:]
    first_index = _lookup(base_points, first)
    second_index = _lookup(base_points, second)
    full = np.concatenate([int_to_bits(first_index, 6), int_to_bits(second_index, 6)], axis=1).astype(np.int64)
    expected = _parity_bits(fmt.parity_type, full[:, :11])
    return int(np.count_nonzero(expected != full[:, 11]))


def _lookup(points: NDArray[np.float64], targets: NDArray[np.float64]) -> NDArray[np.int64]:
    d2 = np.sum((targets[:, None, :] - points[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def unique_codeword_count(fmt: FormatSpec) -> int:
    return int(np.unique(np.round(fmt.codebook.points, 12), axis=0).shape[0])


def format_summary(fmt: FormatSpec) -> dict:
    summary = {
        "name": fmt.name,
        "kind": fmt.kind.value,
        "bits_per_block": fmt.bits_per_block,
        "slots_per_block": fmt.slots_per_block,
        "bits_per_4d": str(fmt.bits_per_4d),
        "codewords": fmt.codebook.size,
        "distinct_codewords": unique_codeword_count(fmt),
        "min_euclidean_distance": min_euclidean_distance(fmt),
        "polarisation_identical_count": polarisation_identical_count(fmt),
        "constant_modulus_variance": constant_modulus_variance(fmt),
    }
    if isinstance(fmt, Parity8D):
        summary["parity_violations"] = parity_violations(fmt)
    return summary
