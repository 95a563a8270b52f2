import logging
import typing
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from importlib.resources import files
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from mashumaro import DataClassDictMixin

from octane.enums import LlrMethod, Qam8Geometry, Subcommand, SweepAxis
from octane.exceptions import ConfigError

log = logging.getLogger(__name__)

AUTO = "auto"
PROFILES_PACKAGE = "octane.profiles"

DEFAULT_FORMATS = ["pm8qam", "8d2048prs-t1", "8d2048prs-t2", "th4d-2a8psk"]


@dataclass
class FormatSection(DataClassDictMixin):
    formats: list[str] = field(default_factory=lambda: list(DEFAULT_FORMATS))
    # empty means the packaged 4D-64PRS fixture
    constellation_file: str = ""
    qam8_geometry: Qam8Geometry = Qam8Geometry.RECT
    # None means "auto": optimized once per run at the NGMI threshold
    ring_ratio: Optional[float] = None


@dataclass
class LinkSection(DataClassDictMixin):
    span_length_km: float = 75.0
    alpha_db_per_km: float = 0.2
    dispersion_ps_nm_km: float = 17.0
    gamma_per_w_km: float = 1.3
    step_km: float = 0.1
    # None means "auto": gain equals span loss
    amplifier_gain_db: Optional[float] = None
    noise_figure_db: float = 5.0
    wavelength_nm: float = 1550.116
    # aggregate over the comb; the per-channel power of 9.5 dBm over 11 channels
    launch_power_dbm: float = 3.86
    n_spans: int = 126


@dataclass
class SweepSection(DataClassDictMixin):
    axis: SweepAxis = SweepAxis.SNR_DB
    # empty means the per-axis list below
    axis_points: list[float] = field(default_factory=list)
    snr_db_points: list[float] = field(default_factory=lambda: [float(v) for v in range(16)])
    distance_spans_points: list[float] = field(
        default_factory=lambda: [0.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0, 150.0]
    )
    launch_power_dbm_points: list[float] = field(default_factory=lambda: [5.5, 7.5, 9.5, 11.5, 13.5])
    n_blocks: int = 100_000
    seed: int = 1
    n_symbols: int = 65_536
    samples_per_symbol: int = 4
    rolloff: float = 0.01
    symbol_rate_gbd: float = 41.79
    channels: int = 3
    spacing_ghz: float = 50.0
    decorrelation_delays_symbols: list[int] = field(default_factory=lambda: [10_200, 40_800])
    threshold: float = 0.85
    baseline: str = "pm8qam"
    llr_method: LlrMethod = LlrMethod.EXACT


@dataclass
class SweepConfig(DataClassDictMixin):
    format: FormatSection = field(default_factory=FormatSection)
    link: LinkSection = field(default_factory=LinkSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def points(self) -> list[float]:
        """Axis points of the configured axis, falling back to the per-axis list."""
        if self.sweep.axis_points:
            return list(self.sweep.axis_points)
        return list(getattr(self.sweep, f"{self.sweep.axis.value}_points"))

    def with_axis(self, axis: SweepAxis) -> "SweepConfig":
        """Copy of the config set up for `axis`, axis_points resolved."""
        axis = SweepAxis(axis)
        if axis == self.sweep.axis and self.sweep.axis_points:
            points = list(self.sweep.axis_points)
        else:
            points = list(getattr(self.sweep, f"{axis.value}_points"))
        resolved = replace(self, sweep=replace(self.sweep, axis=axis, axis_points=points))
        validate_config(resolved)
        if axis != SweepAxis.SNR_DB:
            _check_grid_capacity(resolved.sweep)
        return resolved


def _check_grid_capacity(sweep: "SweepSection") -> None:
    symbol_rate = sweep.symbol_rate_gbd * 1e9
    edge = (sweep.channels // 2) * sweep.spacing_ghz * 1e9 + (1 + sweep.rolloff) * symbol_rate / 2
    if edge > sweep.samples_per_symbol * symbol_rate / 2:
        needed = int(np.ceil(2 * edge / symbol_rate))
        raise ConfigError(
            f"samples_per_symbol: {sweep.samples_per_symbol} cannot hold {sweep.channels} channels "
            f"at {sweep.spacing_ghz} GHz spacing, at least {needed} is needed",
            key="samples_per_symbol",
        )


SECTIONS: dict[str, type] = {
    "format": FormatSection,
    "link": LinkSection,
    "sweep": SweepSection,
}


@dataclass
class RunManifest:
    subcommand: Subcommand
    config_path: Optional[Path] = None
    profile: Optional[str] = None
    overrides: list[str] = field(default_factory=list)
    output_path: Optional[Path] = None
    workers: int = 1
    seed: Optional[int] = None
    formats: list[str] = field(default_factory=list)
    json_output: bool = False


def _field_types(section_cls: type) -> dict[str, Any]:
    hints = typing.get_type_hints(section_cls)
    return {f.name: hints[f.name] for f in fields(section_cls)}


def _convert_scalar(kind: Any, raw: str, key: str, line: Optional[int]) -> Any:
    raw = raw.strip()
    try:
        if isinstance(kind, type) and issubclass(kind, Enum):
            return kind(raw)
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
    except ValueError:
        pass
    expected = kind.__name__ if isinstance(kind, type) else str(kind)
    if isinstance(kind, type) and issubclass(kind, Enum):
        expected = "one of " + ", ".join(member.value for member in kind)
    raise ConfigError(f"{key}: expected {expected}, got '{raw}'", line=line, key=key)


def convert_value(section: str, key: str, raw: str, line: Optional[int] = None) -> Any:
    """Convert the text of `section.key` to its schema type."""
    types = _field_types(SECTIONS[section])
    if key not in types:
        raise ConfigError(f"unknown key '{key}' in section [{section}]", line=line, key=key)
    kind = types[key]
    origin = typing.get_origin(kind)
    if origin is list:
        (item_kind,) = typing.get_args(kind)
        items = [item for item in raw.split(",") if item.strip()]
        return [_convert_scalar(item_kind, item, key, line) for item in items]
    if origin is Union:
        # Optional[...] fields accept "auto"
        if raw.strip().lower() == AUTO:
            return None
        (inner,) = [arg for arg in typing.get_args(kind) if arg is not type(None)]
        return _convert_scalar(inner, raw, key, line)
    return _convert_scalar(kind, raw, key, line)


def _locate_key(key: str) -> tuple[str, str]:
    if "." in key:
        section, name = key.split(".", 1)
        if section not in SECTIONS:
            raise ConfigError(f"unknown section '{section}' in key '{key}'", key=key)
        return section, name
    owners = [section for section, cls in SECTIONS.items() if key in _field_types(cls)]
    if not owners:
        raise ConfigError(f"unknown key '{key}'", key=key)
    return owners[0], key


def _raise_at(key: str, msg: str, lines: dict[str, int]) -> None:
    raise ConfigError(f"{key}: {msg}", line=lines.get(key), key=key)


def validate_config(config: SweepConfig, lines: Optional[dict[str, int]] = None) -> SweepConfig:  # noqa: PLR0912
    """Check every value against its constraint; `lines` maps keys to source lines."""
    lines = lines or {}
    fmt, link, sweep = config.format, config.link, config.sweep

    if not fmt.formats:
        _raise_at("formats", "at least one format is required", lines)
    if len(set(fmt.formats)) != len(fmt.formats):
        _raise_at("formats", "format identifiers must be distinct", lines)
    if fmt.ring_ratio is not None and not 0 < fmt.ring_ratio <= 1:
        _raise_at("ring_ratio", "must lie in (0, 1] or be auto", lines)

    for key in ("span_length_km", "step_km"):
        if not getattr(link, key) > 0:
            _raise_at(key, "must be > 0", lines)
    if link.step_km > link.span_length_km:
        _raise_at("step_km", "must not exceed span_length_km", lines)
    for key in ("alpha_db_per_km", "gamma_per_w_km"):
        if getattr(link, key) < 0:
            _raise_at(key, "must be >= 0", lines)
    if link.amplifier_gain_db is not None and link.amplifier_gain_db < 0:
        _raise_at("amplifier_gain_db", "must be >= 0 or auto", lines)
    if not link.wavelength_nm > 0:
        _raise_at("wavelength_nm", "must be > 0", lines)
    if link.n_spans < 1:
        _raise_at("n_spans", "must be >= 1", lines)

    for key in ("axis_points", "snr_db_points", "distance_spans_points", "launch_power_dbm_points"):
        points = getattr(sweep, key)
        if any(b <= a for a, b in zip(points, points[1:])):
            _raise_at(key, "points must be strictly increasing", lines)
    if any(p < 0 or not float(p).is_integer() for p in sweep.distance_spans_points):
        _raise_at("distance_spans_points", "span counts must be non-negative integers", lines)
    if sweep.n_blocks < 1000:
        _raise_at("n_blocks", "must be >= 1000", lines)
    if sweep.n_symbols < 2 or sweep.n_symbols % 2:
        _raise_at("n_symbols", "must be a positive even number of 4D slots", lines)
    if sweep.samples_per_symbol < 2:
        _raise_at("samples_per_symbol", "must be >= 2", lines)
    if not 0 < sweep.rolloff <= 1:
        _raise_at("rolloff", "must lie in (0, 1]", lines)
    if not sweep.symbol_rate_gbd > 0:
        _raise_at("symbol_rate_gbd", "must be > 0", lines)
    if sweep.channels < 1:
        _raise_at("channels", "must be >= 1", lines)
    if not sweep.spacing_ghz > 0:
        _raise_at("spacing_ghz", "must be > 0", lines)
    if any(d < 0 for d in sweep.decorrelation_delays_symbols):
        _raise_at("decorrelation_delays_symbols", "delays must be >= 0", lines)
    if sweep.channels > 1 and not sweep.decorrelation_delays_symbols:
        _raise_at("decorrelation_delays_symbols", "at least one delay is needed for several channels", lines)
    if not 0 < sweep.threshold < 1:
        _raise_at("threshold", "must lie in (0, 1)", lines)
    return config


def _parse_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    raw: dict[str, dict[str, tuple[str, int]]] = {name: {} for name in SECTIONS}
    section: Optional[str] = None
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header '{line}'", line=line_number)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=line_number)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=line_number)
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            raise ConfigError(f"key '{key}' appears before any section", line=line_number, key=key)
        if key in raw[section]:
            raise ConfigError(
                f"duplicate key '{key}' (first on line {raw[section][key][1]})", line=line_number, key=key
            )
        raw[section][key] = (value, line_number)
    return raw


def parse_config(text: str) -> SweepConfig:
    """Parse the sectioned `key = value` format into a validated SweepConfig."""
    raw = _parse_sections(text)
    lines: dict[str, int] = {}
    values: dict[str, dict[str, Any]] = {}
    for section, entries in raw.items():
        values[section] = {}
        for key, (value, line_number) in entries.items():
            values[section][key] = convert_value(section, key, value, line_number)
            lines[key] = line_number

    config = SweepConfig(
        format=FormatSection(**values["format"]),
        link=LinkSection(**values["link"]),
        sweep=SweepSection(**values["sweep"]),
    )
    return validate_config(config, lines)


def apply_overrides(config: SweepConfig, overrides: list[str]) -> SweepConfig:
    """Apply `key=value` overrides (bare key or `section.key`) on top of a config."""
    data = config.to_dict()
    for override in overrides:
        if "=" not in override:
            raise ConfigError(f"override '{override}' is not of the form key=value")
        key, value = (part.strip() for part in override.split("=", 1))
        section, name = _locate_key(key)
        converted = convert_value(section, name, value)
        data[section][name] = converted.value if isinstance(converted, Enum) else converted
        log.debug("Override %s.%s = %r", section, name, converted)
    return validate_config(SweepConfig.from_dict(data))


def available_profiles() -> list[str]:
    return sorted(
        entry.name.removesuffix(".ini") for entry in files(PROFILES_PACKAGE).iterdir() if entry.name.endswith(".ini")
    )


def load_profile(name: str) -> SweepConfig:
    resource = files(PROFILES_PACKAGE).joinpath(f"{name}.ini")
    if not resource.is_file():
        raise ConfigError(f"unknown profile '{name}', available: {', '.join(available_profiles())}")
    return parse_config(resource.read_text())


def load_config(
    config_path: Optional[Path] = None, profile: Optional[str] = None, overrides: Optional[list[str]] = None
) -> SweepConfig:
    if config_path is not None and profile is not None:
        raise ConfigError("--config and --profile are mutually exclusive")
    if config_path is not None:
        if not config_path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        config = parse_config(config_path.read_text())
    elif profile is not None:
        config = load_profile(profile)
    else:
        config = validate_config(SweepConfig())
    return apply_overrides(config, overrides or [])
