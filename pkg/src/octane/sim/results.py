import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np
from numpy.typing import NDArray
from rich.console import Console
from rich.table import Table

from octane.config import SweepConfig
from octane.exceptions import SweepError
from octane.metrics.gmi import GmiReport

console = Console()

CSV_COLUMNS = ["format", "axis_name", "axis_value", "gmi", "ngmi", "snr_db", "n_blocks", "seed"]
METADATA_PREFIX = "# metadata: "


@dataclass
class SweepRow:
    format: str
    axis_name: str
    axis_value: float
    gmi: float
    ngmi: float
    snr_db: float
    n_blocks: int
    seed: int
    per_bit_mi: list[float] = field(default_factory=list)
    # not part of the CSV, so 0 for rows read back from a file
    ngmi_std_error: float = 0.0

    @classmethod
    def from_report(cls, format_id: str, axis_name: str, axis_value: float, report: GmiReport, seed: int) -> "SweepRow":
        return cls(
            format=format_id,
            axis_name=axis_name,
            axis_value=float(axis_value),
            gmi=report.gmi,
            ngmi=report.ngmi,
            snr_db=report.snr_db,
            n_blocks=report.n_blocks,
            seed=seed,
            per_bit_mi=list(report.per_bit_mi),
            ngmi_std_error=report.gmi_std_error / report.m,
        )

    def to_dict(self) -> dict:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict[str, Any] = field(default_factory=dict)

    def formats(self) -> list[str]:
        return list(dict.fromkeys(row.format for row in self.rows))

    def curve(self, format_id: str) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(axis values, NGMI) of one format, sorted by axis value."""
        rows = sorted((row for row in self.rows if row.format == format_id), key=lambda row: row.axis_value)
        if not rows:
            raise SweepError(f"format '{format_id}' is not in the result (have: {', '.join(self.formats())})")
        return np.array([row.axis_value for row in rows]), np.array([row.ngmi for row in rows])

    def to_csv(self) -> str:
        buffer = io.StringIO()
        for key, value in self.metadata.items():
            buffer.write(f"{METADATA_PREFIX}{key}={json.dumps(value, sort_keys=True)}\n")
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row.to_dict())
        return buffer.getvalue()

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv())

    def print_to_console(self, json_output: bool = False):
        if json_output:
            for row in self.rows:
                print(json.dumps(row.to_dict()))  # noqa: T201
            return

        axis_name = self.rows[0].axis_name if self.rows else "axis"
        table = Table(title=f"NGMI vs {axis_name}")
        for column in ("format", axis_name, "GMI", "NGMI", "SNR (dB)"):
            table.add_column(column, justify="left" if column == "format" else "right")
        for row in self.rows:
            table.add_row(row.format, f"{row.axis_value:g}", f"{row.gmi:.4f}", f"{row.ngmi:.4f}", f"{row.snr_db:.2f}")
        console.print(table)


def read_sweep_csv(text: str) -> SweepResult:
    metadata: dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith(METADATA_PREFIX):
            key, _, value = line[len(METADATA_PREFIX) :].partition("=")
            metadata[key] = json.loads(value)
        else:
            body.append(line)

    reader = csv.DictReader(body)
    if reader.fieldnames != CSV_COLUMNS:
        raise SweepError(f"unexpected CSV header {reader.fieldnames}, expected {CSV_COLUMNS}")
    rows = [
        SweepRow(
            format=record["format"],
            axis_name=record["axis_name"],
            axis_value=float(record["axis_value"]),
            gmi=float(record["gmi"]),
            ngmi=float(record["ngmi"]),
            snr_db=float(record["snr_db"]),
            n_blocks=int(record["n_blocks"]),
            seed=int(record["seed"]),
        )
        for record in reader
    ]
    return SweepResult(rows=rows, metadata=metadata)


def read_sweep_csv_file(path: Union[str, Path]) -> SweepResult:
    return read_sweep_csv(Path(path).read_text())


def config_from_metadata(result: SweepResult) -> SweepConfig:
    """The exact configuration a result was produced with."""
    if "config" not in result.metadata:
        raise SweepError("result metadata carries no configuration")
    return SweepConfig.from_dict(result.metadata["config"])
