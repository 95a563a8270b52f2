import tempfile
from pathlib import Path

import pytest

from octane.config import SweepConfig
from octane.exceptions import SweepError
from octane.metrics.gmi import GmiReport
from octane.sim.results import (
    CSV_COLUMNS,
    METADATA_PREFIX,
    SweepResult,
    SweepRow,
    config_from_metadata,
    read_sweep_csv,
    read_sweep_csv_file,
)


@pytest.fixture
def result():
    report = GmiReport(per_bit_mi=[0.9, 0.8], gmi=1.7, ngmi=0.85, m=2, snr_db=7.25, n_blocks=1000)
    rows = [
        SweepRow.from_report("pmqpsk", "snr_db", value, report, seed=3)
        for value in (0.0, 2.5)
    ]
    return SweepResult(rows=rows, metadata={"axis": "snr_db", "seed": 3, "config": SweepConfig().to_dict()})


def test_csv_layout(result):
    lines = result.to_csv().splitlines()
    assert lines[0].startswith(METADATA_PREFIX)
    header = next(line for line in lines if not line.startswith(METADATA_PREFIX))
    assert header.split(",") == CSV_COLUMNS
    assert lines[-1].startswith("pmqpsk,snr_db,2.5,1.7,0.85,7.25,1000,3")


def test_read_back(result):
    restored = read_sweep_csv(result.to_csv())
    assert [r.to_dict() for r in restored.rows] == [r.to_dict() for r in result.rows]
    assert restored.metadata == result.metadata
    assert restored.formats() == ["pmqpsk"]


def test_file_round_trip(result):
    with tempfile.TemporaryDirectory() as tmpdir:
        path = Path(tmpdir) / "sweep.csv"
        result.write_csv(path)
        assert read_sweep_csv_file(path).metadata["seed"] == 3


def test_config_from_metadata(result):
    assert config_from_metadata(read_sweep_csv(result.to_csv())) == SweepConfig()


def test_config_is_required():
    with pytest.raises(SweepError):
        config_from_metadata(SweepResult(rows=[]))


def test_unexpected_header():
    with pytest.raises(SweepError, match="header"):
        read_sweep_csv("format,gmi\npm8qam,1.0\n")


def test_curve(result):
    axis, ngmi = result.curve("pmqpsk")
    assert list(axis) == [0.0, 2.5]
    assert list(ngmi) == [0.85, 0.85]
    with pytest.raises(SweepError, match="pm8qam"):
        result.curve("pm8qam")


def test_json_lines(result, capsys):
    result.print_to_console(json_output=True)
    assert capsys.readouterr().out.count("\n") == 2
