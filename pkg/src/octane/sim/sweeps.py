import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from octane import toolkit_version
from octane.config import SweepConfig
from octane.enums import SweepAxis
from octane.exceptions import SweepError
from octane.metrics.gmi import gmi_monte_carlo
from octane.modfmt.registry import build_format, check_format_ids, resolve_ring_ratio, uses_ring_ratio
from octane.sim.chain import run_distances
from octane.sim.results import SweepResult, SweepRow

log = logging.getLogger(__name__)
error_console = Console(stderr=True)


@dataclass(frozen=True)
class RowTask:
    """Independent unit of work producing one or more sweep rows; picklable for worker processes."""

    format_id: str
    axis: SweepAxis
    axis_values: tuple[float, ...]
    config: dict[str, Any]


def run_task(task: RowTask) -> list[SweepRow]:
    config = SweepConfig.from_dict(task.config)
    sweep = config.sweep
    fmt = build_format(task.format_id, config.format)

    if task.axis == SweepAxis.SNR_DB:
        reports = [
            gmi_monte_carlo(fmt, snr_db, sweep.n_blocks, sweep.seed, sweep.llr_method) for snr_db in task.axis_values
        ]
    elif task.axis == SweepAxis.DISTANCE_SPANS:
        reports = run_distances(fmt, config, [int(n) for n in task.axis_values])
    else:
        reports = [
            run_distances(fmt, config, [config.link.n_spans], launch_power_dbm=power)[0] for power in task.axis_values
        ]
    return [
        SweepRow.from_report(task.format_id, task.axis.value, value, report, sweep.seed)
        for value, report in zip(task.axis_values, reports)
    ]


def plan_tasks(config: SweepConfig) -> list[RowTask]:
    """AWGN and power rows run one task per point; a distance curve is one task, tapped span by span."""
    axis = config.sweep.axis
    points = config.points()
    data = config.to_dict()
    tasks = []
    for format_id in config.format.formats:
        if axis == SweepAxis.DISTANCE_SPANS:
            tasks.append(RowTask(format_id, axis, tuple(points), data))
        else:
            tasks.extend(RowTask(format_id, axis, (point,), data) for point in points)
    return tasks


def _resolve_ring_ratio(config: SweepConfig) -> SweepConfig:
    if config.format.ring_ratio is not None or not uses_ring_ratio(config.format.formats):
        return config
    ring_ratio = resolve_ring_ratio(config.format, config.sweep.threshold)
    return replace(config, format=replace(config.format, ring_ratio=ring_ratio))


def execute(config: SweepConfig, workers: int = 1, show_progress: bool = False) -> SweepResult:
    """Run every row of a sweep, serially or on `workers` processes, and reduce in a fixed order."""
    if workers < 1:
        raise SweepError(f"workers must be >= 1, got {workers}")
    check_format_ids(config.format.formats)
    config = _resolve_ring_ratio(config)
    tasks = plan_tasks(config)
    log.info("Running %d %s tasks on %d worker(s)", len(tasks), config.sweep.axis.value, workers)

    progress = Progress(
        TextColumn("{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=error_console,
        transient=True,
        disable=not show_progress,
    )
    rows: list[SweepRow] = []
    with progress:
        tracker = progress.add_task(config.sweep.axis.value, total=len(tasks))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for task_rows in pool.map(run_task, tasks):
                    rows.extend(task_rows)
                    progress.advance(tracker)
        else:
            for task in tasks:
                rows.extend(run_task(task))
                progress.advance(tracker)

    order = {format_id: i for i, format_id in enumerate(config.format.formats)}
    rows.sort(key=lambda row: (order[row.format], row.axis_value))
    metadata = {
        "config": config.to_dict(),
        "toolkit_version": toolkit_version(),
        "seed": config.sweep.seed,
        "axis": config.sweep.axis.value,
    }
    return SweepResult(rows=rows, metadata=metadata)


def _sweep(config: SweepConfig, axis: SweepAxis, workers: int, show_progress: bool) -> SweepResult:
    if config.sweep.axis != axis:
        raise SweepError(f"expected a {axis.value} sweep, the configuration sweeps {config.sweep.axis.value}")
    return execute(config, workers, show_progress)


def awgn_sweep(config: SweepConfig, workers: int = 1, show_progress: bool = False) -> SweepResult:
    return _sweep(config, SweepAxis.SNR_DB, workers, show_progress)


def reach_sweep(config: SweepConfig, workers: int = 1, show_progress: bool = False) -> SweepResult:
    return _sweep(config, SweepAxis.DISTANCE_SPANS, workers, show_progress)


def launch_power_sweep(config: SweepConfig, workers: int = 1, show_progress: bool = False) -> SweepResult:
    """NGMI versus total launch power at `link.n_spans` spans; every power reuses the same noise seeds."""
    return _sweep(config, SweepAxis.LAUNCH_POWER_DBM, workers, show_progress)
