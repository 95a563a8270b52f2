import json
import logging
from pathlib import Path
from typing import Callable, List, Optional

import typer
import yaml
from rich.console import Console
from rich.logging import RichHandler
from typing_extensions import Annotated

from octane import toolkit_version
from octane.config import RunManifest, SweepConfig, load_config
from octane.enums import Subcommand, SweepAxis
from octane.exceptions import ConfigError, OctaneError, ThresholdNotReachedError
from octane.modfmt.formats import format_summary
from octane.modfmt.registry import build_format, check_format_ids
from octane.sim.reach import compare_reach, print_reach_table
from octane.sim.results import SweepResult
from octane.sim.sweeps import awgn_sweep, launch_power_sweep, reach_sweep

console = Console()
error_console = Console(stderr=True)

EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3
CONSTANT_MODULUS_TOLERANCE = 1e-12

app = typer.Typer(
    help="Simulate multidimensional modulation formats over AWGN and long-haul WDM fibre links",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
    context_settings={"help_option_names": ["-h", "--help"]},
)

SWEEPS: dict[Subcommand, tuple[SweepAxis, Callable[..., SweepResult]]] = {
    Subcommand.AWGN_SWEEP: (SweepAxis.SNR_DB, awgn_sweep),
    Subcommand.REACH_SWEEP: (SweepAxis.DISTANCE_SPANS, reach_sweep),
    Subcommand.POWER_SWEEP: (SweepAxis.LAUNCH_POWER_DBM, launch_power_sweep),
}

ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", "-c", help="Configuration file with [format], [link] and [sweep] sections")
]
ProfileOption = Annotated[Optional[str], typer.Option("--profile", help="Packaged configuration profile (desk, full)")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="File to write the CSV or report to")]
SetOption = Annotated[
    Optional[List[str]], typer.Option("--set", "-s", help="Override a configuration value, key=value (repeatable)")
]
WorkersOption = Annotated[
    int, typer.Option("--workers", "-w", min=1, help="Worker processes for sweep rows", envvar="OCTANE_WORKERS")
]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Override the configured random seed")]
FormatOption = Annotated[
    Optional[List[str]], typer.Option("--format", "-f", help="Format identifier to use instead of the configured list")
]
JsonOption = Annotated[bool, typer.Option("--json", "-j", help="Output in JSON format")]


def resolve_config(manifest: RunManifest) -> SweepConfig:
    overrides = list(manifest.overrides)
    if manifest.seed is not None:
        overrides.append(f"sweep.seed={manifest.seed}")
    if manifest.formats:
        overrides.append(f"format.formats={','.join(manifest.formats)}")
    config = load_config(manifest.config_path, manifest.profile, overrides)
    if manifest.subcommand in SWEEPS:
        axis, _ = SWEEPS[manifest.subcommand]
        config = config.with_axis(axis)
    return config


def print_resolved_config(config: SweepConfig) -> None:
    error_console.print("[green]-- Resolved configuration --[/green]")
    error_console.print(yaml.safe_dump(config.to_dict(), sort_keys=False), end="", markup=False, highlight=False)


def format_report(summary: dict) -> str:
    modulus = "PASS" if summary["constant_modulus_variance"] < CONSTANT_MODULUS_TOLERANCE else "FAIL"
    lines = [
        summary["name"],
        f"  kind: {summary['kind']}",
        f"  codewords: {summary['codewords']} ({summary['distinct_codewords']} distinct)",
        f"  bits per block: {summary['bits_per_block']} over {summary['slots_per_block']} slot(s)",
        f"  bits per 4D: {summary['bits_per_4d']}",
        f"  min ED: {summary['min_euclidean_distance']:.6f}",
        f"  polarisation-identical codewords: {summary['polarisation_identical_count']}",
        f"  constant modulus: {modulus} (variance {summary['constant_modulus_variance']:.3e})",
    ]
    if "parity_violations" in summary:
        parity = "PASS" if summary["parity_violations"] == 0 else "FAIL"
        lines.append(f"  parity check: {parity} ({summary['parity_violations']} violations)")
    return "\n".join(lines) + "\n"


def inspect_formats(config: SweepConfig, output_path: Optional[Path], json_output: bool) -> None:
    check_format_ids(config.format.formats)
    summaries = [format_summary(build_format(format_id, config.format)) for format_id in config.format.formats]
    if json_output:
        for summary in summaries:
            print(json.dumps(summary))  # noqa: T201
    report = "\n".join(format_report(summary) for summary in summaries)
    if output_path is not None:
        output_path.write_text(report)
        error_console.print(f"[green]-- Report written to {output_path} --[/green]")
    elif not json_output:
        console.print(report, end="", markup=False, highlight=False)


def run_sweep(manifest: RunManifest, config: SweepConfig) -> None:
    _, sweep = SWEEPS[manifest.subcommand]
    result = sweep(config, workers=manifest.workers, show_progress=not manifest.json_output)

    if manifest.output_path is None and not manifest.json_output:
        print(result.to_csv(), end="")  # noqa: T201
        return
    if manifest.output_path is not None:
        result.write_csv(manifest.output_path)
        error_console.print(f"[green]-- {len(result.rows)} rows written to {manifest.output_path} --[/green]")
    result.print_to_console(manifest.json_output)

    if manifest.subcommand == Subcommand.REACH_SWEEP and config.sweep.baseline in result.formats():
        try:
            comparisons = compare_reach(result, config.sweep.baseline, config.sweep.threshold)
        except ThresholdNotReachedError as e:
            error_console.print(f"[yellow]-- No reach comparison: {e} --[/yellow]")
            return
        print_reach_table(comparisons, config.sweep.baseline, manifest.json_output)


def run(manifest: RunManifest) -> int:
    """Execute one subcommand and return its exit status."""
    try:
        config = resolve_config(manifest)
        print_resolved_config(config)
        if manifest.subcommand == Subcommand.INSPECT_FORMAT:
            inspect_formats(config, manifest.output_path, manifest.json_output)
        else:
            run_sweep(manifest, config)
    except ConfigError as e:
        error_console.print(f"[red]-- Configuration error: {e} --[/red]")
        return EXIT_CONFIG_ERROR
    except (OctaneError, OSError) as e:
        error_console.print(f"[red]-- {type(e).__name__}: {e} --[/red]")
        return EXIT_RUNTIME_ERROR
    return 0


def _manifest(subcommand: Subcommand, **options) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        config_path=options["config_path"],
        profile=options["profile"],
        overrides=options["overrides"] or [],
        output_path=options["output_path"],
        workers=options.get("workers", 1),
        seed=options.get("seed"),
        formats=options["formats"] or [],
        json_output=options["json_output"],
    )


@app.command(name="inspect-format")
def inspect_format(
    config_path: ConfigOption = None,
    profile: ProfileOption = None,
    output_path: OutOption = None,
    overrides: SetOption = None,
    formats: FormatOption = None,
    json_output: JsonOption = False,
):
    """Report codeword count, minimum distance, polarisation and modulus properties of formats."""
    manifest = _manifest(
        Subcommand.INSPECT_FORMAT,
        config_path=config_path,
        profile=profile,
        output_path=output_path,
        overrides=overrides,
        formats=formats,
        json_output=json_output,
    )
    raise typer.Exit(code=run(manifest))


def _sweep_command(subcommand: Subcommand, help_text: str):
    def command(  # noqa: PLR0913
        config_path: ConfigOption = None,
        profile: ProfileOption = None,
        output_path: OutOption = None,
        overrides: SetOption = None,
        workers: WorkersOption = 1,
        seed: SeedOption = None,
        formats: FormatOption = None,
        json_output: JsonOption = False,
    ):
        manifest = _manifest(
            subcommand,
            config_path=config_path,
            profile=profile,
            output_path=output_path,
            overrides=overrides,
            workers=workers,
            seed=seed,
            formats=formats,
            json_output=json_output,
        )
        raise typer.Exit(code=run(manifest))

    command.__doc__ = help_text
    app.command(name=subcommand.value)(command)


_sweep_command(Subcommand.AWGN_SWEEP, "NGMI versus SNR per 4D slot over an AWGN channel.")
_sweep_command(Subcommand.REACH_SWEEP, "NGMI of the centre WDM channel versus span count, with reach at threshold.")
_sweep_command(Subcommand.POWER_SWEEP, "NGMI of the centre WDM channel versus total launch power.")


def version_callback(show_version: bool):
    if show_version:
        typer.echo(f"octane {toolkit_version()}")
        raise typer.Exit()


@app.callback()
def main(
    debug: bool = typer.Option(
        False, "--debug", help="Enable debug logging and pretty exceptions", envvar="OCTANE_DEBUG"
    ),
    version: bool = typer.Option(None, "--version", "-v", callback=version_callback),
):
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=error_console, show_path=False)],
        force=True,
    )
    if debug:
        app.pretty_exceptions_enable = True


if __name__ == "__main__":
    app()
