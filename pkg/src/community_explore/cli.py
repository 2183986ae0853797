# -*- coding: utf-8 -*-
"""Command line interface (Typer)."""

import contextlib
import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import typer
import yaml
from rich.console import Console
from rich.progress import Progress
from rich.table import Table

from .core.adaptive import expected_reward_greedy, optimal_policy_value_oracle
from .core.model import make_instance
from .core.nonadaptive import brute_force_optimal, expected_reward, greedy_allocation
from .exceptions import CommunityExploreError, ConfigError, SizeGuardError
from .services.config import KIND_ADAPTIVE_REWARD, KIND_ALLOCATE, KIND_REGRET, ConfigManager, ExperimentConfig
from .services.experiments import ExperimentRunner
from .services.reporting import Report, render_table, write_csv, write_summary
from .utils import format_value, setup_logging

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_SIZE_GUARD = 3

app = typer.Typer(
    name="community-explore",
    help="Community exploration: offline optimizers, exact rewards and online learning experiments",
    add_completion=False,
)

config_app = typer.Typer(name="config", help="Inspect the effective configuration")
app.add_typer(config_app)

console = Console()


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging")):
    setup_logging(verbose)


@contextlib.contextmanager
def _handle_errors() -> Iterator[None]:
    """Map library errors to exit codes."""
    try:
        yield
    except ConfigError as e:
        for problem in e.problems:
            console.print(f"✗ config: {problem}", style="red")
        raise typer.Exit(EXIT_CONFIG)
    except SizeGuardError as e:
        console.print(f"✗ too large: {e}", style="red")
        raise typer.Exit(EXIT_SIZE_GUARD)
    except CommunityExploreError as e:
        logger.debug("command failed", exc_info=True)
        console.print(f"✗ {e}", style="red")
        raise typer.Exit(EXIT_ERROR)


def parse_sizes(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"sizes must be comma-separated integers, got {text!r}")
    if not sizes:
        raise ConfigError("sizes must not be empty")
    if any(d < 1 for d in sizes):
        raise ConfigError(f"sizes must be positive integers, got {text!r}")
    return sizes


def _write_outputs(report: Report, config: ExperimentConfig, out: Path) -> None:
    digest = config.config_hash()
    csv_path = write_csv(report, out / f"{report.kind}.csv", config.seed, digest)
    write_summary(report, config.to_dict(), digest, out / "summary.json")
    console.print(f"✓ {len(report.rows)} rows written to {csv_path} (config {digest})", style="green")


def _run_configured(config: ExperimentConfig, out: Optional[Path], show: int) -> Report:
    runner = ExperimentRunner(config)
    total = runner.trial_count()
    if total:
        with Progress(console=console) as progress:
            task = progress.add_task(f"{config.kind} trials", total=total)
            runner.progress = lambda: progress.advance(task)
            report = runner.run()
    else:
        report = runner.run()
    if show:
        render_table(report, console, limit=show)
    _write_outputs(report, config, out if out is not None else Path(config.output))
    return report


@app.command()
def allocate(
    sizes: str = typer.Option(..., "--sizes", help="Community sizes, e.g. 2,3,5"),
    budget: int = typer.Option(..., "--budget", "-K", help="Budget K"),
    fast: bool = typer.Option(False, "--fast", help="Start from the closed-form lower bound"),
):
    """Optimal non-adaptive budget allocation with its closed-form bounds."""
    with _handle_errors():
        config = ExperimentConfig(kind=KIND_ALLOCATE, sizes=tuple(parse_sizes(sizes)), budget=budget, fast=fast)
        report = ExperimentRunner(config).run()
        render_table(report, console, limit=None, title=f"K={budget}")
        console.print(f"expected reward: {format_value(report.summary['expected_reward'])}", style="green")


@app.command("adaptive-reward")
def adaptive_reward(
    sizes: str = typer.Option(..., "--sizes", help="Community sizes, e.g. 2,3,5"),
    budget: int = typer.Option(..., "--budget", "-K", help="Budget K"),
):
    """Exact expected reward of the greedy adaptive policy against the best allocation."""
    with _handle_errors():
        config = ExperimentConfig(kind=KIND_ADAPTIVE_REWARD, sizes=tuple(parse_sizes(sizes)), budget=budget)
        report = ExperimentRunner(config).run()
        render_table(report, console, limit=None)


@app.command()
def oracle(
    sizes: str = typer.Option(..., "--sizes", help="Community sizes, e.g. 2,3,5"),
    budget: int = typer.Option(..., "--budget", "-K", help="Budget K"),
):
    """Check the greedy optimizers against exhaustive search and value iteration."""
    with _handle_errors():
        instance = make_instance(parse_sizes(sizes))
        best, best_value = brute_force_optimal(instance, budget)
        greedy_value = expected_reward(instance, greedy_allocation(instance, budget))
        policy_value = optimal_policy_value_oracle(instance, budget)
        adaptive_value = expected_reward_greedy(instance, budget)

        table = Table(title=f"{instance}, K={budget}")
        table.add_column("quantity", style="cyan", no_wrap=True)
        table.add_column("greedy", style="green")
        table.add_column("oracle", style="yellow")
        table.add_row("non-adaptive reward", format_value(greedy_value), format_value(best_value))
        table.add_row("adaptive reward", format_value(adaptive_value), format_value(policy_value))
        console.print(table)
        console.print(f"exhaustive optimum k = {best}")
        agree = abs(greedy_value - best_value) <= 1e-9 and abs(adaptive_value - policy_value) <= 1e-9
        console.print("✓ greedy matches the oracles" if agree else "✗ greedy differs from an oracle",
                      style="green" if agree else "red")
        if not agree:
            raise typer.Exit(EXIT_ERROR)


def _overrides(**values) -> Dict[str, object]:
    return {key: value for key, value in values.items() if value is not None}


@app.command()
def experiment(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON or YAML config"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    kind: Optional[str] = typer.Option(None, "--kind", help="Experiment kind"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed"),
    replications: Optional[int] = typer.Option(None, "--replications", "-n", help="Trials per data point"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes"),
    show: int = typer.Option(10, "--show", help="Rows to print (0 for none)"),
):
    """Run a configured experiment and write CSV and summary.json."""
    with _handle_errors():
        manager = ConfigManager(
            str(config_path) if config_path else None,
            _overrides(kind=kind, seed=seed, replications=replications, **{"runner.workers": workers}),
        )
        _run_configured(manager.to_experiment_config(), out, show)


@app.command()
def regret(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON or YAML config"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    horizon: Optional[int] = typer.Option(None, "--horizon", "-T", help="Rounds per run"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed"),
    replications: Optional[int] = typer.Option(None, "--replications", "-n", help="Seeds per curve"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes"),
):
    """Run online learners and write averaged regret curves."""
    with _handle_errors():
        manager = ConfigManager(
            str(config_path) if config_path else None,
            _overrides(kind=KIND_REGRET, horizon=horizon, seed=seed, replications=replications,
                       **{"runner.workers": workers}),
        )
        config = manager.to_experiment_config()
        report = _run_configured(config, out, show=0)

        table = Table(title=f"cumulative regret after {config.horizon} rounds")
        table.add_column("learner", style="cyan", no_wrap=True)
        table.add_column("mean", style="green")
        table.add_column("bound", style="yellow")
        bounds = report.summary.get("regret_bounds", {})
        for label, value in report.summary["final_mean_cum_regret"].items():
            bound = bounds.get(label)
            table.add_row(label, format_value(value), "-" if bound is None else format_value(bound["value"]))
        console.print(table)


@config_app.command("show")
def config_show(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON or YAML config"),
    as_json: bool = typer.Option(False, "--json", help="Print JSON instead of YAML"),
):
    """Print the effective configuration."""
    with _handle_errors():
        manager = ConfigManager(str(config_path) if config_path else None)
        if as_json:
            console.print_json(json.dumps(manager.config))
        else:
            console.print(yaml.safe_dump(manager.config, default_flow_style=False, sort_keys=True))


@config_app.command("validate")
def config_validate(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="JSON or YAML config"),
):
    """Validate a configuration; exits 2 when it has problems."""
    with _handle_errors():
        manager = ConfigManager(str(config_path) if config_path else None)
        config = manager.to_experiment_config()
        console.print(f"✓ config is valid (hash {config.config_hash()})", style="green")
