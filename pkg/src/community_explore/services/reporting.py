# -*- coding: utf-8 -*-
"""Report rows and their CSV / JSON / console renderings."""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

from ..utils import ensure_directory, format_value

logger = logging.getLogger(__name__)

PROVENANCE_COLUMNS = ["seed", "config_hash"]

SCHEMAS = {
    "allocate": ["community", "size", "rate", "allocation", "lower_bound", "upper_bound"],
    "adaptive_reward": ["K", "adaptive_reward", "nonadaptive_reward", "gap"],
    "reward_vs_budget": ["K", "method", "mean_reward", "std_reward", "n"],
    "allocation_distance": ["distribution", "m", "mean_l1_lower", "mean_l1_upper", "n"],
    "regret": ["round", "variant", "mode", "mean_cum_regret", "std_cum_regret", "n_seeds"],
    "used_budget": ["K", "method", "mean_used_budget", "std_used_budget", "n"],
}


@dataclass
class Report:
    """Rows of one experiment kind, in the kind's fixed column order."""

    kind: str
    rows: List[List[Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def header(self) -> List[str]:
        return SCHEMAS[self.kind]

    def add(self, *values: Any) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"{self.kind} rows have {len(self.header)} columns, got {len(values)}")
        self.rows.append(list(values))


def _cell(value: Any) -> str:
    if isinstance(value, str):
        return value
    return format_value(value)


def write_csv(report: Report, path: Path, seed: int, config_hash: str) -> Path:
    """Write the rows with seed and config hash appended to each."""
    ensure_directory(str(Path(path).parent))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(report.header + PROVENANCE_COLUMNS)
        for row in report.rows:
            writer.writerow([_cell(v) for v in row] + [str(seed), config_hash])
    logger.info("wrote %d %s rows to %s", len(report.rows), report.kind, path)
    return Path(path)


def write_summary(report: Report, config: Dict[str, Any], config_hash: str, path: Path) -> Path:
    data = {
        "kind": report.kind,
        "config": config,
        "config_hash": config_hash,
        "rows": len(report.rows),
        **report.summary,
    }
    ensure_directory(str(Path(path).parent))
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
    return Path(path)


def render_table(report: Report, console: Console, limit: Optional[int] = 20, title: Optional[str] = None) -> None:
    """Print the first rows of a report as a rich table."""
    table = Table(title=title or report.kind)
    for column in report.header:
        table.add_column(column, style="cyan" if column in ("method", "variant", "distribution") else None)
    rows = report.rows if limit is None else report.rows[:limit]
    for row in rows:
        table.add_row(*(_cell(v) for v in row))
    console.print(table)
    if limit is not None and len(report.rows) > limit:
        console.print(f"... {len(report.rows) - limit} more rows", style="yellow")
