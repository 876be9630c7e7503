from __future__ import annotations

import traceback
from typing import Any

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console()
err_console = Console(stderr=True)


def show_message(
    title: str,
    message: str,
    *,
    style: str = "cyan",
    details: str | None = None,
    target: Console | None = None,
) -> None:
    out = target or console
    out.print(Panel(message, title=title, border_style=style, box=box.ROUNDED))
    if details:
        out.print(details, style="dim", markup=False, highlight=False)


def show_warning(title: str, message: str) -> None:
    show_message(title, message, style="yellow", target=err_console)


def show_error(title: str, message: str, details: str | None = None) -> None:
    show_message(title, message, style="red", details=details, target=err_console)


def show_exception(title: str, error: BaseException, *, details: str | None = None) -> None:
    traceback_text = "".join(traceback.format_exception(type(error), error, error.__traceback__))
    show_error(title, str(error) or error.__class__.__name__, details or traceback_text)


def experiments_table(rows: list[tuple[str, str, str]]) -> Table:
    table = Table(
        title="[bold cyan]Experiments[/bold cyan]",
        box=box.ROUNDED,
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("Name", style="cyan", no_wrap=True)
    table.add_column("Description", style="white")
    table.add_column("Anchor", style="dim white", no_wrap=True)
    for name, description, anchor in rows:
        table.add_row(name, description, anchor)
    return table


def _fmt(value: float | None) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def results_table(report: dict[str, Any]) -> Table:
    truncation = report["truncation"]
    table = Table(
        title=f"[bold cyan]{report['experiment']}[/bold cyan] ({report['anchor']})",
        box=box.ROUNDED,
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column(f"N={truncation['N']}", justify="right")
    table.add_column(f"2N={truncation['N2']}", justify="right")
    table.add_column("rel. delta", justify="right", style="dim white")
    for name, entry in report["results"].items():
        table.add_row(
            name, _fmt(entry["value"]), _fmt(entry["value_2N"]), _fmt(entry["rel_delta"])
        )
    return table


def passes_table(report: dict[str, Any]) -> Table:
    table = Table(box=box.SIMPLE, show_header=True, header_style="bold magenta")
    table.add_column("Check", style="cyan", no_wrap=True)
    table.add_column("N", justify="center")
    table.add_column("2N", justify="center")

    def mark(value: bool | None) -> str:
        if value is None:
            return "[dim]-[/dim]"
        return "[green]pass[/green]" if value else "[red]FAIL[/red]"

    for name, value in report["passes"].items():
        table.add_row(name, mark(value), mark(report["passes_2N"].get(name)))
    for name, value in report["stability"].items():
        table.add_row(name, mark(value), mark(None))
    return table
