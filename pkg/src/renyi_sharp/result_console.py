"""CSV / JSON / Rich table output of result rows."""

import csv
import io
import json
import math
from enum import Enum
from typing import IO, Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from .models import OutputFormat

Row = Dict[str, Any]

_STATUS_STYLES = {
    "ok": "green",
    "optimal": "green",
    "infinite": "yellow",
    "partial": "yellow",
    "max_iter": "yellow",
    "failed": "red",
    "numerical_failure": "red",
    "infeasible": "red",
    "unbounded": "red",
}


def format_value(value: Any) -> str:
    """Text form used in CSV and tables: 15 significant digits, 'inf' for ±∞."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return "%.15g" % value
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


class ResultPrinter:
    """Writes result rows in one of the OutputFormat formats."""

    def __init__(
        self,
        output_format: OutputFormat = OutputFormat.CSV,
        stream: Optional[IO[str]] = None,
        console: Optional[Console] = None,
    ):
        self.output_format = output_format
        self.stream = stream
        self.console = console or Console()

    def render(self, columns: Sequence[str], rows: List[Row], title: str = "") -> str:
        """Rows as text in the configured format (table rendering excluded)."""
        if self.output_format == OutputFormat.JSON:
            objects = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
            return json.dumps(objects, indent=2) + "\n"
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
        return buffer.getvalue()

    def print_rows(
        self, columns: Sequence[str], rows: List[Row], title: str = ""
    ) -> None:
        if self.output_format == OutputFormat.TABLE and self.stream is None:
            self.console.print(self._table(columns, rows, title))
            return
        text = self.render(columns, rows, title)
        if self.stream is not None:
            self.stream.write(text)
        else:
            self.console.file.write(text)
            self.console.file.flush()

    def _table(self, columns: Sequence[str], rows: List[Row], title: str) -> Table:
        table = Table(
            title=f"[bold cyan]{title}[/bold cyan]" if title else None,
            show_header=True,
            header_style="bold magenta",
            border_style="bright_blue",
        )
        for column in columns:
            justify = "left" if column == "status" else "right"
            table.add_column(column, justify=justify, no_wrap=True)
        for row in rows:
            cells = []
            for column in columns:
                text = format_value(row.get(column))
                if column == "status":
                    style = _STATUS_STYLES.get(text, "white")
                    text = f"[{style}]{text}[/{style}]"
                cells.append(text)
            table.add_row(*cells)
        return table
