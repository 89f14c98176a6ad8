"""
Text, CSV and JSON renderings of report records.

Floats are written with 17 significant digits and lines end in a bare newline,
so identical records render to identical bytes.
"""

import csv
import io
from typing import List, Optional, Sequence, Tuple

from pydantic import TypeAdapter

from app.core.physics_config import FLOAT_FORMAT
from app.schemas.report import ReportRecord

RECORD_LIST = TypeAdapter(List[ReportRecord])

# Commands whose records form one table row each
TABULAR_COMMANDS = ("sweep", "evolve")


def format_number(value: Optional[float]) -> str:
    return "nan" if value is None else format(value, FLOAT_FORMAT)


def format_flag(met: bool) -> str:
    return "true" if met else "false"


def _sweep_table(records: Sequence[ReportRecord]) -> Tuple[List[str], List[List[str]]]:
    first = records[0]
    quantity = next(iter(first.outputs))
    header = [str(first.inputs["sweep_parameter"]), "Delta", "eta", "Gamma", quantity, "tolerance_met"]
    rows = [
        [
            format_number(record.inputs["sweep_value"]),
            format_number(record.derived.get("Delta")),
            format_number(record.derived.get("eta")),
            format_number(record.derived.get("Gamma")),
            format_number(record.outputs[quantity]),
            format_flag(record.tolerance_met[quantity]),
        ]
        for record in records
    ]
    return header, rows


def _series_table(records: Sequence[ReportRecord]) -> Tuple[List[str], List[List[str]]]:
    keys = list(records[0].outputs)
    header = keys + ["tolerance_met"]
    rows = [
        [format_number(record.outputs[key]) for key in keys] + [format_flag(record.certified)]
        for record in records
    ]
    return header, rows


def _quantity_table(record: ReportRecord) -> Tuple[List[str], List[List[str]]]:
    rows = [
        [key, format_number(value), format_flag(True)]
        for key, value in record.derived.items()
        if key not in record.outputs
    ]
    rows += [
        [key, format_number(value), format_flag(record.tolerance_met[key])]
        for key, value in record.outputs.items()
    ]
    return ["quantity", "value", "tolerance_met"], rows


def tabulate(records: Sequence[ReportRecord]) -> Tuple[List[str], List[List[str]]]:
    if not records:
        raise ValueError("nothing to render")
    command = records[0].command
    if command == "sweep":
        return _sweep_table(records)
    if command in TABULAR_COMMANDS:
        return _series_table(records)
    return _quantity_table(records[0])


def render_csv(records: Sequence[ReportRecord]) -> str:
    header, rows = tabulate(records)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_json(records: Sequence[ReportRecord]) -> str:
    """One object for a single-record command, an array for sweeps and series."""
    if records and records[0].command in TABULAR_COMMANDS:
        return RECORD_LIST.dump_json(list(records), indent=2).decode() + "\n"
    return records[0].model_dump_json(indent=2) + "\n"


def _input_line(record: ReportRecord) -> str:
    shown = ("Omega", "G", "omega", "branch")
    values = " ".join(f"{key}={record.inputs[key]:g}" for key in shown if key in record.inputs)
    return f"# {record.command}: {values}"


def render_text(records: Sequence[ReportRecord]) -> str:
    first = records[0]
    lines = [_input_line(first)]
    if first.command in TABULAR_COMMANDS:
        header, rows = tabulate(records)
        lines.append("# " + "  ".join(header))
        lines.extend("  ".join(row) for row in rows)
    else:
        for key, value in first.derived.items():
            lines.append(f"{key} = {format_number(value)}")
        width = max((len(key) for key in first.outputs), default=0)
        for key, value in first.outputs.items():
            status = "PASS" if first.tolerance_met[key] else "FAIL"
            lines.append(f"{key:<{width}} = {format_number(value)}  {status}")
        lines.extend(f"# note: {note}" for note in first.provenance.notes)
    for record in records:
        lines.extend(f"! {error.error_code}: {error.detail}" for error in record.errors)
    return "\n".join(lines) + "\n"


def render(records: Sequence[ReportRecord], output_format: str) -> str:
    if output_format == "csv":
        return render_csv(records)
    if output_format == "json":
        return render_json(records)
    return render_text(records)
