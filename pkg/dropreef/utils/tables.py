"""
TSV and JSON rendering of report models
"""
from pathlib import Path
from typing import Iterable, List, Sequence, Union

from pydantic import BaseModel

from dropreef.utils.helpers import format_float, write_text_atomic


def _cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def models_to_tsv(rows: Sequence[BaseModel]) -> str:
    """Header from the first model's fields, one line per model"""
    if not rows:
        return ""
    header = list(type(rows[0]).model_fields)
    lines = ["\t".join(header)]
    for row in rows:
        data = row.model_dump()
        lines.append("\t".join(_cell(data[name]) for name in header))
    return "\n".join(lines) + "\n"


def model_to_json(model: BaseModel) -> str:
    return model.model_dump_json(indent=2) + "\n"


def models_to_json(rows: Iterable[BaseModel]) -> str:
    return "[\n" + ",\n".join(
        "  " + row.model_dump_json() for row in rows
    ) + "\n]\n"


def write_rows(path: Union[str, Path], rows: Sequence[BaseModel], fmt: str) -> Path:
    """Write `rows` as `<path>.tsv` or `<path>.json`; returns the file written"""
    target = Path(f"{path}.{fmt}")
    write_text_atomic(target, models_to_tsv(rows) if fmt == "tsv" else models_to_json(rows))
    return target


def write_model(path: Union[str, Path], model: BaseModel, fmt: str, rows_field: str = "") -> List[Path]:
    """
    Write a report model

    json: the whole model. tsv: one row per item of `rows_field` (or the
    model itself as a single row when no field is named).
    """
    target = Path(f"{path}.{fmt}")
    if fmt == "json":
        write_text_atomic(target, model_to_json(model))
    else:
        rows = getattr(model, rows_field) if rows_field else [model]
        write_text_atomic(target, models_to_tsv(rows))
    return [target]
