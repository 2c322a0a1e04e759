import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ..exceptions import ReportWriteError


def to_json_serializable(obj: Any) -> Any:
    # convert pydantic models, enums and numpy values to plain json types
    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, np.generic):
        return obj.item()
    elif hasattr(obj, "value"):
        return obj.value
    elif isinstance(obj, (list, tuple)):
        return [to_json_serializable(i) for i in obj]
    elif isinstance(obj, dict):
        return {k: to_json_serializable(v) for k, v in obj.items()}
    return obj


def dumps_report(report: Any) -> str:
    """deterministic text form: sorted keys, 2-space indent, trailing newline"""
    return json.dumps(to_json_serializable(report), indent=2, sort_keys=True) + "\n"


def write_json_report(report: Any, path: Path) -> Path:
    # write a report to json file
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_report(report))
    except OSError as e:
        raise ReportWriteError(str(path), str(e)) from e
    return path


def write_csv_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """floats are written with repr so the csv reads back exactly"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    except OSError as e:
        raise ReportWriteError(str(path), str(e)) from e
    return path


def write_matrix_csv(path: Path, matrix: np.ndarray, header: Sequence[str]) -> Path:
    # matrix is features x samples; one sample per csv row
    return write_csv_table(path, header, np.asarray(matrix).T.tolist())
