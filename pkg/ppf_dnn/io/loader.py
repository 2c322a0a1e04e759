import json
from pathlib import Path
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from ..exceptions import DataLoadError

M = TypeVar("M", bound=BaseModel)


def load_json(path: Path) -> object:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), "file not found")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataLoadError(str(path), f"bad json at line {e.lineno}, column {e.colno}: {e.msg}") from e


def load_json_model(path: Path, model_class: Type[M]) -> M:
    # load a json file and validate it with a pydantic model
    data = load_json(path)
    try:
        return model_class.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise DataLoadError(str(path), f"validation failed at {where}: {first['msg']}") from e


def read_text(path: Path) -> str:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(str(path), "file not found")
    with open(path, encoding="utf-8") as f:
        return f.read()
