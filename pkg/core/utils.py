import os
import sys
import csv
import json
import numpy as np
from enum import Enum
from pathlib import Path
from numbers import Number
from omegaconf import OmegaConf
from prettytable import PrettyTable
from contextlib import contextmanager
from dataclasses import fields, is_dataclass
from jsonschema import Draft202012Validator
from dacite import from_dict, Config, DaciteError
from typing import Any, Dict, Iterable, List, Optional, Sequence, Type, TypeVar, Union

from core.errors import ConfigError

T = TypeVar("T")


def _reject_constant(name: str) -> Any:
    raise ValueError(f"{name} is not a finite number")


def _finite_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(f"{text} is out of floating-point range")
    return value


def load_config(
    config_type: Type[T],
    config_path: Union[str, Path],
    schema: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> T:
    """Reads a JSON config, validates it against `schema`, merges
    command-line overrides and builds the dataclass strictly: unknown keys
    and wrong types are config errors."""
    try:
        with open(config_path, encoding="utf-8") as f:
            data = json.load(f, parse_float=_finite_float, parse_constant=_reject_constant)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read config {config_path}: {e}") from e

    if schema is not None:
        errors = sorted(
            Draft202012Validator(schema).iter_errors(data), key=lambda e: list(e.path)
        )
        if errors:
            where = "/".join(str(p) for p in errors[0].path) or "<root>"
            raise ConfigError(f"invalid config {config_path} at {where}: {errors[0].message}")

    conf = OmegaConf.create(data)
    if overrides:
        conf = OmegaConf.merge(conf, OmegaConf.create(overrides))
    try:
        return from_dict(
            data_class=config_type,
            data=OmegaConf.to_container(conf, resolve=True),
            config=Config(strict=True, cast=[Enum, float]),
        )
    except (DaciteError, ValueError, TypeError) as e:
        raise ConfigError(f"invalid config {config_path}: {e}") from e


@contextmanager
def disable_print():
    stdout = sys.stdout
    sys.stdout = open(os.devnull, "w")
    try:
        yield
    finally:
        sys.stdout.close()
        sys.stdout = stdout


def _float(value: float) -> Union[float, str]:
    # JSON has no inf/nan
    return float(value) if np.isfinite(value) else str(float(value))


def to_jsonable(obj: Any) -> Any:
    """Dataclasses (field order kept), enums, numpy values and complex
    numbers as {"re", "im"} objects."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _float(obj.real), "im": _float(obj.imag)}
    if isinstance(obj, Number):
        return _float(obj)
    return obj


def save_json(path: Union[str, Path], obj: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False))
        f.write("\n")


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Number):
        return f"{float(value):.17g}"
    return "" if value is None else str(value)


def save_csv(
    path: Union[str, Path], columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    """Comma-separated, header row, floats with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow(dict(zip(columns, (format_value(v) for v in row))))


def format_residual(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return f"{value:.3e}"


def print_table(columns: List[str], rows: Iterable[Sequence[Any]], title: str = "") -> None:
    table = PrettyTable(columns)
    if title:
        table.title = title
    for row in rows:
        table.add_row(list(row))
    print(table)
