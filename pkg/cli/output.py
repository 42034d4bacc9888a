"""
Файлы результатов: таблицы с одной строкой заголовка '#', сводка key = value,
манифест. Метка времени пишется только в манифест.
"""

import csv
import json
import logging
from dataclasses import asdict, fields, is_dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from model.errors import InvalidParameterError


logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.txt"
MANIFEST_FILE = "manifest.txt"
FAILURE_FILE = "failure.txt"
FLOAT_FORMAT = "%.12g"


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    if hasattr(value, "name") and isinstance(value, int):
        return value.name
    return str(value)


def summary_lines(summary: dict[str, Any]) -> list[str]:
    return [f"{key} = {format_value(value)}" for key, value in summary.items()]


class OutputDir:
    """Каталог результатов одного запуска."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            self.path.mkdir(parents=True, exist_ok=True)
            marker = self.path / ".write_test"
            marker.write_text("", encoding="utf-8")
            marker.unlink()
        except OSError as e:
            raise InvalidParameterError(f"каталог вывода {self.path} недоступен для записи: {e}") from e

    def table(self, name: str, columns: dict[str, Iterable]) -> Path:
        """Числовая таблица: столбцы одинаковой длины."""
        names = list(columns)
        data = np.column_stack([np.asarray(col, dtype=float) for col in columns.values()])
        path = self.path / name
        np.savetxt(path, data, delimiter=",", header=",".join(names), comments="# ", fmt=FLOAT_FORMAT)
        logger.debug(f"Записан {path} ({data.shape[0]} строк)")
        return path

    def rows(self, name: str, header: list[str], rows: Iterable[Iterable[Any]]) -> Path:
        """Таблица со смешанными типами (строки, флаги)."""
        path = self.path / name
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("# " + ",".join(header) + "\n")
            writer = csv.writer(f, lineterminator="\n")
            for row in rows:
                writer.writerow([format_value(value) for value in row])
        return path

    def records(self, name: str, items: list) -> Path:
        """Список датаклассов: столбцы по полям."""
        if not items or not is_dataclass(items[0]):
            raise InvalidParameterError(f"{name}: ожидался непустой список датаклассов")
        header = [f.name for f in fields(items[0])]
        return self.rows(name, header, (asdict(item).values() for item in items))

    def write_summary(self, summary: dict[str, Any]) -> Path:
        path = self.path / SUMMARY_FILE
        path.write_text("\n".join(summary_lines(summary)) + "\n", encoding="utf-8")
        return path

    def write_manifest(self, resolved: dict[str, Any], version: str) -> Path:
        path = self.path / MANIFEST_FILE
        lines = [
            f"version = {version}",
            f"timestamp = {datetime.now().isoformat(timespec='seconds')}",
        ]
        lines += [f"{key} = {json.dumps(value, ensure_ascii=False)}" for key, value in sorted(resolved.items())]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def write_failure(output_dir: OutputDir | None, error: BaseException, exit_code: int) -> None:
    """failure.txt в каталоге вывода, иначе - в stderr через лог."""
    record = {
        "status": "FAILED",
        "exit_code": exit_code,
        "error_type": type(error).__name__,
        "message": str(error).replace("\n", " "),
    }
    if output_dir is not None:
        try:
            (output_dir.path / FAILURE_FILE).write_text("\n".join(summary_lines(record)) + "\n", encoding="utf-8")
            return
        except OSError:
            pass
    for line in summary_lines(record):
        logger.error(line)
