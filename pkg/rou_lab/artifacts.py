"""
Artifact output: CSV and JSON documents written atomically (temp file + rename),
full-precision number formatting, and content hashes for manifests.
"""

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import OutputExistsError, ValidationError

logger = logging.getLogger("rou_lab.artifacts")


def fmt(value: Any) -> str:
    """17 significant digits, '.' separator, independent of locale."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def to_json(document: Any) -> str:
    return json.dumps(document, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_text_atomic(path: Path, text: str, force: bool = False) -> Path:
    """Write ``text`` to ``path`` through a temporary sibling and ``os.replace``."""
    path = Path(path)
    if path.exists() and not force:
        raise OutputExistsError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    logger.info(f"Wrote {path}")
    return path


def write_json_atomic(path: Path, document: Any, force: bool = False) -> Path:
    return write_text_atomic(path, to_json(document), force=force)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv_atomic(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], force: bool = False
) -> Path:
    return write_text_atomic(path, csv_text(header, rows), force=force)


def read_two_column_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``t,<value>`` CSV (e.g. a simulated path) into two float arrays."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"path file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]
    if len(rows) < 3:
        raise ValidationError(f"{path}: need a header and at least two data rows")
    try:
        data = np.array([[float(row[0]), float(row[1])] for row in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed row ({exc})") from exc
    return data[:, 0], data[:, 1]


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_json(path: Path) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
