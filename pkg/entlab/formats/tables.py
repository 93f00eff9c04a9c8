"""CSV and JSON tables: feature vectors, trajectories, summaries, 3-D exports.

Floats are written with ``repr`` so a value read back compares equal to
the one written.
"""

import csv
import io
import logging
import math
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
from pydantic import BaseModel

from entlab.core.constants import EXPORT3D_HEADER, TRAJECTORY_HEADER
from entlab.core.errors import FeatureFileError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Cell = Union[int, float, np.integer, np.floating]


def _format_cell(value: Cell) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def import_features(path: PathLike) -> List[np.ndarray]:
    """Read one feature vector per CSV line; all lines must have the same width.

    Blank lines are skipped. Errors name the offending line (1-based).
    """
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data.count(b"\n", 0, e.start) + 1
        raise FeatureFileError("not valid UTF-8 text", f"line {line}") from e

    vectors: List[np.ndarray] = []
    width = None
    with io.StringIO(text, newline="") as handle:
        reader = csv.reader(handle)
        line_no = 0
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as e:
                raise FeatureFileError(str(e), f"line {reader.line_num}") from e
            line_no = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as e:
                raise FeatureFileError(f"non-numeric field: {e}", f"line {line_no}") from e
            if not all(math.isfinite(v) for v in values):
                raise FeatureFileError("non-finite field", f"line {line_no}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FeatureFileError(
                    f"ragged row: {len(values)} fields, expected {width}", f"line {line_no}"
                )
            vectors.append(np.array(values, dtype=np.float64))
    if not vectors:
        raise FeatureFileError(f"no feature vectors in {path}")
    logger.debug("Imported %d vectors of dimension %d from %s", len(vectors), width, path)
    return vectors


def export_features(vectors: Iterable[np.ndarray], path: PathLike) -> int:
    """Write vectors one per line (no header); returns the number written."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for vector in vectors:
            writer.writerow(_format_cell(v) for v in np.asarray(vector).reshape(-1))
            count += 1
    return count


def write_rows_csv(
    path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Cell]]
) -> int:
    """Write a headed CSV; returns the number of data rows."""
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
            writer.writerow(_format_cell(cell) for cell in row)
            count += 1
    return count


def write_trajectory_csv(path: PathLike, rows: Iterable[Sequence[Cell]]) -> int:
    return write_rows_csv(path, TRAJECTORY_HEADER, rows)


def write_export3d_csv(path: PathLike, rows: Iterable[Sequence[Cell]]) -> int:
    return write_rows_csv(path, EXPORT3D_HEADER, rows)


def write_summary_json(path: PathLike, summary: BaseModel) -> None:
    """Dump a pydantic model as indented JSON."""
    Path(path).write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
