"""
Landmark CSV files: N rows of K numeric columns per figure, an optional
header line at the top of the file, several figures per file separated by
blank lines.
"""

import io
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from errors import LandmarkFormatError
from models import LandmarkSet

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Block = List[Tuple[int, str]]


def _split_blocks(lines: Sequence[str]) -> List[Block]:
    blocks: List[Block] = []
    current: Block = []
    for number, line in enumerate(lines, start=1):
        if line.strip():
            current.append((number, line.strip()))
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def _is_header(line: str) -> bool:
    for field in line.split(","):
        try:
            float(field)
        except ValueError:
            return True
    return False


def _parse_block(block: Block, path: Optional[str]) -> LandmarkSet:
    widths = {len(line.split(",")) for _, line in block}
    if len(widths) > 1:
        expected = len(block[0][1].split(","))
        for number, line in block:
            if len(line.split(",")) != expected:
                raise LandmarkFormatError(
                    f"expected {expected} columns, found {len(line.split(','))}", line=number, path=path)

    text = "\n".join(line for _, line in block)
    frame = pd.read_csv(io.StringIO(text), header=None, dtype=str, skipinitialspace=True)
    frame = frame.apply(lambda column: column.str.strip())
    values = frame.apply(lambda column: pd.to_numeric(column, errors="coerce"))
    bad_rows = values.isna().any(axis=1) | ~np.isfinite(values.to_numpy(dtype=float)).all(axis=1)
    if bad_rows.any():
        row = int(np.flatnonzero(bad_rows.to_numpy())[0])
        raise LandmarkFormatError(f"non-numeric or non-finite value in '{block[row][1]}'",
                                  line=block[row][0], path=path)

    try:
        # float() parsing reads %.17g output back bit-exact
        return LandmarkSet(points=frame.astype(float).to_numpy())
    except ValidationError as e:
        raise LandmarkFormatError(e.errors()[0]["msg"], line=block[0][0], path=path) from e


def parse_landmarks(text: str, path: Optional[str] = None) -> List[LandmarkSet]:
    """Figures contained in CSV text"""
    blocks = _split_blocks(text.splitlines())
    if not blocks:
        raise LandmarkFormatError("no landmark rows found", path=path)
    if _is_header(blocks[0][0][1]):
        blocks[0] = blocks[0][1:]
        if not blocks[0]:
            blocks.pop(0)
        if not blocks:
            raise LandmarkFormatError("header line without landmark rows", line=1, path=path)

    figures = [_parse_block(block, path) for block in blocks]
    first = figures[0].points.shape
    for block, figure in zip(blocks, figures):
        if figure.points.shape != first:
            raise LandmarkFormatError(
                f"figure has shape {figure.points.shape}, earlier figures are {first}",
                line=block[0][0], path=path)
    return figures


def read_landmarks(path: PathLike) -> List[LandmarkSet]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise LandmarkFormatError(f"cannot read landmark file: {e}", path=str(path)) from e
    figures = parse_landmarks(text, path=str(path))
    logger.debug("Read %d figures from %s", len(figures), path)
    return figures


def read_landmark_files(paths: Iterable[PathLike],
                        shape: Optional[Tuple[int, int]] = None) -> List[LandmarkSet]:
    """All figures from several files; every figure must have the same (N, K)"""
    figures: List[LandmarkSet] = []
    for path in paths:
        for figure in read_landmarks(path):
            expected = shape or (figures[0].points.shape if figures else None)
            if expected is not None and figure.points.shape != tuple(expected):
                raise LandmarkFormatError(
                    f"figure has shape {figure.points.shape}, expected {tuple(expected)}", path=str(path))
            figures.append(figure)
    return figures


def format_landmarks(figures: Sequence[Union[LandmarkSet, np.ndarray]], header: bool = True) -> str:
    """CSV text for figures; values are written with full round-trip precision"""
    chunks = []
    for index, figure in enumerate(figures):
        points = figure.points if isinstance(figure, LandmarkSet) else np.asarray(figure, dtype=float)
        frame = pd.DataFrame(points, columns=[f"x{k + 1}" for k in range(points.shape[1])])
        chunks.append(frame.to_csv(index=False, header=header and index == 0,
                                   float_format="%.17g", lineterminator="\n"))
    return "\n".join(chunks)


def write_landmarks(path: PathLike, figures: Sequence[Union[LandmarkSet, np.ndarray]], header: bool = True) -> None:
    path = Path(path)
    path.write_text(format_landmarks(figures, header=header), encoding="utf-8")
    logger.info("Wrote %d figures to %s", len(figures), path)


def read_matrix(path: PathLike) -> np.ndarray:
    """A plain numeric CSV matrix without header (mu or Sigma files)"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, header=None, dtype=float, skip_blank_lines=True)
    except OSError as e:
        raise LandmarkFormatError(f"cannot read matrix file: {e}", path=str(path)) from e
    except (ValueError, pd.errors.ParserError) as e:
        raise LandmarkFormatError(f"malformed matrix: {e}", path=str(path)) from e
    matrix = frame.to_numpy()
    if not np.all(np.isfinite(matrix)):
        raise LandmarkFormatError("matrix entries must be finite", path=str(path))
    return matrix
