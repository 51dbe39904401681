"""
Report and series files.

JSON reports are written atomically with floats fixed to 17 significant
digits and keys in insertion order, so identical runs produce identical
bytes. Series are gnuplot-friendly CSV files with ``#`` comment lines.
"""

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from circspec import __version__
from circspec.errors import InvalidInput
from circspec.funcspace import GridFunction
from circspec.utils import calculate_settings_hash


def _float_text(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _plain(obj: Any) -> Any:
    """Convert numpy scalars and arrays, tuples and complex numbers to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def to_json_text(obj: Any, indent: int = 2) -> str:
    """Serialise with fixed float formatting."""

    def emit(value: Any, level: int) -> str:
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(value, dict):
            if not value:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {emit(v, level + 1)}" for k, v in value.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(value, list):
            if not value:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in value):
                return "[" + ", ".join(emit(v, level + 1) for v in value) + "]"
            items = [f"{pad}{emit(v, level + 1)}" for v in value]
            return "[\n" + ",\n".join(items) + "\n" + end + "]"
        if isinstance(value, float):
            return _float_text(value)
        return json.dumps(value)

    return emit(_plain(obj), 0) + "\n"


def write_atomic(path: Path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def build_report(
    command: str,
    payload: Dict[str, Any],
    settings: Dict[str, Any],
    seed: int,
    period: float,
) -> Dict[str, Any]:
    """Wrap a command payload with version, seed, period and resolved settings."""
    plain_settings = _plain(settings)
    report: Dict[str, Any] = {
        "version": __version__,
        "command": command,
        "seed": int(seed),
        "period": float(period),
        "settings": plain_settings,
        "settings_hash": calculate_settings_hash(plain_settings),
    }
    report.update(payload)
    return report


def write_report(path: Path, report: Dict[str, Any]) -> Path:
    return write_atomic(path, to_json_text(report))


def read_report(path: Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def series_text(
    times: Sequence[float],
    values: np.ndarray,
    comments: Optional[Dict[str, Any]] = None,
) -> str:
    """
    CSV text ``t,re_0,im_0,...`` preceded by ``#`` comment lines.

    Args:
        times: Sample times
        values: Samples, shape (len(times), dim)
        comments: ``key: value`` pairs written as comments after the version line
    """
    values = np.asarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None]
    lines = [f"# circspec {__version__}"]
    for key, value in (comments or {}).items():
        lines.append(f"# {key}: {value}")
    header = ["t"]
    for i in range(values.shape[1]):
        header += [f"re_{i}", f"im_{i}"]
    lines.append(",".join(header))
    for t, row in zip(times, values):
        cells = [format(float(t), ".17g")]
        for z in row:
            cells += [format(float(z.real), ".17g"), format(float(z.imag), ".17g")]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_series(path: Path, times: Sequence[float], values: np.ndarray, comments: Optional[Dict[str, Any]] = None) -> Path:
    return write_atomic(path, series_text(times, values, comments))


def read_series(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """
    Read a series file (comma or whitespace separated, ``#`` comments).

    Returns:
        Tuple of (times, complex values of shape (n, dim))
    """
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"series file not found: {path}")
    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.replace(",", " ").split()
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if rows:
                    raise InvalidInput(f"{path}:{line_no}: non-numeric row")
                continue  # header
    if not rows:
        raise InvalidInput(f"series file {path} has no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InvalidInput(f"series file {path} has rows of different widths")
    data = np.array(rows)
    if data.shape[1] < 2:
        raise InvalidInput(f"series file {path} needs a time column and at least one value column")
    times, rest = data[:, 0], data[:, 1:]
    if rest.shape[1] % 2 == 0:
        values = rest[:, 0::2] + 1j * rest[:, 1::2]
    else:
        values = rest.astype(complex)
    return times, values


def read_grid(path: Path) -> GridFunction:
    """Read a series file sampled on a uniform grid."""
    times, values = read_series(path)
    if len(times) < 2:
        raise InvalidInput(f"grid file {path} needs at least two rows")
    steps = np.diff(times)
    dt = float(times[-1] - times[0]) / (len(times) - 1)
    if not dt > 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise InvalidInput(f"grid file {path} is not uniformly sampled")
    return GridFunction(float(times[0]), dt, values)
