"""Plain-text sample files: one strictly positive decimal per line, LF endings, no header."""
from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import InputError

_DECIMAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")

PathLike = Union[str, Path]


def _fmt(v: float) -> str:
    # repr round-trips doubles and never depends on the locale
    return repr(float(v))


def read_values(path: PathLike) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InputError(f"{path}: empty sample")

    values = np.empty(len(lines))
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if not _DECIMAL.fullmatch(s):
            raise InputError(f"{path}: line {i}: not a decimal number: {raw[:40]!r}")
        values[i - 1] = float(s)

    bad = int(np.count_nonzero(~((values > 0.0) & np.isfinite(values))))
    if bad:
        raise InputError(f"{path}: {bad} nonpositive or non-finite values rejected")
    return values


def write_values(path: PathLike, values: Iterable[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for v in values:
            f.write(_fmt(v) + "\n")


def write_grid(path: PathLike, x: Iterable[float], fhat: Iterable[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("x,fhat\n")
        for a, b in zip(x, fhat):
            f.write(f"{_fmt(a)},{_fmt(b)}\n")
