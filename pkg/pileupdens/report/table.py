from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

Row = Tuple[str, float, float, float, float]


def _sig(x: float, digits: int) -> str:
    """Fixed-point rendering with `digits` significant digits, trailing zeros kept."""
    if x == 0.0:
        return "0"
    if not math.isfinite(x):
        return str(x)
    decimals = max(0, digits - 1 - math.floor(math.log10(abs(x))))
    return f"{x:.{decimals}f}"


def _small(x: float) -> str:
    s = f"{x:.3f}"
    if s.startswith("0."):
        return s[1:]
    if s.startswith("-0."):
        return "-" + s[2:]
    return s


def format_cell(mean_x100: float, sd_x100: Optional[float] = None) -> str:
    """Render a 100 x MISE cell: `.063 (.042)` below one, `1.11 (0.22)` or `81.0` above."""
    if abs(mean_x100) < 1.0:
        text = _small(mean_x100)
        return text if sd_x100 is None else f"{text} ({_small(sd_x100)})"
    text = _sig(mean_x100, 3)
    return text if sd_x100 is None else f"{text} ({_sig(sd_x100, 2)})"


def format_dimension(mean_m: float, sd_m: float) -> str:
    return f"{mean_m:.2f} ({sd_m:.2f})"


@dataclass
class MiseTable:
    rows: List[Row] = field(default_factory=list)

    header = ("configuration", "100xMISE (sd)", "m (sd)")

    @classmethod
    def from_rows(cls, rows: Iterable[Row]) -> "MiseTable":
        return cls(rows=[(str(r[0]), *map(float, r[1:])) for r in rows])

    @property
    def labels(self) -> List[str]:
        return [r[0] for r in self.rows]

    def cells(self) -> List[Tuple[str, str, str]]:
        return [
            (label, format_cell(mise, sd), format_dimension(m, sd_m))
            for label, mise, sd, m, sd_m in self.rows
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "mise_x100", "sd_x100", "mean_m", "sd_m", "cell"])
        for (label, mise, sd, m, sd_m), (_, cell, _) in zip(self.rows, self.cells()):
            w.writerow([label, repr(mise), repr(sd), repr(m), repr(sd_m), cell])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [self.header, *self.cells()]
        widths = [max(len(line[i]) for line in lines) for i in range(3)]
        out = []
        for i, line in enumerate(lines):
            out.append(
                "  ".join(
                    cell.ljust(w) if k == 0 else cell.rjust(w)
                    for k, (cell, w) in enumerate(zip(line, widths))
                ).rstrip()
            )
            if i == 0:
                out.append("  ".join("-" * w for w in widths))
        return "\n".join(out) + "\n"
