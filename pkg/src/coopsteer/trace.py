"""Per-run trace: one row per control step, CSV on disk.

Float cells are written with repr(), which round-trips exactly, so identical
runs produce byte-identical files. ``ov_gaps`` holds the visible other
vehicles' center-to-center gaps as a semicolon-joined list (possibly empty);
``status`` holds the cooperative-status label (I, II, III-a, III-b, IV).
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

TRACE_COLUMNS = (
    "time",
    "station",
    "lateral_position",
    "lateral_velocity",
    "heading",
    "wheel_angle",
    "wheel_rate",
    "contact_torque",
    "das_torque",
    "muscle_torque",
    "sat_torque",
    "power_contact",
    "power_das",
    "power_muscle",
    "work_contact",
    "work_das",
    "work_muscle",
    "status",
    "gain",
    "target_lane_center",
    "driver_target_lane",
    "tlc",
    "ov_gaps",
)

STRING_COLUMNS = ("status", "ov_gaps")


class Trace:
    """Columnar run log with CSV round-trip."""

    def __init__(self) -> None:
        self._data: dict[str, list] = {c: [] for c in TRACE_COLUMNS}

    def __len__(self) -> int:
        return len(self._data["time"])

    def append(self, row: dict) -> None:
        for c in TRACE_COLUMNS:
            self._data[c].append(row[c])

    def column(self, name: str) -> list:
        return self._data[name]

    def array(self, name: str) -> np.ndarray:
        if name in STRING_COLUMNS:
            raise ValueError(f"column {name} is not numeric")
        return np.asarray(self._data[name], dtype=float)

    def rows(self) -> Iterable[dict]:
        for i in range(len(self)):
            yield {c: self._data[c][i] for c in TRACE_COLUMNS}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for i in range(len(self)):
                cells = []
                for c in TRACE_COLUMNS:
                    v = self._data[c][i]
                    cells.append(v if isinstance(v, str) else repr(v))
                fh.write(",".join(cells) + "\n")

    @classmethod
    def read_csv(cls, path) -> "Trace":
        trace = cls()
        with open(path, "r") as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header in {path}")
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                cells = line.split(",")
                row = {}
                for c, cell in zip(TRACE_COLUMNS, cells):
                    row[c] = cell if c in STRING_COLUMNS else float(cell)
                trace.append(row)
        return trace
