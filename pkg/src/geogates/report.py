"""Result container shared by the simulation front ends."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class GateReport:
    scalars: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)  # column name -> 1-D array, "t" first
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.scalars[key]

    def write_series(self, path, columns=None) -> None:
        columns = list(columns or self.series)
        data = np.column_stack([np.asarray(self.series[c], dtype=float) for c in columns])
        write_table(path, columns, data)


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else f"{v:.17g}" for v in row])
