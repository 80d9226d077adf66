from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ResidualHistory:
    """Per-iteration true relative residuals with elapsed wall time."""

    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, iteration: int, residual: float) -> None:
        if self.iterations and iteration <= self.iterations[-1]:
            raise ValueError(f"iteration {iteration} does not follow {self.iterations[-1]}")
        self.iterations.append(int(iteration))
        self.residuals.append(float(residual))
        self.seconds.append(time.perf_counter() - self._start)

    def __len__(self):
        return len(self.iterations)

    @property
    def final(self) -> float:
        return self.residuals[-1] if self.residuals else float("nan")

    @property
    def n_iterations(self) -> int:
        return self.iterations[-1] if self.iterations else 0

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "rel_residual", "seconds"])
            for it, res, sec in zip(self.iterations, self.residuals, self.seconds):
                writer.writerow([it, repr(res), f"{sec:.6f}"])
