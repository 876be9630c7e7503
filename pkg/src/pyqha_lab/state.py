from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class GridOverrides:
    L: float | None = None
    M: int | None = None


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out_dir: Path = Path("qha_out")
    N: int | None = None
    workers: int | None = None
    grid: GridOverrides = field(default_factory=GridOverrides)

    def effective(self) -> dict[str, Any]:
        """Config as echoed into report.json. ``workers`` is left out: it never changes a value."""

        return {
            "experiment": self.experiment,
            "params": dict(self.params),
            "seed": self.seed,
            "N": self.N,
            "grid": {"L": self.grid.L, "M": self.grid.M},
        }


@dataclass
class RunState:
    config: ExperimentConfig
    started_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    log_lines: list[str] = field(default_factory=list)
    stage_seconds: dict[str, float] = field(default_factory=dict)
    exit_code: int | None = None

    def log(self, message: str) -> None:
        self.log_lines.append(f"{time.time() - self.started_at:9.3f}s {message}")

    def finish(self, exit_code: int) -> None:
        self.exit_code = exit_code
        self.finished_at = time.time()

    @property
    def elapsed(self) -> float:
        end = self.finished_at if self.finished_at is not None else time.time()
        return end - self.started_at
