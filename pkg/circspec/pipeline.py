"""
Sequential stage runner for circspec commands.
"""

import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

from circspec.logger import CircspecLogger
from circspec.utils import format_duration


class StageStatus(Enum):
    """Stage execution status."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass
class Stage:
    """One named step of a command; ``func`` receives the results of earlier stages."""
    name: str
    func: Callable[[Dict[str, Any]], Any]
    status: StageStatus = StageStatus.PENDING
    result: Optional[Any] = None
    error: Optional[str] = None
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    @property
    def duration(self) -> float:
        if self.start_time is None or self.end_time is None:
            return 0.0
        return self.end_time - self.start_time


class Pipeline:
    """
    Runs stages in order, sharing results by stage name.

    A failing stage marks every later stage as skipped and re-raises.
    """

    def __init__(self, command: str, logger: Optional[CircspecLogger] = None):
        self.command = command
        self.logger = logger
        self.stages: List[Stage] = []
        self.results: Dict[str, Any] = {}

    def add(self, name: str, func: Callable[[Dict[str, Any]], Any]) -> "Pipeline":
        if any(stage.name == name for stage in self.stages):
            raise ValueError(f"duplicate stage name: {name}")
        self.stages.append(Stage(name, func))
        return self

    def run(self) -> Dict[str, Any]:
        """
        Execute all stages.

        Returns:
            Results keyed by stage name
        """
        started = time.perf_counter()
        if self.logger:
            self.logger.run_start(self.command, len(self.stages))
        total = len(self.stages)
        for i, stage in enumerate(self.stages):
            stage.status = StageStatus.RUNNING
            stage.start_time = time.perf_counter()
            if self.logger:
                self.logger.stage_start(stage.name, 100.0 * i / total)
            try:
                stage.result = stage.func(self.results)
            except Exception as e:
                stage.end_time = time.perf_counter()
                stage.status = StageStatus.FAILED
                stage.error = str(e)
                if self.logger:
                    self.logger.stage_error(stage.name, stage.error)
                for later in self.stages[i + 1:]:
                    later.status = StageStatus.SKIPPED
                raise
            stage.end_time = time.perf_counter()
            stage.status = StageStatus.COMPLETED
            self.results[stage.name] = stage.result
            if self.logger:
                self.logger.stage_complete(stage.name, format_duration(stage.duration), 100.0 * (i + 1) / total)
        if self.logger:
            self.logger.run_complete(self.command, format_duration(time.perf_counter() - started))
            if self.logger.verbose:
                self.logger.summary(self.summary())
        return self.results

    def summary(self) -> Dict[str, Any]:
        """Counts per status and per-stage durations."""
        counts = {status.value: 0 for status in StageStatus}
        for stage in self.stages:
            counts[stage.status.value] += 1
        return {
            "command": self.command,
            "stages": len(self.stages),
            **counts,
            "durations": {stage.name: format_duration(stage.duration) for stage in self.stages},
        }
