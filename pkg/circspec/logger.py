"""
Logging setup for circspec runs.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, TextIO

from colorama import Fore, Style


class CircspecLogger:
    """
    Console and file logger for circspec commands.

    Library modules log through ``logging.getLogger(__name__)``; their records
    reach the handlers installed here on the ``circspec`` logger.
    """

    def __init__(
        self,
        name: str = "circspec",
        log_file: Optional[Path] = None,
        verbose: bool = False,
        stream: Optional[TextIO] = None
    ):
        """
        Initialize logger.

        Args:
            name: Logger name
            log_file: Path to log file (optional)
            verbose: Enable debug output
            stream: Console stream (stdout if omitted)
        """
        self.verbose = verbose
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG if verbose else logging.INFO)

        self.logger.handlers.clear()

        console_handler = logging.StreamHandler(stream or sys.stdout)
        console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
        console_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(levelname)s - %(message)s',
            datefmt='%H:%M:%S'
        ))
        self.logger.addHandler(console_handler)

        if log_file:
            log_file = Path(log_file)
            log_file.parent.mkdir(parents=True, exist_ok=True)

            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            ))
            self.logger.addHandler(file_handler)

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def info(self, message: str) -> None:
        self.logger.info(message)

    def warning(self, message: str) -> None:
        self.logger.warning(message)

    def error(self, message: str) -> None:
        self.logger.error(message)

    def run_start(self, command: str, stages: int) -> None:
        """Log the start of a command."""
        self.info(f"🌀 circspec {command}: {stages} stage(s)")

    def stage_start(self, name: str, progress: float) -> None:
        self.info(f"▶️  [{name}] ({progress:.0f}%)")

    def stage_complete(self, name: str, duration: str, progress: float) -> None:
        self.info(f"✅ [{name}] done in {duration} ({progress:.0f}%)")

    def stage_error(self, name: str, error: str) -> None:
        self.error(f"❌ [{name}] {error}")

    def certificate(self, label: str, passed: bool, value: Any = None) -> None:
        """Log one pass/fail certificate line."""
        colour, mark = (Fore.GREEN, "PASS") if passed else (Fore.RED, "FAIL")
        detail = f" ({value})" if value is not None else ""
        self.info(f"{colour}{mark}{Style.RESET_ALL} {label}{detail}")

    def run_complete(self, command: str, duration: str) -> None:
        self.info(f"📊 circspec {command} finished in {duration}")

    def summary(self, summary_data: Dict[str, Any]) -> None:
        """Log a run summary."""
        self.info("📊 Summary")
        for key, value in summary_data.items():
            self.info(f"  {key}: {value}")

    def close(self) -> None:
        """Detach and close the handlers installed by this logger."""
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()
