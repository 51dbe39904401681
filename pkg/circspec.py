#!/usr/bin/env python3
"""
circspec: circular spectrum and bounded solutions of periodic evolution equations.
Main entry point for the command-line tool.
"""

import sys
from pathlib import Path

# Add the project root to the path
sys.path.insert(0, str(Path(__file__).parent))

from circspec.cli import main


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        sys.exit(130)
