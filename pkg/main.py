#!/usr/bin/env python3
"""
Command-line entry point for modeshape

Usage:
    python main.py analyze --model smib
    python main.py deform --model smib --method heun:2 --h 0.01
    python main.py hmax --model smib --method tm --eps-s 5
"""

import sys
from pathlib import Path

# Ensure the project root is importable
sys.path.insert(0, str(Path(__file__).parent))

if __name__ == "__main__":
    from src.cli import main

    sys.exit(main())
