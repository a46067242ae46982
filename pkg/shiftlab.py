#!/usr/bin/env python3
"""Entry point for the shiftlab command line"""
import sys

from src.cli import run

if __name__ == "__main__":
    sys.exit(run())
