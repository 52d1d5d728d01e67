"""
Command-line entry point
Run this file to use the toolkit: python run.py <command> ...
"""
import sys

from dropreef.cli.main import main


if __name__ == "__main__":
    sys.exit(main())
