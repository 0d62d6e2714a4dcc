"""
Main entry point for the MFB-CIM sampler.
Run `python main.py --help` for the available subcommands.
"""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
