"""
Main entry point for hmm-mcmc
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
