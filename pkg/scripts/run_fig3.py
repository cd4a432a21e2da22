"""Bit-flip code under feedback with detector efficiency eta = 1.0 .. 0.6 (density matrices)."""

import sys

from _common import sweep

if __name__ == "__main__":
    sys.exit(sweep("fig3", "out/fig3", __doc__))
