"""Bit-flip code under feedback at gamma = 0.1, 0.3, 1.0 (pure-state unraveling)."""

import sys

from _common import sweep

if __name__ == "__main__":
    sys.exit(sweep("fig2", "out/fig2", __doc__))
