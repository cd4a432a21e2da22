"""Solid-state parameters: 1 ms at dt = 1 ns. About 3 minutes per 100 trajectories per sweep point."""

import sys

from _common import sweep

if __name__ == "__main__":
    sys.exit(sweep("hardware", "out/hardware", __doc__))
