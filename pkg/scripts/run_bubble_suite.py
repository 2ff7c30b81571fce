#!/usr/bin/env python3
"""Recover the bubble-calculus expansion coefficients and sharp constants
numerically and print the comparison table.

Equivalent to `ballblowup bubbletest`.
"""

import sys

from ballblowup.cli import main

if __name__ == "__main__":
    sys.exit(main(["bubbletest", *sys.argv[1:]]))
