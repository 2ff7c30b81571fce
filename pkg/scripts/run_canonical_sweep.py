#!/usr/bin/env python3
"""Run the canonical epsilon ladder on the unit ball and verify the blow-up
laws against it.

Equivalent to:
    ballblowup sweep --out out/records.jsonl
    ballblowup verify --records out/records.jsonl --out out/verdict.json
"""

import sys
from pathlib import Path

from ballblowup.cli import main


def run(out_dir="out"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = out / "records.jsonl"
    code = main(["sweep", "--out", str(records)])
    if code != 0:
        return code
    return main(["verify", "--records", str(records),
                 "--out", str(out / "verdict.json")])


if __name__ == "__main__":
    sys.exit(run(*sys.argv[1:]))
