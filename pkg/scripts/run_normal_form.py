#!/usr/bin/env python3
"""Run the four repeated-game experiments with their checked-in configs."""

import sys
from pathlib import Path

from eqsentinel.harness.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results"
    rc = 0
    for name in ("nf-fwer-null", "nf-detect", "nf-sensitivity", "nf-slack"):
        print(f"== {name} ==")
        rc |= main(
            [
                name,
                "--config",
                str(ROOT / "configs" / f"{name}.cfg"),
                "--out",
                str(out / name),
                "--assert",
            ]
        )
    raise SystemExit(rc)
