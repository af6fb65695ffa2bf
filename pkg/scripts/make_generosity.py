#!/usr/bin/env python3
"""Benefit/contribution generosity comparison.

Runs the validation oracle first (the generosity command refuses to run
without its verdict artifact), then tabulates the guaranteed plan against
the pool at gamma = 2 and gamma = 10.
"""

import sys

from elris.cli import main


def run(out_dir="out"):
    rc = main(["oracle", "--out-dir", out_dir])
    if rc:
        return rc
    rc = main(["generosity", "--gamma", "2", "--n", "30",
               "--out-dir", out_dir])
    if rc:
        return rc
    # separate directory: each generosity run overwrites generosity.csv
    rc = main(["oracle", "--out-dir", f"{out_dir}/gamma10"])
    if rc:
        return rc
    return main(["generosity", "--gamma", "10", "--n", "30", "--mbar", "70",
                 "--out-dir", f"{out_dir}/gamma10"])


if __name__ == "__main__":
    sys.exit(run(*sys.argv[1:]))
