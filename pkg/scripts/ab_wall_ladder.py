#!/usr/bin/env python3
"""Wall-height ladder for the cylindrical bound state.

Thin wrapper around the `absqm ab-sweep` command.  Writes sweep.csv (one row
per ladder rung) and profile_XX.csv radial profiles.
"""

import sys

from absqm.cli import main

if __name__ == "__main__":
    sys.exit(main(["ab-sweep", *sys.argv[1:]]))
