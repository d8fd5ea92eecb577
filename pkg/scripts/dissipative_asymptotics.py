#!/usr/bin/env python3
"""Long damped run: moment laws, monotone invariants, late-time asymptotics.

Thin wrapper around the `absqm dissipative` command; see `absqm dissipative
--help` for the config schema.  Writes diagnostics.csv and fit.json.
"""

import sys

from absqm.cli import main

if __name__ == "__main__":
    sys.exit(main(["dissipative", *sys.argv[1:]]))
