#!/usr/bin/env python3
"""Nonrelativistic-limit ladder for the Klein-Gordon solver.

Thin wrapper around the `absqm kg-limit` command.  Writes limit.csv with the
distance D(c) per c and fit.json with the fitted decay exponent.
"""

import sys

from absqm.cli import main

if __name__ == "__main__":
    sys.exit(main(["kg-limit", *sys.argv[1:]]))
