#!/usr/bin/env python3
"""NLS maximum-timestep table: every integrator/solver column over a range of N.

Writes nls_timestep_table.csv (sweep schema) and prints the h_max summary.
"""
import argparse
import sys

from geoexp.harness.cli import main

COLUMNS = "midpoint,midpoint:newton,exp_midpoint,dg,energy_exp"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ns", default="11,21,41,61,81,121,161,201,401")
    ap.add_argument("--workers", default="1")
    ap.add_argument("-o", "--output", default="nls_timestep_table.csv")
    a = ap.parse_args()
    sys.exit(main(["sweep", "--model", "nls", "--Ns", a.Ns, "--methods", COLUMNS,
                   "--workers", a.workers, "-o", a.output]))
