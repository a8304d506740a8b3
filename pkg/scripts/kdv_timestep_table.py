#!/usr/bin/env python3
"""KdV maximum-timestep table (nu = 5e-4) for the fixed-point columns.

The large-N midpoint and dg rows take several minutes each; pass a shorter
--Ns list for a quick look.
"""
import argparse
import sys

from geoexp.harness.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ns", default="401,601,801,1001,1201,1401")
    ap.add_argument("--methods", default="midpoint,exp_midpoint,dg,energy_exp")
    ap.add_argument("--nu", default="5e-4")
    ap.add_argument("--workers", default="1")
    ap.add_argument("-o", "--output", default="kdv_timestep_table.csv")
    a = ap.parse_args()
    sys.exit(main(["sweep", "--model", "kdv", "--Ns", a.Ns, "--methods", a.methods,
                   "--nu", a.nu, "--workers", a.workers, "-o", a.output]))
