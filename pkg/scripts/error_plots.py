#!/usr/bin/env python3
"""Energy and trajectory error series for the exponential integrators.

Runs the four trajectory experiments (exp_midpoint and energy_exp on NLS and
KdV), then writes error_plots_render.py, a matplotlib script that draws them.
"""
import argparse
import sys

from geoexp.harness.cli import main

RUNS = {
    "nls_exp_midpoint.csv": ["--model", "nls", "--N", "161", "--method", "exp_midpoint",
                             "--h", "0.01"],
    "nls_energy_exp.csv": ["--model", "nls", "--N", "161", "--method", "energy_exp",
                           "--h", "0.01"],
    "kdv_exp_midpoint.csv": ["--model", "kdv", "--N", "401", "--method", "exp_midpoint",
                             "--h", "5e-4"],
    "kdv_energy_exp.csv": ["--model", "kdv", "--N", "401", "--method", "energy_exp",
                           "--h", "5e-4"],
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", default="1000")
    ap.add_argument("--no-reference", action="store_true",
                    help="skip the h/100 reference run (drops the trajectory-error panel)")
    a = ap.parse_args()
    worst = 0
    for out, args in RUNS.items():
        extra = [] if a.no_reference else ["--reference"]
        code = main(["integrate", *args, "--steps", a.steps, "--tol", "1e-13", *extra, "-o", out])
        print(f"{out}: exit {code}")
        worst = max(worst, code)
    main(["plot-script", *RUNS, "-o", "error_plots_render.py"])
    sys.exit(worst)
