"""Generate standalone matplotlib scripts from harness CSVs.

The generated script is an artifact; nothing here imports matplotlib or runs it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .experiments import SUMMARY_COLUMNS, SUMMARY_MARKER, SWEEP_COLUMNS, TRAJECTORY_COLUMNS


class SchemaError(ValueError):
    pass


@dataclass
class CsvInfo:
    path: str
    kind: str  # "sweep" or "trajectory"
    columns: tuple[str, ...]
    series: tuple[str, ...] = ()


def inspect_csv(path: str, text: str) -> CsvInfo:
    """Classify a harness CSV by its header; raises SchemaError on anything else."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    body = [ln for ln in lines if not ln.startswith("#")]
    if len(body) < 2:
        raise SchemaError(f"{path}: no data rows")
    header = tuple(body[0].split(","))
    if header == SWEEP_COLUMNS:
        rows = [r for r in csv.reader(io.StringIO("\n".join(body[1:])))
                if tuple(r) != SUMMARY_COLUMNS]
        series = tuple(dict.fromkeys(f"{r[0]}:{r[1]}" for r in rows if r))
        if SUMMARY_MARKER not in lines:
            raise SchemaError(f"{path}: sweep CSV lacks the summary section")
        return CsvInfo(path, "sweep", header, series)
    if header in (TRAJECTORY_COLUMNS, tuple(c for c in TRAJECTORY_COLUMNS if c != "traj_error")):
        return CsvInfo(path, "trajectory", header)
    raise SchemaError(f"{path}: unrecognised header {','.join(header)!r}")


_PRELUDE = '''#!/usr/bin/env python3
"""Plots generated by geoexp plot-script. Requires numpy and matplotlib."""
import numpy as np
import matplotlib.pyplot as plt


def read_sweep_summary(path):
    rows, in_summary = [], False
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line == "# summary":
                in_summary = True
                continue
            if not in_summary or not line or line.startswith("#") or line.startswith("method,"):
                continue
            method, solver, n, h_max = line.split(",")
            if h_max:
                rows.append((method + ":" + solver, int(n), float(h_max)))
    return rows


def read_trajectory(path):
    return np.genfromtxt(path, delimiter=",", names=True, comments="#")

'''


def _sweep_block(info: CsvInfo, idx: int) -> str:
    return f'''
rows = read_sweep_summary({info.path!r})
fig, ax = plt.subplots()
for label in {list(info.series)!r}:
    pts = sorted((n, h) for lab, n, h in rows if lab == label)
    if pts:
        ns, hs = zip(*pts)
        ax.loglog(ns, hs, "o-", label=label)
ax.set_xlabel("N")
ax.set_ylabel("h_max")
ax.set_title({info.path!r})
ax.legend()
fig.savefig("plot_{idx}_hmax.png", dpi=150)
'''


def _trajectory_block(info: CsvInfo, idx: int) -> str:
    has_traj = "traj_error" in info.columns
    panels = 2 if has_traj else 1
    code = f'''
data = read_trajectory({info.path!r})
fig, axes = plt.subplots({panels}, 1, squeeze=False, sharex=True)
axes[0, 0].semilogy(data["t"], np.abs(data["energy_error"]) + 1e-300)
axes[0, 0].set_ylabel("|energy error|")
axes[0, 0].set_title({info.path!r})
'''
    if has_traj:
        code += '''axes[1, 0].semilogy(data["t"][1:], data["traj_error"][1:] + 1e-300)
axes[1, 0].set_ylabel("trajectory error")
'''
    code += f'''axes[-1, 0].set_xlabel("t")
fig.savefig("plot_{idx}_errors.png", dpi=150)
'''
    return code


def build_plot_script(infos: list[CsvInfo]) -> str:
    if not infos:
        raise SchemaError("no CSV files given")
    parts = [_PRELUDE]
    for i, info in enumerate(infos):
        block = _sweep_block if info.kind == "sweep" else _trajectory_block
        parts.append(block(info, i))
    parts.append("\nplt.show()\n")
    return "".join(parts)
