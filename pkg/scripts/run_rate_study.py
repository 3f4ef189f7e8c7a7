#!/usr/bin/env python3
"""Run the full residual rate study and write CSV tables plus a summary.

Usage:
    python scripts/run_rate_study.py [outdir]

Writes one residual CSV per (transition, point) and prints the fitted
slopes with their acceptance windows.
"""

from __future__ import annotations

import pathlib
import sys

from kernelwave.verify import (
    ACCEPTANCE_WINDOWS,
    DEFAULT_A_GRID,
    DEFAULT_STUDY_POINTS,
    check_windows,
    residual_study,
    table_to_csv,
)


def main() -> int:
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "rate_study")
    outdir.mkdir(parents=True, exist_ok=True)
    failures = []
    for transition, windows in ACCEPTANCE_WINDOWS.items():
        n_max = max(windows)
        for i, point in enumerate(DEFAULT_STUDY_POINTS):
            table = residual_study(transition, point, DEFAULT_A_GRID, n_max)
            path = outdir / f"{transition}-pt{i}.csv"
            path.write_text(table_to_csv(table))
            bad = check_windows(table)
            failures.extend(bad)
            slopes = " ".join(
                f"N={k}: {table.slopes[k]:+.3f} (window {windows[k][0]}..{windows[k][1]})"
                for k in range(n_max + 1)
            )
            print(f"{transition} point {point}: {slopes} -> {path}")
    if failures:
        print("\nwindow violations:")
        for line in failures:
            print(f"  {line}")
        return 1
    print("\nall slope windows hold")
    return 0


if __name__ == "__main__":
    sys.exit(main())
