#!/usr/bin/env python3
"""Export steepest-descent/ascent rays and level curves for both phases.

Usage:
    python scripts/trace_contours.py [outdir]

Produces two-column text files (one "x y" pair per line, blank lines
between segments) ready for gnuplot/matplotlib.
"""

from __future__ import annotations

import pathlib
import sys

import numpy as np

from kernelwave.phase import export_level_curve, make_phase, trace_steepest

RAYS = {
    "airy": [
        (1j, np.pi / 4, True), (1j, np.pi / 4 + np.pi, True),
        (1j, 3 * np.pi / 4, False), (1j, -np.pi / 4, False),
        (-1j, -np.pi / 4, True), (-1j, -np.pi / 4 + np.pi, True),
    ],
    "pearcey": [
        (np.exp(1j * np.pi / 3), 7 * np.pi / 6, True),
        (np.exp(1j * np.pi / 3), np.pi / 6, True),
        (np.exp(-1j * np.pi / 3), 5 * np.pi / 6, True),
        (np.exp(-1j * np.pi / 3), -np.pi / 6, True),
        (-1.0 + 0j, np.pi / 2, True), (-1.0 + 0j, -np.pi / 2, True),
    ],
}


def main() -> int:
    outdir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "contours")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, kind in (("airy", "airy-cubic"), ("pearcey", "pearcey-quartic")):
        phase = make_phase(kind)
        lines = []
        for saddle, angle, descent in RAYS[name]:
            path = trace_steepest(phase, saddle, angle, descent=descent,
                                  max_arclength=6.0)
            lines.extend(f"{z.real:.17g} {z.imag:.17g}" for z in path.points)
            lines.append("")
        (outdir / f"{name}-rays.dat").write_text("\n".join(lines) + "\n")

        lines = []
        for saddle in phase.saddles:
            level = phase.f(saddle).imag
            for seg in export_level_curve(phase, level, window=(-3, 3, -3, 3)):
                lines.extend(f"{z.real:.17g} {z.imag:.17g}" for z in seg)
                lines.append("")
        (outdir / f"{name}-levels.dat").write_text("\n".join(lines) + "\n")
        print(f"{name}: wrote {name}-rays.dat and {name}-levels.dat in {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
