#!/usr/bin/env python3
"""Cross-validate the two contour geometries on a random query cloud.

Usage:
    python scripts/backend_crosscheck.py [n_points] [seed]

Prints the cross-check table and exits nonzero if any row is flagged
(discrepancy beyond the combined error estimates).
"""

from __future__ import annotations

import sys

import numpy as np

from kernelwave.kernels import KernelQuery
from kernelwave.verify import cross_validate


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 8
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    rng = np.random.default_rng(seed)
    queries = []
    for _ in range(n):
        t1, t2, u, v = rng.uniform(-1.0, 1.0, size=4)
        kernel = rng.choice(("airy-ext", "pearcey-ext"))
        queries.append(KernelQuery(str(kernel), t1, t2, u, v))
    report = cross_validate(queries)
    print(report.to_csv())
    print(
        f"# rows={len(report.rows)} flagged={report.n_flagged} "
        f"max_discrepancy={report.max_discrepancy:.3e}"
    )
    return 1 if report.n_flagged else 0


if __name__ == "__main__":
    sys.exit(main())
