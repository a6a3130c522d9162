"""Second-order convergence of the discrete p-form for a periodic diffusion.

With u = 2 + sin x on [0, 2 pi] the discrete E_p tends to
(p - 1) int |u|^(p-2) u'^2 dx, the same number as
4 (p - 1) / p^2 int ((u^(p/2))')^2 dx.

Run: python3 demos/euclid_local_constant.py
"""

import numpy as np

from sbforms.euclid import ConvergenceRow, local_constant_study

for p in (1.5, 2.0, 3.0):
    rows = local_constant_study(lambda x: 2.0 + np.sin(x), np.cos, p, [32, 64, 128, 256, 512])
    print(f"p = {p}, continuum value {rows[0].continuum_value:.12f}")
    print("  " + "  ".join(f"{f:>14}" for f in ConvergenceRow.FIELDS[:-1]))
    for r in rows:
        rec = r.record()
        print("  " + "  ".join(f"{rec[f]:14.6g}" for f in ConvergenceRow.FIELDS[:-1]))
