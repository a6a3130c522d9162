"""Sweep the two-point inequalities over the three sampling laws.

Prints the smallest margin and how the heavy-tail draws fall into the
regions A-G of the normalised (s, t) plane.

Run: python3 demos/lemma_sweep.py
"""

from sbforms.inequalities import DISTRIBUTIONS, REGIONS, sweep

alphas = [0.1, 0.5, 1.0, 1.5, 1.9]
ns = [2, 16, 64]
for dist in DISTRIBUTIONS:
    rep = sweep(seed=11, count=4000, alphas=alphas, ns=ns, distribution=dist)
    print(f"{dist:>18}: {rep.total_samples} samples, violations {rep.violations}, "
          f"min margin {rep.min_margin:.3e}")
    if dist == "heavy-tail":
        totals = rep.region_totals()
        print("  regions:", "  ".join(f"{k}={totals[k]}" for k in REGIONS))
