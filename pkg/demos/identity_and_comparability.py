"""Three routes to E_p on one random chain, and the comparability bracket.

Run: python3 demos/identity_and_comparability.py
"""

import numpy as np

from sbforms import batch
from sbforms.forms import bd_form_p, comparability_check, ep_approx, ep_generator
from sbforms.model import decompose
from sbforms.semigroup import spectral_decompose

inst = batch.make_instance(seed=1, index=3, sizes=(12, 12), killing=True)
model, u = inst.model, inst.u
bd = decompose(model)
sg = spectral_decompose(model)

print(f"n = {model.n}, total killing = {bd.kappa.sum():.4f}")
print(f"{'p':>5} {'generator':>14} {'jump+kill':>14} {'kernel t=1e-6':>14} {'lower':>10} {'upper':>10}")
for p in (1.1, 1.5, 2.0, 3.0, 5.0):
    gen = ep_generator(model, u, p)
    br = bd_form_p(bd, u, p)
    ap = ep_approx(sg, u, p, 1e-6).direct
    c = comparability_check(model, u, p)
    print(f"{p:5.1f} {gen:14.8f} {br.total:14.8f} {ap:14.8f} {c.lower:10.4f} {c.upper:10.4f}")

# at p = 2 the lower bound is attained
c = comparability_check(model, u, 2.0)
print("p = 2 lower margin:", c.lower_margin)
