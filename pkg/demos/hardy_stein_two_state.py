"""Hardy-Stein balance on the two-state chain and on a killed random chain.

For the conservative two-state chain with u = (0, 1) and p = 2 both sides
equal 1/2: the mass drops from 1 to 1/2 and the dissipation 2 E(T_t u)
integrates to the same amount.

Run: python3 demos/hardy_stein_two_state.py
"""

import numpy as np

from sbforms import batch
from sbforms.hardy_stein import decay_curve, hardy_stein
from sbforms.model import FiniteModel
from sbforms.semigroup import spectral_decompose

two = FiniteModel(np.ones(2), np.array([[-1.0, 1.0], [1.0, -1.0]]))
rep = hardy_stein(spectral_decompose(two), [0.0, 1.0], 2.0)
print(f"two-state: lhs {rep.lhs:.15f}  rhs {rep.rhs_total:.15f}  T* {rep.truncation_time:.1f}")

inst = batch.make_instance(seed=5, index=1, sizes=(15, 15), killing=True)
sg = spectral_decompose(inst.model)
for p in (1.5, 3.0):
    r = hardy_stein(sg, inst.u, p)
    print(f"killed chain p={p}: lhs {r.lhs:.10f}  jump {r.rhs_jump:.10f}  kill {r.rhs_kill:.10f}  "
          f"gap {r.discrepancy:.1e}")

print("\n   t   ||T_t u||_p^p   p E_p(T_t u)")
for pt in decay_curve(sg, inst.u, 3.0, np.linspace(0, 2, 9)):
    print(f"{pt.t:4.2f}  {pt.norm_p:14.8f}  {pt.dissipation:12.8f}")
