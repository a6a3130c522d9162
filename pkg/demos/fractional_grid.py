"""Fractional Laplacian on an interval with the exterior folded into killing.

The discrete jump and killing parts of E_p approach the continuum pieces
computed by quadrature as the grid is refined. The killing weight blows up
like dist^(-2s) at the endpoints, so its midpoint sum converges only at
rate h^(1-2s) when u does not vanish there.

Run: python3 demos/fractional_grid.py
"""

import numpy as np

from sbforms.euclid import Grid1D, build_fractional, continuum_ep, fractional_spec
from sbforms.forms import breakdown_of

s, p = 0.4, 1.5
u = lambda x: np.sin(np.pi * x) ** 2 + 0.5
du = lambda x: np.pi * np.sin(2 * np.pi * x)

ref = continuum_ep(fractional_spec(s, p, (0.0, 1.0)), u, du, quad_N=256)
print(f"continuum: jump {ref.jump:.6f}  kill {ref.kill:.6f}")
for N in (64, 128, 256, 512):
    grid = Grid1D(0.0, 1.0, N, boundary="dirichlet-exterior")
    br = breakdown_of(build_fractional(grid, s), u(grid.nodes), p)
    print(f"N = {N:4d}: jump {br.jump:.6f}  kill {br.kill:.6f}")
