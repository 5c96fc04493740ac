"""Iterated kernels and the Neumann-series resolvent, on a kernel with known
closed forms.

The separable kernel W(t,s) = sqrt(t*s) composes neatly: each extra integral
composition contributes a factor 1/2, and the resolvent at strength lam sums
the geometric series 2/(2-lam) * sqrt(t*s).  This script builds everything
numerically on a grid and compares against those closed forms.
"""

import numpy as np

from graphon_games import (
    GridSpec,
    SeparablePowerGraphon,
    StepProfile,
    iterated_kernel,
    resolvent,
    step_approximation,
)

N = 256
grid = GridSpec(N)
W = SeparablePowerGraphon(0.5)
mids = grid.midpoints()

print("== step approximation ==")
wbar = step_approximation(W, 8)
print("8-step averages of sqrt(t*s), first row:")
print(np.array2string(wbar.values[0], precision=4))

print()
print("== iterated kernels: the halving law ==")
for n in (1, 2, 3, 4):
    kn = iterated_kernel(W, n, grid, m=1)
    expected = np.sqrt(mids[-1] * mids[-1]) / 2 ** (n - 1)
    print(f"W_{n}(1,1) = {kn.values[-1, -1]:.6f}   closed form {expected:.6f}")

print()
print("== Neumann-series resolvent ==")
lam = 0.5
kernel = resolvent(W, lam, grid, tol=1e-10)
print(f"lambda = {lam}, truncated after {kernel.truncation_order} terms, "
      f"tail bound {kernel.tail_bound:.2e}")
gamma_exact = (2.0 / (2.0 - lam)) * np.sqrt(mids[-1] * mids[-1])
print(f"Gamma(1,1) = {kernel.gamma[-1, -1]:.6f}   closed form {gamma_exact:.6f}")

print()
print("== the resolvent inverts I - lam*K ==")
rng = np.random.default_rng(0)
g = rng.random(N)
s = g + lam * kernel.apply(g).values
wbar = step_approximation(W, N)
residual = np.abs(s - lam * (wbar.values @ s / N) - g).max()
print(f"sup-norm residual of (I - lam*K)(g + lam*Gamma g) - g: {residual:.2e}")
