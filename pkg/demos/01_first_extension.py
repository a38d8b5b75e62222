"""
A first Fourier extension
=========================

Approximate a non-periodic function on [-1, 1] by a Fourier series that is
periodic on the larger interval [-T, T].
"""

import numpy as np

from fourext import ExtensionConfig, get_function, solve, evaluate, sup_error

# the Runge function is smooth but has poles at +-0.2i
f = get_function("runge25")

# mapped Chebyshev sampling ("discrete"), extension interval [-2, 2]
for N in (10, 20, 40, 80, 120):
    config = ExtensionConfig(T=2.0, N=N, grid="discrete")
    sol = solve(f, config, 1e-14)
    print(f"N = {N:3d}   sup error = {sup_error(f, sol):.2e}   rank kept = {sol.keptRank}")

# the extension is defined on all of [-T, T], not only on [-1, 1]
x = np.linspace(-2, 2, 9)
vals = evaluate(sol, x)
for xi, v in zip(x, vals):
    print(f"x = {xi:+.1f}   extension = {v.real:+.6f}")
