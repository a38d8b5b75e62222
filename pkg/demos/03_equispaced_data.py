"""
Equispaced samples
==================

With M = N equispaced samples the exact extension of 1/(1+100x^2) blows
up, much like polynomial interpolation. Oversampling and truncating the
SVD gives a stable method instead.
"""

from fourext import ExtensionConfig, exact_extension, get_function, solve, sup_error
from fourext.analysis import condition_bound

f = get_function("runge100")

print("exact extension, M = N (120 digits)")
for N in (10, 20, 30, 40):
    sol = exact_extension(f, ExtensionConfig.equispaced(N, 2.0, 1.0), 120)
    print(f"  N = {N:2d}   sup error = {sup_error(f, sol, 1001):.2e}")

print("truncated SVD, eps = 1e-14")
for gamma in (1.0, 2.0, 4.0):
    errs = []
    for N in (40, 80, 120, 160):
        sol = solve(f, ExtensionConfig.equispaced(N, 2.0, gamma), 1e-14)
        errs.append(f"{sup_error(f, sol):.1e}")
    K = condition_bound("equispaced", 120, 2.0, gamma, 1e-14)
    print(f"  gamma = {gamma:g}   errors at N = 40..160: {', '.join(errs)}   K(120) = {K:.3g}")
