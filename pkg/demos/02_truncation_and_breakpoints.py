"""
Truncation and the breakpoint
=============================

The continuous extension for f(x) = x converges geometrically until the
discarded singular values reach the truncation level, after which the
error stalls. Extended precision shows that the exact extension keeps going.
"""

from fourext import ExtensionConfig, PrecisionContext, attach_rhs, build_system, get_function, \
    sup_error, svd, truncated_solve
from fourext.analysis import breakpoints, plateau_onset

f = get_function("linear")
P = PrecisionContext.extended(50)

for eps in (1e-6, 1e-12):
    print(f"eps = {eps:g}, predicted N0 = {breakpoints(2.0, eps, Nmax=None).N0:.2f}")
    curve = []
    for N in range(1, 16):
        system = attach_rhs(build_system(ExtensionConfig(T=2.0, N=N), P), f)
        fact = svd(system)
        tsvd = truncated_solve(system, eps, fact)
        exact = truncated_solve(system, 0.0, fact)
        e = sup_error(f, tsvd, 401)
        curve.append((N, e))
        print(f"  N = {N:2d}   truncated {e:.2e}   exact {sup_error(f, exact, 401):.2e}")
    print(f"  error stops decreasing at N = {plateau_onset(curve)}")
