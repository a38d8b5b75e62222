"""Assembly of Fourier extension systems, quadrature and norms.

Three system kinds share one container:

* ``continuous``: the prolate Gram matrix ``A`` with entries
  ``sin(k pi / T) / (k pi)`` and right-hand side ``b_n = <f, phi_n>``.
* ``discrete``: collocation at mapped Chebyshev nodes with the trig basis,
  scaled by ``sqrt(pi / (N + 1))``.
* ``equispaced``: collocation at ``2M + 1`` equispaced nodes, scaled by
  ``1 / sqrt(M + 1/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _mp
from .core import (COMPLEX, NP, ExtensionConfig, basis_matrix, cos_sin_table, equispaced_nodes,
                   mapped_chebyshev_nodes)
from .errors import BudgetError, ConvergenceError, DomainError
from .precision import DOUBLE, PrecisionContext

__all__ = [
    "LinearSystem",
    "GramMatrices",
    "QuadratureRule",
    "build_system",
    "attach_rhs",
    "continuous_rhs",
    "continuous_gram",
    "equispaced_gram",
    "weighted_gram",
    "extended_domain_gram",
    "gram_matrices",
    "integrate",
    "norm",
    "gram_limit_check",
    "MAX_ENTRIES",
]

#: Guard on the number of matrix entries a single assembly may allocate.
MAX_ENTRIES = 4_000_000


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule with adaptive panel bisection.

    Each panel is accepted when the ``order``-point estimate agrees with the
    sum over its two halves to within ``tol`` (scaled by the panel width);
    otherwise the panel is bisected, up to ``max_depth`` times.
    """

    panels: int = 8
    order: int = 24
    domain: tuple = (-1.0, 1.0)
    tol: float = 1e-14
    max_depth: int = 30

    @classmethod
    def for_degree(cls, N: int, precision: PrecisionContext = DOUBLE, domain=(-1.0, 1.0)):
        panels = max(8, math.ceil(N / 2))
        if precision.is_extended:
            return cls(panels, max(24, math.ceil(0.6 * precision.digits)), domain,
                       10.0 ** (-(precision.digits - 10)))
        return cls(panels, 24, domain, 1e-14)


@dataclass(frozen=True)
class LinearSystem:
    """Assembled matrix, optional right-hand side and provenance.

    In extended precision ``matrix`` and ``rhs`` are object arrays whose
    entries belong to ``ctx``.
    """

    matrix: np.ndarray = field(repr=False)
    kind: str
    config: ExtensionConfig
    precision: PrecisionContext = DOUBLE
    rhs: Optional[np.ndarray] = field(default=None, repr=False)
    nodes: Optional[np.ndarray] = field(default=None, repr=False)
    ctx: object = field(default=None, repr=False, compare=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def ns(self):
        return NP if self.ctx is None else _mp.Namespace(self.ctx)

    def with_rhs(self, rhs) -> "LinearSystem":
        rhs = np.asarray(rhs)
        if rhs.shape != (self.matrix.shape[0],):
            raise DomainError(f"rhs has shape {rhs.shape}, expected ({self.matrix.shape[0]},)")
        if self.ctx is not None and rhs.dtype != object:
            rhs = _mp.to_mp(rhs, self.ctx)
        return replace(self, rhs=rhs)


@dataclass(frozen=True)
class GramMatrices:
    """Continuous Gram ``A``, weighted Gram ``AW`` and Gram ``GT`` on ``[-T, T]``."""

    A: np.ndarray
    AW: Optional[np.ndarray]
    GT: np.ndarray


def _scalar(v, ctx):
    return v if ctx is None else ctx.convert(v)


def _guard(rows: int, cols: int) -> None:
    if rows * cols > MAX_ENTRIES:
        raise BudgetError(f"{rows}x{cols} system exceeds the cap of {MAX_ENTRIES} entries")


def _toeplitz(first, dtype):
    n = len(first)
    out = np.empty((n, n), dtype=dtype)
    for i in range(n):
        for j in range(n):
            out[i, j] = first[abs(i - j)]
    return out


def continuous_gram(config: ExtensionConfig, ctx=None) -> np.ndarray:
    """Gram matrix of the basis in ``L^2(-1, 1)``.

    Complex basis: the prolate matrix with ``A_0 = 1/T`` and
    ``A_k = sin(k pi / T) / (k pi)``. Trig basis: closed-form integrals of
    the cosine and sine products (block diagonal by parity).
    """
    T = _scalar(config.T, ctx)
    pi = np.pi if ctx is None else ctx.pi
    sin = math.sin if ctx is None else ctx.sin
    if config.basis == COMPLEX:
        n = config.dim
        first = [1 / T] + [sin(k * pi / T) / (k * pi) for k in range(1, n)]
        return _toeplitz(first, float if ctx is None else object)

    def sinc_int(w):
        # integral over [-1, 1] of cos(w x)
        return 2 * sin(w) / w if w != 0 else _scalar(2.0, ctx)

    N = config.N
    n = config.dim
    out = np.zeros((n, n), dtype=float if ctx is None else object)
    if ctx is not None:
        out[:] = ctx.zero
    # columns 0..N hold sines of order N+1..1, columns N+1..2N+1 hold cosines 0..N
    for a in range(N + 1):
        for b in range(N + 1):
            wa, wb = a * pi / T, b * pi / T
            out[N + 1 + a, N + 1 + b] = (sinc_int(wa - wb) + sinc_int(wa + wb)) / 2
            sa, sb = (N + 1 - a) * pi / T, (N + 1 - b) * pi / T
            out[a, b] = (sinc_int(sa - sb) - sinc_int(sa + sb)) / 2
    return out


def equispaced_gram(config: ExtensionConfig, ctx=None) -> np.ndarray:
    """Normal matrix ``B = Abar^* Abar`` of the equispaced system in closed form.

    ``B[n, m] = sin((2M+1) t / 2) / ((2M+1) T sin(t / 2))`` with
    ``t = (m - n) pi / (M T)``, and ``1/T`` on the diagonal.
    """
    if config.grid != "equispaced":
        raise DomainError("equispaced_gram needs an equispaced configuration")
    M = config.M
    T = _scalar(config.T, ctx)
    pi = np.pi if ctx is None else ctx.pi
    sin = math.sin if ctx is None else ctx.sin
    first = [1 / T]
    for k in range(1, config.dim):
        t = k * pi / (M * T)
        first.append(sin((2 * M + 1) * t / 2) / ((2 * M + 1) * T * sin(t / 2)))
    return _toeplitz(first, float if ctx is None else object)


def extended_domain_gram(config: ExtensionConfig, ctx=None) -> np.ndarray:
    """Gram matrix on ``[-T, T]``: identity (complex) or diag(T, .., 2T, T, ..) (trig)."""
    n = config.dim
    if config.basis == COMPLEX:
        diag = [_scalar(1.0, ctx)] * n
    else:
        T = _scalar(config.T, ctx)
        diag = [T] * n
        diag[config.N + 1] = 2 * T
    out = np.zeros((n, n), dtype=float if ctx is None else object)
    if ctx is not None:
        out[:] = ctx.zero
    for i, d in enumerate(diag):
        out[i, i] = d
    return out


def _matmul_h(a, b, ctx):
    """``a^H b`` for double or object arrays."""
    if ctx is None:
        return a.conj().T @ b
    return np.conj(a).T.dot(b)


def build_system(config: ExtensionConfig, precision: PrecisionContext = DOUBLE, ctx=None) -> LinearSystem:
    """Assemble the system matrix for ``config``.

    Examples
    --------
    >>> from fourext.core import ExtensionConfig
    >>> float(build_system(ExtensionConfig(T=2.0, N=1)).matrix[0, 0])
    0.5
    """
    if ctx is None:
        ctx = precision.context()
    ns = NP if ctx is None else _mp.Namespace(ctx)
    N = config.N
    if config.grid == "continuous":
        _guard(config.dim, config.dim)
        return LinearSystem(continuous_gram(config, ctx), "continuous", config, precision, ctx=ctx)
    if config.grid == "discrete":
        _guard(config.dim, config.dim)
        x = mapped_chebyshev_nodes(N, _scalar(config.T, ctx), ns).nodes
        scale = ns.sqrt(ns.pi / (N + 1))
        mat = scale * basis_matrix(x, config, ns)
        return LinearSystem(mat, "discrete", config, precision, nodes=x, ctx=ctx)
    M = config.M
    _guard(2 * M + 1, config.dim)
    x = equispaced_nodes(M, ns).nodes
    scale = 1 / ns.sqrt(_scalar(M + 0.5, ctx))
    mat = basis_matrix(x, config, ns) * scale
    return LinearSystem(mat, "equispaced", config, precision, nodes=x, ctx=ctx)


def attach_rhs(system: LinearSystem, f: Callable, values=None, rule: Optional[QuadratureRule] = None) -> LinearSystem:
    """Return a copy of ``system`` with the right-hand side generated by ``f``.

    For collocation systems ``values`` may supply the (possibly noisy) samples
    ``f(x_n)`` directly; the row scaling is applied here.
    """
    ns = system.ns
    config = system.config
    if system.kind == "continuous":
        if values is not None:
            raise DomainError("continuous systems take f, not samples")
        return system.with_rhs(continuous_rhs(f, config, rule, system.precision, ctx=system.ctx))
    if values is None:
        values = f(system.nodes, ns)
    values = np.asarray(values)
    if system.ctx is not None and values.dtype != object:
        values = _mp.to_mp(values, system.ctx)
    if system.kind == "discrete":
        scale = ns.sqrt(ns.pi / (config.N + 1))
    else:
        scale = 1 / ns.sqrt(_scalar(config.M + 0.5, system.ctx))
    return system.with_rhs(values * scale)


def _gl_panel(g, a, b, nodes, weights, ctx):
    h = (b - a) / 2
    mid = (a + b) / 2
    x = mid + h * nodes
    vals = g(x)
    return h * np.tensordot(weights, vals, axes=1)


def _max_abs(v, ctx) -> float:
    if ctx is None:
        return float(np.max(np.abs(v))) if np.size(v) else 0.0
    return max((float(abs(e)) for e in np.ravel(v)), default=0.0)


def integrate(g: Callable, rule: QuadratureRule, ctx=None, adaptive: bool = True):
    """Integrate the vector-valued ``g`` over ``rule.domain``.

    ``g`` maps an array of ``k`` points to an array of shape ``(k, ...)``.
    Raises :class:`ConvergenceError` if a panel still fails the agreement
    test after ``rule.max_depth`` bisections. With ``adaptive=False`` the
    fixed composite rule is returned as is, which suits integrands that
    are smooth but only known to roundoff (the agreement test would then
    chase noise).
    """
    if ctx is None:
        nodes, weights = np.polynomial.legendre.leggauss(rule.order)
        lo, hi = float(rule.domain[0]), float(rule.domain[1])
    else:
        nodes, weights = _mp.gauss_legendre(rule.order, ctx)
        lo, hi = ctx.convert(rule.domain[0]), ctx.convert(rule.domain[1])
    edges = [lo + (hi - lo) * k / rule.panels for k in range(rule.panels + 1)]
    total = None
    stack = [(edges[k], edges[k + 1], _gl_panel(g, edges[k], edges[k + 1], nodes, weights, ctx), 0)
             for k in range(rule.panels)]
    if not adaptive:
        for item in stack:
            total = item[2] if total is None else total + item[2]
        return total
    while stack:
        a, b, whole, depth = stack.pop()
        m = (a + b) / 2
        left = _gl_panel(g, a, m, nodes, weights, ctx)
        right = _gl_panel(g, m, b, nodes, weights, ctx)
        halves = left + right
        err = _max_abs(halves - whole, ctx)
        scale = max(float(b - a), _max_abs(halves, ctx))
        if err <= rule.tol * scale:
            total = halves if total is None else total + halves
        elif depth >= rule.max_depth:
            raise ConvergenceError(
                f"quadrature did not converge on [{float(a):.3g}, {float(b):.3g}] (error {err:.3g})")
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return total


def continuous_rhs(f: Callable, config: ExtensionConfig, rule: Optional[QuadratureRule] = None,
                   precision: PrecisionContext = DOUBLE, ctx=None) -> np.ndarray:
    """Inner products ``b_n = int_{-1}^{1} f(x) conj(phi_n(x)) dx``.

    ``f`` takes ``(x, ns)`` as the registry functions do.
    """
    if ctx is None and precision.is_extended:
        ctx = precision.context()
    if rule is None:
        rule = QuadratureRule.for_degree(config.N, precision)
    ns = NP if ctx is None else _mp.Namespace(ctx)
    if getattr(f, "real", False) and config.basis == COMPLEX:
        return _real_rhs(f, config, rule, ctx, ns)

    def integrand(x):
        fx = np.asarray(f(x, ns))
        phi = basis_matrix(x, config, ns)
        return np.conj(phi) * fx[:, None]

    return integrate(integrand, rule, ctx)


def _real_rhs(f, config, rule, ctx, ns):
    """Inner products of a real function in real arithmetic.

    ``b_{+-n} = (C_n -+ i S_n) / sqrt(2T)`` with ``C_n``, ``S_n`` the cosine
    and sine moments of ``f``.
    """
    N = config.N

    def integrand(x):
        fx = np.asarray(f(x, ns))[:, None]
        c, s = cos_sin_table(x, N, _scalar(config.T, ctx), ns)
        return np.concatenate([c * fx, s * fx], axis=1)

    mom = integrate(integrand, rule, ctx)
    C, S = mom[: N + 1], mom[N + 1:]
    scale = 1 / ns.sqrt(_scalar(2 * config.T, ctx))
    j = 1j if ctx is None else ctx.mpc(0, 1)
    pos = [C[0] * scale] + [(C[n] - j * S[n - 1]) * scale for n in range(1, N + 1)]
    neg = [(C[n] + j * S[n - 1]) * scale for n in range(N, 0, -1)]
    return np.array(neg + pos, dtype=complex if ctx is None else object)


def weighted_gram(N: int, T: float, precision: PrecisionContext = DOUBLE, ctx=None) -> np.ndarray:
    """Weighted Gram matrix ``A_W = At^T At`` of the discrete system."""
    system = build_system(ExtensionConfig(T=T, N=N, grid="discrete"), precision, ctx=ctx)
    return _matmul_h(system.matrix, system.matrix, system.ctx)


def gram_matrices(config: ExtensionConfig, precision: PrecisionContext = DOUBLE, ctx=None) -> GramMatrices:
    """All Gram matrices relevant to ``config``."""
    if ctx is None:
        ctx = precision.context()
    AW = None
    if config.grid == "discrete":
        AW = weighted_gram(config.N, config.T, precision, ctx)
    return GramMatrices(continuous_gram(config, ctx), AW, extended_domain_gram(config, ctx))


def _quadratic_form(a, G, ctx):
    if ctx is None:
        return float(np.real(np.conj(a) @ G @ a))
    v = np.conj(a).dot(G.dot(a))
    return ctx.re(v)


def norm(obj, kind: str = "L2", points: int = 10001, rule: Optional[QuadratureRule] = None):
    """Norm of a function or of an extension solution.

    Parameters
    ----------
    obj : callable or ExtensionSolution
        A function ``f(x, ns)`` or a solution from :mod:`fourext.solver`.
    kind : {"L2", "sup-grid", "W", "extended-domain"}
        ``"W"`` and ``"extended-domain"`` only apply to solutions, since
        they are coefficient-space quadratic forms.
    points : int
        Grid size for ``"sup-grid"``.
    """
    from .solver import ExtensionSolution, evaluate

    is_solution = isinstance(obj, ExtensionSolution)
    if kind in ("W", "extended-domain") and not is_solution:
        raise DomainError(f"{kind} norm is only defined for extension solutions")
    if kind not in ("L2", "sup-grid", "W", "extended-domain"):
        raise DomainError(f"unknown norm kind {kind!r}")
    if is_solution:
        sol = obj
        ctx = sol.ctx
        if kind == "extended-domain":
            return _sqrt(_quadratic_form(sol.coefficients, extended_domain_gram(sol.config, ctx), ctx), ctx)
        if kind == "W":
            if sol.config.grid != "discrete":
                raise DomainError("the W norm belongs to the discrete extension")
            prec = PrecisionContext.extended(ctx.dps) if ctx is not None else DOUBLE
            AW = weighted_gram(sol.config.N, sol.config.T, prec, ctx)
            return _sqrt(_quadratic_form(sol.coefficients, AW, ctx), ctx)
        if kind == "L2" and ctx is not None:
            return _sqrt(_quadratic_form(sol.coefficients, continuous_gram(sol.config, ctx), ctx), ctx)

        def f(x, ns):
            return evaluate(sol, x)
    else:
        f = obj
        ctx = None
    if kind == "sup-grid":
        x = np.linspace(-1.0, 1.0, points)
        return float(np.max(np.abs(np.asarray(f(x, NP), dtype=complex))))
    if rule is None:
        N = obj.config.N if is_solution else 8
        rule = QuadratureRule.for_degree(N)
    val = integrate(lambda x: np.abs(np.asarray(f(x, NP), dtype=complex)) ** 2, rule)
    return math.sqrt(float(val))


def _sqrt(v, ctx):
    if ctx is None:
        return math.sqrt(max(v, 0.0))
    return float(ctx.sqrt(max(v, ctx.zero)))


def gram_limit_check(N: int, M_list, T: float) -> np.ndarray:
    """Max-entry deviation between the equispaced normal matrix and ``A``.

    Deviations are measured from explicitly formed ``Abar^* Abar``, not the
    closed form, so this doubles as a check on the assembly.
    """
    A = continuous_gram(ExtensionConfig(T=T, N=N))
    out = []
    for M in M_list:
        if M < N:
            raise DomainError("every M must be at least N")
        sysm = build_system(ExtensionConfig(T=T, N=N, grid="equispaced", M=M))
        B = sysm.matrix.conj().T @ sysm.matrix
        out.append(float(np.max(np.abs(B - A))))
    return np.array(out)
