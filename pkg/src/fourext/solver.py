"""Singular value decompositions, truncated-SVD solves and evaluation.

Double precision uses LAPACK through scipy. Extended precision avoids a
general complex SVD: the continuous matrix is symmetric positive definite,
so its eigendecomposition is its SVD, and the collocation matrices are
factored through the eigendecomposition of their normal matrices (the
equispaced one is known in closed form). The price of the normal-matrix
route is that singular values are only resolved down to roughly
``sigma_max * 10**(-digits/2)``; solves that would use a direction below
that floor raise :class:`PrecisionError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import _mp
from .core import COMPLEX, NP, ExtensionConfig, basis_matrix
from .errors import ConvergenceError, DomainError, IndexRangeError, PrecisionError
from .precision import DOUBLE, PrecisionContext
from .systems import (LinearSystem, QuadratureRule, attach_rhs, build_system, equispaced_gram,
                      extended_domain_gram, integrate)

__all__ = [
    "SvdFactorization",
    "ExtensionSolution",
    "FrameFunction",
    "svd",
    "truncated_solve",
    "lsq_solve",
    "exact_extension",
    "solve",
    "evaluate",
    "sup_error",
    "l2_error",
    "squared_norm",
    "frame_function",
    "count_zeros",
]


@dataclass
class SvdFactorization:
    """Thin SVD ``A = U diag(S) V^*`` with singular values in descending order.

    Attributes
    ----------
    floor : float
        Smallest singular value the factorization resolves reliably
        (0 in double precision, where LAPACK's backward stability applies).
    """

    S: np.ndarray
    V: np.ndarray
    _U: Optional[np.ndarray] = field(default=None, repr=False)
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    ctx: object = field(default=None, repr=False)
    floor: float = 0.0
    method: str = "lapack"

    @property
    def U(self) -> np.ndarray:
        if self._U is None:
            self._U = self._left_vectors()
        return self._U

    def _left_vectors(self):
        ctx = self.ctx
        AV = self.matrix.dot(self.V)
        U = np.empty(AV.shape, dtype=object)
        for k, s in enumerate(self.S):
            U[:, k] = AV[:, k] / s if s > 0 else AV[:, k] * 0
        return U

    @property
    def S_float(self) -> np.ndarray:
        return _mp.to_float(self.S)

    def __len__(self) -> int:
        return len(self.S)


@dataclass
class ExtensionSolution:
    """Coefficients of a computed extension together with solve metadata."""

    coefficients: np.ndarray = field(repr=False)
    config: ExtensionConfig
    cutoff: float
    keptRank: int
    residualNorm: float
    precision: PrecisionContext = DOUBLE
    ctx: object = field(default=None, repr=False)

    @property
    def coefficient_norm(self) -> float:
        return float(np.linalg.norm(_mp.to_complex(self.coefficients)))


@dataclass
class FrameFunction:
    """Fourier series on ``[-T, T]`` with coefficients ``v_n`` (a column of V)."""

    index: int
    coefficients: np.ndarray = field(repr=False)
    sigma: float
    config: ExtensionConfig
    ctx: object = field(default=None, repr=False)

    def as_solution(self) -> ExtensionSolution:
        prec = DOUBLE if self.ctx is None else PrecisionContext.extended(self.ctx.dps)
        return ExtensionSolution(self.coefficients, self.config, 0.0, 0, 0.0, prec, self.ctx)


def _lapack_svd(a):
    for driver in ("gesdd", "gesvd"):
        try:
            return scipy.linalg.svd(a, full_matrices=False, lapack_driver=driver)
        except np.linalg.LinAlgError:
            continue
    raise ConvergenceError("LAPACK SVD failed to converge with both gesdd and gesvd")


def svd(system: LinearSystem) -> SvdFactorization:
    """Factor the system matrix in the system's precision."""
    if system.ctx is None:
        U, S, Vh = _lapack_svd(system.matrix)
        return SvdFactorization(S, Vh.conj().T, U, system.matrix)
    ctx = system.ctx
    digits = ctx.dps
    if system.kind == "continuous":
        lam, V = _mp.eigh_symmetric(system.matrix, ctx)
        lam, V = lam[::-1], V[:, ::-1]
        floor = float(abs(lam[0])) * 10.0 ** (-(digits - 5))
        S = np.array([max(v, ctx.zero) for v in lam], dtype=object)
        return SvdFactorization(S, V, V, system.matrix, ctx, floor, "eigh")
    if system.kind == "equispaced":
        lam, V = _mp.eigh_symmetric(equispaced_gram(system.config, ctx), ctx)
    else:
        lam, V = _discrete_normal_eigh(system, ctx)
    lam, V = lam[::-1], V[:, ::-1]
    S = np.array([ctx.sqrt(max(v, ctx.zero)) for v in lam], dtype=object)
    floor = float(S[0]) * 10.0 ** (-(digits - 5) / 2)
    return SvdFactorization(S, V, None, system.matrix, ctx, floor, "normal-eigh")


def _discrete_normal_eigh(system: LinearSystem, ctx):
    """Eigenpairs of ``At^T At``; sine and cosine columns are orthogonal on symmetric nodes."""
    A = _mp.real_part(system.matrix, ctx)
    G = A.T.dot(A)
    n = G.shape[0]
    half = system.config.N + 1
    cross = max(abs(v) for v in G[:half, half:].ravel())
    scale = max(abs(v) for v in G.ravel())
    if cross > ctx.ldexp(scale, -ctx.prec + 16):
        return _mp.eigh(G, ctx)
    eye = np.zeros((n, n), dtype=object)
    eye[:] = ctx.zero
    for i in range(n):
        eye[i, i] = ctx.one
    return _mp.eigh_blocks(G, ctx, [eye[:, :half], eye[:, half:]])


def _residual(system: LinearSystem, a) -> float:
    r = system.matrix.dot(a) - system.rhs
    if system.ctx is None:
        return float(np.linalg.norm(r))
    return float(system.ctx.sqrt(sum(abs(v) ** 2 for v in r)))


def truncated_solve(system: LinearSystem, epsilon: float,
                    factorization: Optional[SvdFactorization] = None) -> ExtensionSolution:
    """Truncated-SVD solution ``a = V S^+ U^* b`` keeping only ``sigma > epsilon``.

    Parameters
    ----------
    system : LinearSystem
        System with a right-hand side attached.
    epsilon : float
        Absolute cutoff; directions with ``sigma <= epsilon`` are discarded.
    factorization : SvdFactorization, optional
        Reuse a factorization of ``system.matrix`` across many cutoffs.
    """
    if system.rhs is None:
        raise DomainError("attach a right-hand side before solving")
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    fact = factorization if factorization is not None else svd(system)
    ctx = system.ctx
    b = system.rhs
    if ctx is None:
        keep = fact.S > epsilon
        k = int(np.count_nonzero(keep))
        Uk, Vk, Sk = fact.U[:, keep], fact.V[:, keep], fact.S[keep]
        a = Vk @ ((Uk.conj().T @ b) / Sk)
    else:
        eps = ctx.convert(epsilon)
        keep = np.array([s > eps for s in fact.S], dtype=bool)
        k = int(np.count_nonzero(keep))
        if k and float(fact.S[keep][-1]) < fact.floor:
            raise PrecisionError(
                f"kept singular value {float(fact.S[keep][-1]):.3e} is below the resolvable floor "
                f"{fact.floor:.3e} at {ctx.dps} digits; increase digits")
        Vk, Sk = fact.V[:, keep], fact.S[keep]
        if fact.method == "eigh":
            proj = np.conj(Vk).T.dot(b) / Sk
        else:
            proj = np.conj(Vk).T.dot(np.conj(system.matrix).T.dot(b)) / (Sk * Sk)
        a = Vk.dot(proj) if k else np.array([ctx.zero] * fact.V.shape[0], dtype=object)
    prec = system.precision
    return ExtensionSolution(a, system.config, float(epsilon), k, _residual(system, a), prec, ctx)


def lsq_solve(system: LinearSystem, factorization: Optional[SvdFactorization] = None) -> ExtensionSolution:
    """Minimum-norm least squares with a machine-level relative cutoff.

    Stands in for a standard dense least-squares routine: singular values
    below ``u * sigma_max * max(rows, cols)`` are treated as zero.
    """
    fact = factorization if factorization is not None else svd(system)
    u = np.finfo(float).eps if system.ctx is None else 10.0 ** (-system.ctx.dps)
    smax = float(fact.S[0]) if len(fact) else 0.0
    return truncated_solve(system, u * smax * max(system.shape), fact)


def solve(f: Callable, config: ExtensionConfig, epsilon: float,
          precision: PrecisionContext = DOUBLE, values=None) -> ExtensionSolution:
    """Assemble, attach ``f`` (or the given samples) and solve by truncated SVD."""
    system = attach_rhs(build_system(config, precision), f, values)
    return truncated_solve(system, epsilon)


def exact_extension(f: Callable, config: ExtensionConfig, digits: int = 100) -> ExtensionSolution:
    """Extension computed with no truncation in extended precision.

    Raises
    ------
    PrecisionError
        If the smallest singular value cannot be resolved with ``digits``.
    """
    if digits < 30:
        raise DomainError("exact extensions need at least 30 digits")
    precision = PrecisionContext.extended(digits)
    system = attach_rhs(build_system(config, precision), f)
    return truncated_solve(system, 0.0)


def _check_points(points, T) -> np.ndarray:
    x = np.atleast_1d(np.asarray(points))
    bad = [v for v in x.ravel() if abs(float(v)) > T * (1 + 1e-12)]
    if bad:
        raise DomainError(f"evaluation points must lie in [-T, T]; got {float(bad[0])!r}")
    return x


def _horner(coeffs, w):
    acc = w * 0 + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * w + c
    return acc


def evaluate(solution, points, ctx=None) -> np.ndarray:
    """Evaluate ``sum_n a_n phi_n(x)`` at ``points``.

    Solutions computed in extended precision are evaluated in extended
    precision and an object array is returned; pass ``ctx`` to choose the
    evaluation context (e.g. a lower digit count for long grids).
    """
    if isinstance(solution, FrameFunction):
        solution = solution.as_solution()
    config = solution.config
    x = _check_points(points, config.T)
    ctx = ctx if ctx is not None else solution.ctx
    a = solution.coefficients
    if ctx is None:
        return basis_matrix(x.astype(float), config) @ _mp.to_complex(a)
    a = np.array([ctx.convert(v) for v in a], dtype=object)
    xm = np.array([ctx.convert(v) for v in x], dtype=object)
    T = ctx.convert(config.T)
    w = np.frompyfunc(lambda t: ctx.expj(ctx.pi * t / T), 1, 1)(xm).astype(object)
    winv = np.frompyfunc(ctx.conj, 1, 1)(w).astype(object)
    N = config.N
    if config.basis == COMPLEX:
        return _horner(a, w) * winv ** N / ctx.sqrt(2 * T)
    sines, cosines = a[: N + 1][::-1], a[N + 1:]
    zero = np.array([ctx.zero], dtype=object)
    s = np.concatenate([zero, sines])
    cos_part = (_horner(cosines, w) + _horner(cosines, winv)) / 2
    sin_part = (_horner(s, w) - _horner(s, winv)) / (2 * ctx.mpc(0, 1))
    return cos_part + sin_part


def sup_error(f: Callable, solution: ExtensionSolution, points: int = 10001, ctx=None) -> float:
    """``max |f - f_N|`` on a uniform grid over ``[-1, 1]``.

    The difference is formed in the solution's precision before rounding.
    """
    ctx = ctx if ctx is not None else solution.ctx
    if ctx is None:
        x = np.linspace(-1.0, 1.0, points)
        return float(np.max(np.abs(np.asarray(f(x, NP)) - evaluate(solution, x))))
    x = np.array([ctx.mpf(2 * k - (points - 1)) / (points - 1) for k in range(points)], dtype=object)
    diff = np.asarray(f(x, _mp.Namespace(ctx)), dtype=object) - evaluate(solution, x, ctx)
    return float(max(abs(v) for v in diff))


def l2_error(f: Callable, solution: ExtensionSolution, rule: Optional[QuadratureRule] = None,
             system: Optional[LinearSystem] = None, f_norm_sq=None) -> float:
    """``||f - f_N||`` in ``L^2(-1, 1)`` in the solution's precision.

    By default the squared difference is integrated. For a continuous
    extended-precision ``system`` whose right-hand side holds the exact
    inner products, the expansion ``||f||^2 - 2 Re(a^* b) + a^* A a`` is
    used instead, which is much cheaper; ``f_norm_sq`` may supply
    ``||f||^2`` to skip its quadrature.
    """
    ctx = solution.ctx
    if system is not None and ctx is not None and system.kind == "continuous" and system.rhs is not None:
        a = solution.coefficients
        if f_norm_sq is None:
            f_norm_sq = squared_norm(f, ctx, rule)
        val = (ctx.convert(f_norm_sq) - 2 * ctx.re(np.conj(a).dot(system.rhs))
               + ctx.re(np.conj(a).dot(system.matrix.dot(a))))
        return float(ctx.sqrt(max(val, ctx.zero)))
    if rule is None:
        prec = solution.precision
        rule = QuadratureRule.for_degree(solution.config.N, prec)
        if ctx is not None:
            rule = QuadratureRule(rule.panels, rule.order, rule.domain, 10.0 ** (-(ctx.dps // 2)))
    if ctx is None:
        # the squared difference is smooth but only accurate to roundoff
        val = integrate(lambda x: np.abs(f(x, NP) - evaluate(solution, x)) ** 2, rule, adaptive=False)
        return math.sqrt(float(val))
    ns = _mp.Namespace(ctx)

    def g(x):
        d = np.asarray(f(x, ns), dtype=object) - evaluate(solution, x, ctx)
        return np.array([abs(v) ** 2 for v in d], dtype=object)

    return float(ctx.sqrt(integrate(g, rule, ctx)))


def squared_norm(f: Callable, ctx=None, rule: Optional[QuadratureRule] = None):
    """``||f||^2`` in ``L^2(-1, 1)``; an mpf when ``ctx`` is given."""
    if rule is None:
        prec = DOUBLE if ctx is None else PrecisionContext.extended(ctx.dps)
        rule = QuadratureRule.for_degree(8, prec)
    if ctx is None:
        return float(integrate(lambda x: np.abs(f(x, NP)) ** 2, rule))
    ns = _mp.Namespace(ctx)
    return integrate(lambda x: np.array([abs(v) ** 2 for v in np.asarray(f(x, ns), dtype=object)],
                                        dtype=object), rule, ctx)


def frame_function(fact: SvdFactorization, n: int, config: ExtensionConfig) -> FrameFunction:
    """Frame function ``Phi_n`` built from the ``n``-th right singular vector."""
    if not 0 <= n < len(fact):
        raise IndexRangeError(f"singular index {n} outside [0, {len(fact) - 1}]")
    return FrameFunction(n, fact.V[:, n].copy(), float(fact.S[n]), config, fact.ctx)


def count_zeros(frame, points: int = 20001, digits: int = 40) -> int:
    """Number of sign changes of ``Phi_n`` on a uniform grid of ``(-1, 1)``.

    Frame functions from real singular vectors are either real (even
    vectors) or purely imaginary (odd ones), so the component with the
    larger modulus is used. Exact zeros on the grid are skipped.
    """
    if isinstance(frame, FrameFunction):
        sol = frame.as_solution()
    else:
        sol = frame
    if sol.ctx is None:
        x = np.linspace(-1.0, 1.0, points)[1:-1]
        v = evaluate(sol, x)
        re = v.real if np.max(np.abs(v.real)) >= np.max(np.abs(v.imag)) else v.imag
    else:
        ctx = _mp.new_context(max(digits, 30))
        x = np.array([ctx.mpf(2 * k - (points - 1)) / (points - 1) for k in range(1, points - 1)],
                     dtype=object)
        v = evaluate(sol, x, ctx)
        scale = max(abs(e) for e in v) or 1
        vr = np.array([float(ctx.re(e) / scale) for e in v])
        vi = np.array([float(ctx.im(e) / scale) for e in v])
        re = vr if np.max(np.abs(vr)) >= np.max(np.abs(vi)) else vi
    sgn = np.sign(re)
    sgn = sgn[sgn != 0]
    return int(np.count_nonzero(sgn[1:] != sgn[:-1]))
