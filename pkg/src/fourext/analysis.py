"""Stability and convergence diagnostics.

Spectrum clustering of the prolate matrix, the breakpoints ``N0``, ``N1``
and ``N2`` of truncated-SVD extensions, the condition bounds ``K``, the
equispaced stability constants ``C1``, ``C2``, ``D`` and ``B`` with their
growth rates, and the logarithmic potential that governs the Runge region
of the exact equispaced extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.integrate

from . import _mp
from .core import ExtensionConfig, basis_matrix, fe_constant, map_to_z
from .errors import BudgetError, DomainError, PrecisionError
from .precision import DOUBLE, PrecisionContext
from .solver import ExtensionSolution, SvdFactorization, l2_error, squared_norm, svd, truncated_solve
from .systems import (LinearSystem, attach_rhs, build_system, continuous_gram,
                      equispaced_gram)

__all__ = [
    "SpectrumReport",
    "BreakpointReport",
    "StabilityReport",
    "PotentialProfile",
    "RungeRegion",
    "spectrum_report",
    "slepian_tail",
    "breakpoints",
    "condition_bound",
    "quadrature_factor",
    "stability_constants",
    "growth_rates",
    "rate_fit",
    "plateau_onset",
    "potential",
    "potential_profile",
    "runge_region",
    "divergence_rate",
    "tsvd_bound_slack",
]


@dataclass
class SpectrumReport:
    """Clustering statistics of eigenvalues (continuous) or singular values."""

    values: np.ndarray = field(repr=False)
    delta: float
    nearOne: int
    nearZero: int
    transitionWidth: int
    predictedTransitionIndex: float
    symmetryResidual: Optional[float] = None


@dataclass
class BreakpointReport:
    N0: float
    N1: float
    N2: Optional[int] = None
    N2predicted: Optional[float] = None
    dHat: Optional[float] = None
    sigma_min: dict = field(default_factory=dict, repr=False)


@dataclass
class StabilityReport:
    C1: Optional[float] = None
    C2: Optional[float] = None
    D: Optional[float] = None
    B: Optional[float] = None
    cHat: Optional[float] = None
    dHat: Optional[float] = None
    aHat: Optional[float] = None
    Kvalues: dict = field(default_factory=dict)
    N: Optional[int] = None
    M: Optional[int] = None
    keptRank: Optional[int] = None


# --------------------------------------------------------------------------- spectra


def spectrum_report(system: LinearSystem, delta: float = 0.1,
                    factorization: Optional[SvdFactorization] = None) -> SpectrumReport:
    """Count values near one, near zero and in the transition region.

    For the continuous system the values are the eigenvalues of the prolate
    matrix; for ``T = 2`` the residual of the symmetry
    ``lambda_k + lambda_{2N-k} = 1`` is reported as well.
    """
    if factorization is not None:
        values = factorization.S
    elif system.kind == "continuous" and system.ctx is None:
        values = np.linalg.eigvalsh(system.matrix)[::-1]
    else:
        values = svd(system).S
    fv = _mp.to_float(values)
    near_one = int(np.count_nonzero(fv > 1 - delta))
    near_zero = int(np.count_nonzero(fv < delta))
    dim = len(fv)
    config = system.config
    predicted = (2 * config.N + 1) / config.T
    sym = None
    if system.kind == "continuous" and config.T == 2.0:
        if system.ctx is None:
            sym = float(np.max(np.abs(fv + fv[::-1] - 1)))
        else:
            one = system.ctx.one
            sym = float(max(abs(values[k] + values[dim - 1 - k] - one) for k in range(dim)))
    return SpectrumReport(np.asarray(values), delta, near_one, near_zero,
                          dim - near_one - near_zero, predicted, sym)


def slepian_tail(k: int, N: int, T: float, ctx=None):
    """Asymptotic value of ``1 - lambda_k`` for the prolate matrix of size ``2N+1``.

    Uses ``alpha = 1 - cos(pi/T)`` and ``beta = E(T)``; valid for fixed
    small ``k`` as ``N`` grows.
    """
    import mpmath

    m = ctx if ctx is not None else mpmath.mp
    Np = 2 * N + 1
    T = m.convert(T)
    alpha = 1 - m.cos(m.pi / T)
    beta = (m.sqrt(2) + m.sqrt(alpha)) / (m.sqrt(2) - m.sqrt(alpha))
    val = (m.sqrt(m.pi) / m.factorial(k) * m.power(2, m.mpf(14 * k + 9) / 4)
           * m.power(alpha, m.mpf(2 * k + 1) / 4) * m.power(2 - alpha, -(k + m.mpf(1) / 2))
           * m.power(Np, k + m.mpf(1) / 2) * m.power(beta, -Np))
    return val if ctx is not None else float(val)


# --------------------------------------------------------------------------- breakpoints


def _sigma_min_equispaced(N: int, T: float, gamma: float, digits: Optional[int] = None) -> float:
    config = ExtensionConfig.equispaced(N, T, gamma)
    if digits is None:
        return float(svd(build_system(config)).S[-1])
    ctx = _mp.new_context(digits)
    lam = _mp.eigh_symmetric(equispaced_gram(config, ctx), ctx, eigvals_only=True)
    floor = float(lam[-1]) * 10.0 ** (-(digits - 5))
    if float(lam[0]) < floor:
        raise PrecisionError(f"sigma_min of the N={N} equispaced matrix is below the {digits}-digit floor")
    return float(ctx.sqrt(lam[0]))


def breakpoints(T: float, epsilon: float, gamma: float = 2.0, Nmax: Optional[int] = 60,
                digits: int = 100) -> BreakpointReport:
    """Breakpoints of the truncated-SVD extensions.

    ``N0 = -log(eps) / (2 log E(T))`` and ``N1 = 2 N0`` are closed forms.
    ``N2`` is the largest ``N`` with ``sigma_min(Abar(N, gamma N)) > eps``,
    found by scanning ``N = 1, 2, ...``; pass ``Nmax=None`` to skip it.
    Singular values below ``1e-12`` are recomputed in extended precision.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    E = fe_constant(T)
    N0 = -math.log(epsilon) / (2 * math.log(E))
    report = BreakpointReport(N0, 2 * N0)
    if Nmax is None:
        return report
    for N in range(1, Nmax + 1):
        s = _sigma_min_equispaced(N, T, gamma)
        if s < 1e-12:
            s = _sigma_min_equispaced(N, T, gamma, digits)
        report.sigma_min[N] = s
        if s <= epsilon:
            report.N2 = N - 1
            break
    else:
        raise BudgetError(f"sigma_min stays above {epsilon:g} up to Nmax={Nmax}; N2 not bracketed")
    # skip the pre-asymptotic start, but keep at least four points when N2 is small
    lo = min(6, max(1, report.N2 - 3))
    Ns = [N for N in report.sigma_min if lo <= N <= report.N2]
    if len(Ns) >= 4:
        rho = rate_fit([(N, report.sigma_min[N]) for N in Ns])
        report.dHat = rho
        report.N2predicted = -math.log(epsilon) / math.log(rho) if rho > 1 else math.inf
    return report


# --------------------------------------------------------------------------- condition bounds


def quadrature_factor(config: ExtensionConfig, order: int = 24) -> np.ndarray:
    """Matrix ``L`` with ``||L a|| = ||sum a_n phi_n||`` in ``L^2(-1, 1)``.

    Rows are basis values at composite Gauss-Legendre nodes scaled by the
    square roots of the weights; exact for the products of two basis
    functions up to rounding.
    """
    panels = max(8, math.ceil(config.N / 2))
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    x = (mid[:, None] + h[:, None] * t[None, :]).ravel()
    wt = (h[:, None] * w[None, :]).ravel()
    return np.sqrt(wt)[:, None] * basis_matrix(x, config)


def _solution_operator(fact: SvdFactorization, epsilon: float) -> np.ndarray:
    keep = fact.S > epsilon
    return (fact.V[:, keep] / fact.S[keep]) @ fact.U[:, keep].conj().T


def condition_bound(kind: str, N: int, T: float = 2.0, gamma: Optional[float] = None,
                    epsilon: float = 1e-14) -> float:
    """Condition bound ``K = sqrt(sum_n ||G(e_n)||^2)`` of the truncated-SVD map.

    The norm is ``L^2(-1, 1)`` for the continuous and equispaced extensions
    and the discrete ``W`` norm (``||At a||``) for the discrete one.
    """
    if kind == "equispaced":
        if gamma is None:
            raise DomainError("equispaced condition bounds need gamma")
        config = ExtensionConfig.equispaced(N, T, gamma)
    else:
        config = ExtensionConfig(T=T, N=N, grid=kind)
    system = build_system(config)
    X = _solution_operator(svd(system), epsilon)
    if kind == "discrete":
        return float(np.linalg.norm(system.matrix @ X))
    return float(np.linalg.norm(quadrature_factor(config) @ X))


# --------------------------------------------------------------------------- stability constants


def _lam_max(M, ctx):
    if M.shape[0] == 0:
        return ctx.zero
    return max(_mp.max_eigenvalue(M, ctx), ctx.zero)


def stability_constants(N: int, M: int, T: float = 2.0, epsilon: float = 1e-14,
                        digits: int = 100) -> StabilityReport:
    """Stability constants of the equispaced truncated-SVD extension.

    With ``Abar = U S V^*`` and ``A`` the continuous Gram matrix,
    ``C1 = sqrt(||S_k^-1 V_k^* A V_k S_k^-1||)`` over kept directions
    (``sigma > epsilon``), ``C2 = sqrt(||V_d^* A V_d||)`` over discarded
    ones, ``D`` is the same as ``C1`` with every direction kept, and
    ``B = 1 / sigma_min``. All in extended precision.
    """
    config = ExtensionConfig(T=T, N=N, grid="equispaced", M=M)
    ctx = _mp.new_context(digits)
    A = continuous_gram(config, ctx)
    lam, V = _mp.eigh_symmetric(equispaced_gram(config, ctx), ctx)
    lam, V = lam[::-1], V[:, ::-1]
    floor = float(lam[0]) * 10.0 ** (-(digits - 5))
    if float(lam[-1]) < floor:
        raise PrecisionError(f"sigma_min of Abar({N}, {M}) is below the {digits}-digit floor")
    S = np.array([ctx.sqrt(v) for v in lam], dtype=object)
    eps = ctx.convert(epsilon)
    keep = np.array([s > eps for s in S], dtype=bool)
    VAV = V.T.dot(A).dot(V)
    inv = np.array([1 / s for s in S], dtype=object)
    scaled = VAV * inv[:, None] * inv[None, :]
    d2 = _lam_max(scaled, ctx)
    c1 = _lam_max(scaled[np.ix_(keep, keep)], ctx)
    c2 = _lam_max(VAV[np.ix_(~keep, ~keep)], ctx)
    return StabilityReport(C1=float(ctx.sqrt(c1)), C2=float(ctx.sqrt(c2)), D=float(ctx.sqrt(d2)),
                           B=float(1 / S[-1]), N=N, M=M, keptRank=int(np.count_nonzero(keep)))


def growth_rates(gamma: float, T: float, Nwindow: Sequence[int], epsilon: float = 1e-14,
                 digits: int = 100):
    """Fitted exponential growth rates of ``D(N, gamma N)`` and ``B(N, gamma N)``.

    Returns ``(cHat, dHat, aHat)`` with ``aHat = log cHat / log dHat``.
    """
    Ns = sorted(set(int(n) for n in Nwindow))
    if len(Ns) < 4:
        raise DomainError("growth-rate windows need at least 4 points")
    Ds, Bs = [], []
    for N in Ns:
        rep = stability_constants(N, max(N, int(round(gamma * N))), T, epsilon, digits)
        Ds.append(rep.D)
        Bs.append(rep.B)
    c_hat = math.exp(np.polyfit(Ns, np.log(Ds), 1)[0])
    d_hat = math.exp(np.polyfit(Ns, np.log(Bs), 1)[0])
    return c_hat, d_hat, math.log(c_hat) / math.log(d_hat)


def rate_fit(errors, window: Optional[tuple] = None) -> float:
    """Geometric rate ``rho_hat = exp(-slope)`` of ``log(error)`` against ``N``.

    Parameters
    ----------
    errors : sequence of ``(N, error)`` pairs
    window : ``(Nlo, Nhi)``, optional
        Inclusive range of ``N`` to fit.
    """
    pts = [(float(n), float(e)) for n, e in errors
           if window is None or window[0] <= n <= window[1]]
    if len(pts) < 4:
        raise DomainError("rate fits need at least 4 points in the window")
    if any(e <= 0 for _, e in pts):
        raise DomainError("errors must be positive")
    Ns = np.array([p[0] for p in pts])
    if np.ptp(Ns) == 0:
        raise DomainError("degenerate window: all N equal")
    slope = np.polyfit(Ns, np.log([p[1] for p in pts]), 1)[0]
    return float(math.exp(-slope))


def plateau_onset(errors) -> Optional[int]:
    """First ``N`` after which the error stops decreasing.

    ``errors`` is a sequence of ``(N, error)`` pairs. Returns ``None`` if the
    error decreases over the whole range.
    """
    pts = sorted((int(n), float(e)) for n, e in errors)
    for (n, e), (_, e_next) in zip(pts, pts[1:]):
        if e_next >= e:
            return n
    return None


# --------------------------------------------------------------------------- potential theory


@dataclass
class PotentialProfile:
    T: float
    x: np.ndarray
    values: np.ndarray
    reference: float

    @property
    def indicator(self) -> np.ndarray:
        """``phi(m(x)) - phi(-1)``; positive inside the Runge region."""
        return self.values - self.reference


@dataclass
class RungeRegion:
    T: float
    re: np.ndarray
    im: np.ndarray
    indicator: np.ndarray = field(repr=False)

    @property
    def mask(self) -> np.ndarray:
        return self.indicator > 0

    @property
    def area(self) -> float:
        cell = (self.re[1] - self.re[0]) * (self.im[1] - self.im[0])
        return float(np.count_nonzero(self.mask)) * cell


def potential(x, T: float) -> float:
    """``phi(m(x)) = -int_0^1 log|m(x) - m(s)| ds`` for real or complex ``x``.

    ``m(x) - m(s)`` is factored into two sines so that nearly coincident
    points do not cancel, and the interval is split at the logarithmic
    singularities ``s = x`` and ``s = 2T - x``.
    """
    x = complex(x)
    if x.real < 0:
        x = -x
    h = math.pi / (2 * T)
    shift = math.log(2.0) - 2 * math.log(math.sin(h))

    def integrand(s):
        return (math.log(abs(np.sin(h * (x - s)))) + math.log(abs(np.sin(h * (x + s)))) + shift)

    pts = sorted({p for p in (x.real, 2 * T - x.real) if 0.0 < p < 1.0})
    val, _ = scipy.integrate.quad(integrand, 0.0, 1.0, points=pts or None, limit=400,
                                  epsabs=1e-12, epsrel=1e-12)
    return -val


def potential_profile(T: float, x_samples) -> PotentialProfile:
    """Potential at the given samples together with the reference ``phi(-1)``."""
    xs = np.atleast_1d(np.asarray(x_samples))
    vals = np.array([potential(x, T) for x in xs.ravel()]).reshape(xs.shape)
    return PotentialProfile(T, xs, vals, potential(1.0, T))


def runge_region(T: float, re=(-1.5, 1.5), im=(-1.0, 1.0), shape=(61, 41)) -> RungeRegion:
    """Scan the indicator ``phi(m(x)) - phi(-1)`` on a complex rectangle.

    The potential is even in ``x`` and symmetric under conjugation, which is
    used to reuse values across the four quadrants when the grid allows.
    """
    res = np.linspace(re[0], re[1], shape[0])
    ims = np.linspace(im[0], im[1], shape[1])
    ref = potential(1.0, T)
    cache = {}
    out = np.empty((shape[1], shape[0]))
    for j, y in enumerate(ims):
        for i, xr in enumerate(res):
            key = (round(abs(xr), 12), round(abs(y), 12))
            if key not in cache:
                cache[key] = potential(complex(key[0], key[1]), T) - ref
            out[j, i] = cache[key]
    return RungeRegion(T, res, ims, out)


def divergence_rate(x0, T: float, samples: int = 201) -> float:
    """Predicted per-``N`` growth ``exp(phi(m(x0)) - min_x phi(m(x)))`` of ``F_{N,N}``."""
    xs = np.linspace(0.0, 1.0, samples)
    vmin = min(potential(x, T) for x in xs)
    return math.exp(potential(x0, T) - vmin)


def tsvd_bound_slack(f, N: int, T: float, epsilon: float, digits: int = 60, phi=None) -> dict:
    """Slack in the error and coefficient bounds of the continuous TSVD.

    For the truncated extension ``H`` with coefficients ``a_eps`` and a
    comparison element ``phi`` of the frame (coefficients ``c``; the exact
    extension by default), returns::

        errorSlack = ||f - phi|| + sqrt(eps) ||c|| - ||f - H||
        coeffSlack = ||f - phi|| / sqrt(eps) + ||c|| - ||a_eps||

    Both are nonnegative whenever the bounds hold. Everything is computed
    in ``digits`` of precision; the ``L^2(-1,1)`` norms use the Gram form.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    P = PrecisionContext.extended(digits)
    system = attach_rhs(build_system(ExtensionConfig(T=T, N=N), P), f)
    ctx = system.ctx
    fact = svd(system)
    f_sq = squared_norm(f, ctx)
    sol = truncated_solve(system, epsilon, fact)
    if phi is None:
        phi = truncated_solve(system, 0.0, fact).coefficients
    c = np.asarray([ctx.mpc(v) for v in phi], dtype=object)
    phi_sol = ExtensionSolution(c, sol.config, 0.0, len(c), 0.0, P, ctx)
    err_h = ctx.mpf(l2_error(f, sol, system=system, f_norm_sq=f_sq))
    err_phi = ctx.mpf(l2_error(f, phi_sol, system=system, f_norm_sq=f_sq))
    c_norm = ctx.sqrt(sum(abs(v) ** 2 for v in c))
    a_norm = ctx.sqrt(sum(abs(v) ** 2 for v in sol.coefficients))
    root = ctx.sqrt(ctx.mpf(epsilon))
    return {
        "errorSlack": float(err_phi + root * c_norm - err_h),
        "coeffSlack": float(err_phi / root + c_norm - a_norm),
        "keptRank": sol.keptRank,
    }
