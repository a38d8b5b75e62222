"""Constants, coordinate maps, node sets and basis functions.

Everything here is shared by the assembly, solver and analysis modules.
Functions accept plain floats/complex numbers (double precision) and, where
noted, an extended-precision namespace from :mod:`fourext._mp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BranchCutError, DomainError, IndexRangeError

__all__ = [
    "ExtensionConfig",
    "MappedDomain",
    "NodeSet",
    "AnalyticityInfo",
    "NumpyNamespace",
    "fe_constant",
    "map_to_z",
    "joukowski_index",
    "analyticity_rate",
    "mapped_chebyshev_nodes",
    "equispaced_nodes",
    "adaptive_T",
    "basis_eval",
    "basis_matrix",
    "basis_indices",
    "node_density",
]

COMPLEX = "complex-exponential"
TRIG = "symmetric-trig"

_GRID_ALIASES = {
    "continuous": "continuous",
    "discrete": "discrete",
    "mapped-chebyshev": "discrete",
    "chebyshev": "discrete",
    "equispaced": "equispaced",
}
_BASIS_ALIASES = {
    "complex": COMPLEX,
    "complex-exponential": COMPLEX,
    "exp": COMPLEX,
    "trig": TRIG,
    "symmetric-trig": TRIG,
}
_DEFAULT_BASIS = {"continuous": COMPLEX, "discrete": TRIG, "equispaced": COMPLEX}


class NumpyNamespace:
    """Double-precision counterpart of :class:`fourext._mp.Namespace`."""

    pi = np.pi
    j = 1j
    exp = staticmethod(np.exp)
    cos = staticmethod(np.cos)
    sin = staticmethod(np.sin)
    cosh = staticmethod(np.cosh)
    sinh = staticmethod(np.sinh)
    sqrt = staticmethod(np.sqrt)
    log = staticmethod(np.log)
    arccos = staticmethod(np.arccos)
    tan = staticmethod(np.tan)
    abs = staticmethod(np.abs)
    ctx = None


NP = NumpyNamespace()


def _check_T(T) -> None:
    if not T > 1:
        raise DomainError(f"extension parameter T must exceed 1, got {T!r}")


@dataclass(frozen=True)
class ExtensionConfig:
    """Identity of one Fourier extension problem.

    Parameters
    ----------
    T : float
        Extension parameter; the series is periodic on ``[-T, T]``.
    N : int
        Truncation degree. ``N = 0`` is accepted as the one-function
        degenerate case.
    grid : str
        ``"continuous"``, ``"discrete"`` (alias ``"mapped-chebyshev"``) or
        ``"equispaced"``.
    basis : str, optional
        ``"complex-exponential"`` or ``"symmetric-trig"``. Defaults to the
        basis that goes with the grid: trig for discrete, complex otherwise.
    M : int, optional
        Number of equispaced half-samples, required for equispaced grids.
    """

    T: float
    N: int
    grid: str = "continuous"
    basis: Optional[str] = None
    M: Optional[int] = None

    def __post_init__(self):
        grid = _GRID_ALIASES.get(str(self.grid).lower())
        if grid is None:
            raise DomainError(f"unknown grid kind {self.grid!r}")
        object.__setattr__(self, "grid", grid)
        basis = self.basis if self.basis is not None else _DEFAULT_BASIS[grid]
        basis = _BASIS_ALIASES.get(str(basis).lower())
        if basis is None:
            raise DomainError(f"unknown basis kind {self.basis!r}")
        if basis != _DEFAULT_BASIS[grid]:
            raise DomainError(f"grid {grid!r} is only supported with the {_DEFAULT_BASIS[grid]} basis")
        object.__setattr__(self, "basis", basis)
        _check_T(self.T)
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"N must be a nonnegative integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if grid == "equispaced":
            if self.M is None:
                raise DomainError("equispaced grids need M")
            if int(self.M) != self.M or self.M < max(self.N, 1):
                raise DomainError(f"equispaced grids need integer M >= N, got M={self.M!r}")
            object.__setattr__(self, "M", int(self.M))
        elif self.M is not None:
            raise DomainError("M only applies to equispaced grids")

    @classmethod
    def equispaced(cls, N: int, T: float, gamma: float = 1.0) -> "ExtensionConfig":
        """Equispaced configuration with ``M = round(gamma * N)``."""
        return cls(T=T, N=N, grid="equispaced", M=max(int(N), int(round(gamma * N))))

    @property
    def dim(self) -> int:
        """Number of basis functions."""
        return 2 * self.N + 1 if self.basis == COMPLEX else 2 * self.N + 2

    @property
    def gamma(self) -> Optional[float]:
        if self.M is None:
            return None
        return self.M / self.N if self.N else math.inf

    def with_N(self, N: int) -> "ExtensionConfig":
        M = None
        if self.grid == "equispaced":
            M = max(int(N), int(round(self.gamma * N)))
        return ExtensionConfig(T=self.T, N=N, grid=self.grid, basis=self.basis, M=M)


@dataclass(frozen=True)
class MappedDomain:
    """Constants attached to the map ``x -> z`` for a given ``T``."""

    T: float
    cT: float
    mT: float
    ET: float

    @classmethod
    def from_T(cls, T: float) -> "MappedDomain":
        _check_T(T)
        return cls(T=T, cT=math.cos(math.pi / T),
                   mT=1.0 - 2.0 / math.sin(math.pi / (2 * T)) ** 2,
                   ET=fe_constant(T))


@dataclass(frozen=True)
class NodeSet:
    """Ordered collocation nodes in ``[-1, 1]``."""

    kind: str
    nodes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class AnalyticityInfo:
    """Analyticity data of a function in the mapped variable.

    ``singularity`` is ``None`` for entire functions, in which case
    ``rhoStar`` is ``inf``. Non-analytic functions carry ``rhoStar = 1``.
    """

    singularity: Optional[complex]
    rhoStar: float
    expectedRate: float
    d_f: float


def fe_constant(T: float) -> float:
    """Fourier extension constant ``E(T) = cot^2(pi / (4T))``.

    Examples
    --------
    >>> round(fe_constant(2.0), 7)
    5.8284271
    """
    _check_T(T)
    return 1.0 / math.tan(math.pi / (4.0 * T)) ** 2


def map_to_z(x, T: float, ns=NP):
    """Map ``x`` to ``z = 2 (cos(pi x / T) - c(T)) / (1 - c(T)) - 1``."""
    _check_T(T)
    c = ns.cos(ns.pi / T)
    return 2 * (ns.cos(ns.pi * x / T) - c) / (1 - c) - 1


def joukowski_index(z) -> float:
    """Index ``rho >= 1`` of the Bernstein ellipse passing through ``z``.

    Both roots ``z +- sqrt(z^2 - 1)`` are formed and the larger modulus is
    returned. Points strictly inside the cut ``(-1, 1)`` raise
    :class:`BranchCutError`.
    """
    z = complex(z)
    if z.imag == 0.0 and -1.0 < z.real < 1.0:
        raise BranchCutError(f"z={z.real!r} lies on the branch cut (-1, 1)")
    s = np.sqrt(z * z - 1.0 + 0j)
    return float(max(abs(z + s), abs(z - s)))


def analyticity_rate(x0, T: float) -> AnalyticityInfo:
    """Predicted convergence data for a function singular at ``x0``.

    Parameters
    ----------
    x0 : complex, ``None`` or ``"entire"``
        Location of the nearest singularity. ``None``/``"entire"`` means
        entire; ``"nonanalytic"`` means the function is not analytic on
        ``[-1, 1]``.
    T : float
        Extension parameter.
    """
    E = fe_constant(T)
    if x0 is None or (isinstance(x0, str) and x0 == "entire"):
        return AnalyticityInfo(None, math.inf, E, 1.0)
    if isinstance(x0, str):
        if x0 == "nonanalytic":
            return AnalyticityInfo(None, 1.0, 1.0, 0.0)
        raise DomainError(f"unknown singularity tag {x0!r}")
    x0 = complex(x0)
    if x0.imag == 0.0 and abs(x0.real) <= 1.0:
        raise DomainError("singularity must lie outside [-1, 1]")
    rho_star = joukowski_index(map_to_z(x0, T))
    rho = min(rho_star, E)
    return AnalyticityInfo(x0, rho_star, rho, math.log(rho) / math.log(E))


def mapped_chebyshev_nodes(N: int, T: float, ns=NP) -> NodeSet:
    """Symmetric mapped Chebyshev nodes, ``2N + 2`` of them, ascending.

    The nonnegative half is
    ``x_n = (T/pi) arccos(0.5 (1 - c) cos((2n+1) pi / (2N+2)) + 0.5 (1 + c))``
    and the other half is its mirror image ``x_{-n-1} = -x_n``.
    """
    if N < 0:
        raise DomainError("N must be nonnegative")
    _check_T(T)
    c = ns.cos(ns.pi / T)
    if ns is NP:
        k = np.arange(N + 1)
    else:
        k = np.array([ns.ctx.mpf(i) for i in range(N + 1)], dtype=object)
    cheb = ns.cos((2 * k + 1) * ns.pi / (2 * N + 2))
    half = (T / ns.pi) * ns.arccos((1 - c) * cheb / 2 + (1 + c) / 2)
    nodes = np.concatenate([-half[::-1], half])
    return NodeSet("mapped-chebyshev", nodes)


def equispaced_nodes(M: int, ns=NP) -> NodeSet:
    """Equispaced nodes ``n / M`` for ``n = -M, ..., M``."""
    if M < 1:
        raise DomainError("M must be at least 1")
    if ns is NP:
        nodes = np.arange(-M, M + 1) / M
    else:
        nodes = np.array([ns.ctx.mpf(n) / M for n in range(-M, M + 1)], dtype=object)
    return NodeSet("equispaced", nodes)


def adaptive_T(N: int, eps_tol: float) -> float:
    """Extension parameter ``T(N; eps)`` for which ``E(T)^(-N) = eps``."""
    if N < 1:
        raise DomainError("N must be at least 1")
    if not 0.0 < eps_tol < 1.0:
        raise DomainError("eps_tol must lie in (0, 1)")
    u = math.exp(math.log(eps_tol) / (2 * N))
    return (math.pi / 4) / math.atan(u)


def basis_indices(config: ExtensionConfig) -> np.ndarray:
    """Basis indices in column order: ``-N..N`` or ``-N-1..N`` for trig."""
    lo = -config.N if config.basis == COMPLEX else -config.N - 1
    return np.arange(lo, config.N + 1)


def basis_eval(index: int, x, config: ExtensionConfig, ns=NP):
    """Evaluate basis function ``phi_index`` at ``x``.

    Complex basis: ``exp(i n pi x / T) / sqrt(2T)``. Trig basis:
    ``cos(n pi x / T)`` for ``n >= 0`` and ``sin(|n| pi x / T)`` for ``n < 0``.
    """
    idx = basis_indices(config)
    if not idx[0] <= index <= idx[-1] or int(index) != index:
        raise IndexRangeError(f"index {index} outside [{idx[0]}, {idx[-1]}]")
    T = config.T
    if config.basis == COMPLEX:
        return ns.exp(ns.j * index * ns.pi * x / T) / ns.sqrt(2 * T)
    if index >= 0:
        return ns.cos(index * ns.pi * x / T)
    return ns.sin(-index * ns.pi * x / T)


def basis_matrix(x, config: ExtensionConfig, ns=NP) -> np.ndarray:
    """Matrix ``[phi_m(x_k)]`` with rows indexed by points, columns by basis."""
    if ns is NP:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = basis_indices(config)
        theta = np.pi * np.outer(x, n) / config.T
        if config.basis == COMPLEX:
            return np.exp(1j * theta) / math.sqrt(2 * config.T)
        return np.where(n >= 0, np.cos(theta), np.sin(-theta))
    # extended precision: powers of exp(i pi x / T) are cheaper than one exp each
    ctx = ns.ctx
    x = np.atleast_1d(np.asarray(x, dtype=object))
    N = config.N
    T = ctx.convert(config.T)
    w = np.frompyfunc(lambda t: ctx.expj(ctx.pi * t / T), 1, 1)(x).astype(object)
    real_x = all(ctx.im(v) == 0 for v in x)
    pw = [np.full(len(x), ctx.one, dtype=object)]
    for _ in range(N + 1):
        pw.append(pw[-1] * w)
    if config.basis == COMPLEX:
        scale = 1 / ctx.sqrt(2 * T)
        if real_x:
            neg = [np.frompyfunc(ctx.conj, 1, 1)(p).astype(object) for p in pw[1:N + 1]]
        else:
            winv = 1 / w
            neg = [winv]
            for _ in range(N - 1):
                neg.append(neg[-1] * winv)
        cols = neg[::-1] + pw[: N + 1]
        return np.stack(cols, axis=1) * scale
    re = np.frompyfunc(ctx.re, 1, 1)
    im = np.frompyfunc(ctx.im, 1, 1)
    cols = [im(pw[k]) for k in range(N + 1, 0, -1)] + [re(pw[k]) for k in range(N + 1)]
    return np.stack(cols, axis=1).astype(object)


def cos_sin_table(x, N: int, T, ns=NP):
    """Real arrays ``cos(n pi x / T)`` (n = 0..N) and ``sin(n pi x / T)`` (n = 1..N).

    Rows are points; built with the Chebyshev three-term recurrence.
    """
    if ns is NP:
        theta = np.pi * np.outer(np.atleast_1d(x), np.arange(N + 1)) / T
        return np.cos(theta), np.sin(theta[:, 1:])
    ctx = ns.ctx
    x = np.atleast_1d(np.asarray(x, dtype=object))
    T = ctx.convert(T)
    c1 = np.frompyfunc(lambda t: ctx.cos(ctx.pi * t / T), 1, 1)(x).astype(object)
    s1 = np.frompyfunc(lambda t: ctx.sin(ctx.pi * t / T), 1, 1)(x).astype(object)
    cs = [np.full(len(x), ctx.one, dtype=object), c1]
    sn = [np.full(len(x), ctx.zero, dtype=object), s1]
    two_c = 2 * c1
    for _ in range(2, N + 1):
        cs.append(two_c * cs[-1] - cs[-2])
        sn.append(two_c * sn[-1] - sn[-2])
    return np.stack(cs[: N + 1], axis=1), np.stack(sn[1: N + 1], axis=1) if N else np.empty((len(x), 0), dtype=object)


def node_density(z: float, T: float) -> float:
    """Density ``T / (pi sqrt((1 - z)(z - m(T))))`` of the mapped equispaced nodes."""
    if not -1.0 < z < 1.0:
        raise DomainError("node density is defined on the open interval (-1, 1)")
    mT = MappedDomain.from_T(T).mT
    return T / (math.pi * math.sqrt((1.0 - z) * (z - mT)))
