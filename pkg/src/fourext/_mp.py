"""Helpers for extended-precision arithmetic on numpy object arrays.

Extended-precision values are stored as numpy arrays of dtype ``object``
holding ``mpf``/``mpc`` numbers that belong to a private ``MPContext``.
Each assembly creates its own context so that concurrent tasks never share
mutable precision state.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath
import numpy as np


def new_context(digits: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = int(digits)
    return ctx


def is_object(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_mp(a, ctx) -> np.ndarray:
    """Convert a numeric array (or scalar sequence) to an object array in ``ctx``."""
    arr = np.asarray(a)
    out = np.empty(arr.shape, dtype=object)
    flat = arr.ravel()
    res = out.ravel()
    for i, v in enumerate(flat):
        if isinstance(v, (complex, np.complexfloating)) or (
            hasattr(v, "imag") and not isinstance(v, (int, float, np.floating, np.integer)) and v.imag != 0
        ):
            res[i] = ctx.mpc(v)
        else:
            res[i] = ctx.convert(v)
    return out


def to_complex(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype != object:
        return arr.astype(complex)
    return np.array([complex(v) for v in arr.ravel()], dtype=complex).reshape(arr.shape)


def to_float(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype != object:
        return arr.astype(float)
    return np.array([float(v.real) if hasattr(v, "real") else float(v) for v in arr.ravel()]).reshape(arr.shape)


def is_real(a) -> bool:
    return all(not hasattr(v, "imag") or v.imag == 0 for v in np.asarray(a).ravel())


def real_part(a, ctx) -> np.ndarray:
    return np.frompyfunc(lambda v: ctx.re(v), 1, 1)(a).astype(object)


def to_matrix(a, ctx):
    arr = np.asarray(a)
    m = ctx.matrix(arr.shape[0], arr.shape[1])
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            m[i, j] = arr[i, j]
    return m


def from_matrix(m) -> np.ndarray:
    out = np.empty((m.rows, m.cols), dtype=object)
    for i in range(m.rows):
        for j in range(m.cols):
            out[i, j] = m[i, j]
    return out


def eigh(a, ctx, eigvals_only: bool = False):
    """Eigen-decomposition of a real-symmetric or Hermitian object matrix.

    Returns eigenvalues in ascending order (object array) and, unless
    ``eigvals_only``, the matrix of eigenvectors as columns.
    """
    arr = np.asarray(a)
    real = is_real(arr)
    if real:
        arr = real_part(arr, ctx)
    m = to_matrix(arr, ctx)
    if eigvals_only:
        e = ctx.eigsy(m, eigvals_only=True) if real else ctx.eighe(m, eigvals_only=True)
        vals = np.array([e[i] for i in range(len(e))], dtype=object)
        return np.sort(vals)
    e, q = ctx.eigsy(m) if real else ctx.eighe(m)
    vals = np.array([e[i] for i in range(len(e))], dtype=object)
    vecs = from_matrix(q)
    # sort in full precision: eigenvalues near 1 agree to far more than 16 digits
    order = sorted(range(len(vals)), key=lambda k: vals[k])
    return vals[order], vecs[:, order]


def _merge(parts, n):
    vals = np.concatenate([p[0] for p in parts])
    # sort in full precision: eigenvalues near 1 agree to far more than 16 digits
    order = sorted(range(len(vals)), key=lambda k: vals[k])
    if parts[0][1] is None:
        return vals[order], None
    vecs = np.concatenate([p[1] for p in parts], axis=1)
    return vals[order], vecs[:, order]


def parity_transforms(n: int, ctx):
    """Orthonormal bases of the even and odd subspaces under index reversal."""
    r = 1 / ctx.sqrt(2)
    half = n // 2
    even = np.zeros((n, half + n % 2), dtype=object)
    odd = np.zeros((n, half), dtype=object)
    even[:] = ctx.zero
    odd[:] = ctx.zero
    for k in range(half):
        even[k, k] = r
        even[n - 1 - k, k] = r
        odd[k, k] = r
        odd[n - 1 - k, k] = -r
    if n % 2:
        even[half, half] = ctx.one
    return even, odd


def eigh_blocks(a, ctx, transforms, eigvals_only: bool = False):
    """Eigen-decomposition of a matrix known to be block diagonal under ``transforms``.

    Each transform ``Q`` has orthonormal columns spanning an invariant
    subspace; the blocks ``Q^T a Q`` are diagonalized separately, which is
    roughly ``len(transforms)**2`` times cheaper than the full problem.
    """
    arr = np.asarray(a)
    parts = []
    for Q in transforms:
        if Q.shape[1] == 0:
            continue
        block = Q.T.dot(arr).dot(Q)
        if eigvals_only:
            parts.append((eigh(block, ctx, eigvals_only=True), None))
        else:
            lam, W = eigh(block, ctx)
            parts.append((lam, Q.dot(W)))
    vals, vecs = _merge(parts, arr.shape[0])
    return vals if eigvals_only else (vals, vecs)


def is_centrosymmetric(a, ctx) -> bool:
    arr = np.asarray(a)
    n = arr.shape[0]
    tol = ctx.ldexp(max(abs(v) for v in arr.ravel()), -ctx.prec + 8)
    return all(abs(arr[i, j] - arr[n - 1 - i, n - 1 - j]) <= tol for i in range(n) for j in range(n))


def eigh_symmetric(a, ctx, eigvals_only: bool = False):
    """Like :func:`eigh`, splitting real centrosymmetric matrices by parity."""
    arr = np.asarray(a)
    if arr.shape[0] > 2 and is_real(arr):
        arr = real_part(arr, ctx)
        if is_centrosymmetric(arr, ctx):
            return eigh_blocks(arr, ctx, parity_transforms(arr.shape[0], ctx), eigvals_only)
    return eigh(arr, ctx, eigvals_only)


def max_eigenvalue(a, ctx):
    if np.asarray(a).size == 0:
        return ctx.zero
    return eigh(a, ctx, eigvals_only=True)[-1]


@lru_cache(maxsize=64)
def _gauss_legendre_cached(order: int, prec: int):
    ctx = mpmath.MPContext()
    ctx.prec = prec + 20
    t0, _ = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for x0 in t0:
        x = ctx.mpf(float(x0))
        for _ in range(60):
            p0, p1 = ctx.one, x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < ctx.ldexp(1, -(prec + 10)):
                break
        p0, p1 = ctx.one, x
        for k in range(2, order + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = order * (x * p1 - p0) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def gauss_legendre(order: int, ctx):
    """Gauss-Legendre nodes and weights on [-1, 1] at the precision of ``ctx``."""
    nodes, weights = _gauss_legendre_cached(order, ctx.prec)
    return (np.array([ctx.mpf(v) for v in nodes], dtype=object),
            np.array([ctx.mpf(v) for v in weights], dtype=object))


class Namespace:
    """Elementwise math functions over object arrays, mirroring the numpy names."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.pi = ctx.pi
        self.j = ctx.mpc(0, 1)
        for name in ("exp", "cos", "sin", "cosh", "sinh", "sqrt", "log", "arccos", "tan"):
            fn = getattr(ctx, "acos" if name == "arccos" else name)
            setattr(self, name, self._wrap(fn))
        self.abs = self._wrap(abs)

    @staticmethod
    def _wrap(fn):
        ufunc = np.frompyfunc(fn, 1, 1)

        def apply(x):
            if isinstance(x, np.ndarray):
                return ufunc(x).astype(object)
            return fn(x)

        return apply
