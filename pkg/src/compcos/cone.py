"""Exact linear algebra on the cone of positive definite matrices.

Everything here works for small ``m`` (the suites never exceed 8), so the
Cholesky factorization is written out explicitly.  That lets us apply a
pivot floor instead of numpy's hard ``<= 0`` test and vectorize over a
leading batch axis, which the Monte Carlo engines rely on.

Upper-triangular convention: ``r = t' t`` with ``t`` upper triangular and
positive diagonal.  The composite power function is then

    r**lam = prod_j t_jj ** lam_j

and the principal minors are ``Delta_i = prod_{j<=i} t_jj**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotPositiveDefinite

PIVOT_FLOOR = 1e-300


def as_index(lam, m: int | None = None) -> np.ndarray:
    """Coerce ``lam`` to a complex multi-index of length ``m``.

    A scalar is broadcast to the constant index ``(lam, ..., lam)``.
    """
    arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    if arr.ndim != 1:
        raise ValueError("a multi-index must be one-dimensional")
    if m is not None:
        if arr.size == 1 and m > 1:
            arr = np.full(m, arr[0])
        elif arr.size != m:
            raise ValueError(f"multi-index has {arr.size} components, expected {m}")
    return arr


def const_index(lam, m: int) -> np.ndarray:
    return np.full(m, complex(lam))


def is_constant(lam) -> bool:
    lam = as_index(lam)
    return bool(np.all(np.abs(lam - lam[0]) <= 1e-12 * max(1.0, abs(lam[0]))))


def reverse_index(lam) -> np.ndarray:
    """Component reversal ``(lam_m, ..., lam_1)``."""
    return as_index(lam)[::-1].copy()


def reverse_matrix(r: np.ndarray) -> np.ndarray:
    """Conjugate by the anti-diagonal permutation: ``(r_*)_ij = r_{m-i+1, m-j+1}``.

    Works on a single matrix or a stack of matrices.
    """
    r = np.asarray(r)
    return r[..., ::-1, ::-1].copy()


def batch_cholesky_upper(r: np.ndarray, floor: float = PIVOT_FLOOR):
    """Upper Cholesky factors of a stack of symmetric matrices.

    Returns ``(t, ok)`` where ``ok`` flags the matrices whose pivots all
    exceeded ``floor``.  Rows of ``t`` for failed matrices are garbage.
    """
    r = np.asarray(r, dtype=float)
    m = r.shape[-1]
    t = np.zeros_like(r)
    ok = np.ones(r.shape[:-2], dtype=bool)
    for j in range(m):
        col = t[..., :j, j]
        d = r[..., j, j] - np.einsum("...k,...k->...", col, col)
        ok &= d > floor
        tjj = np.sqrt(np.where(d > floor, d, 1.0))
        t[..., j, j] = tjj
        for i in range(j + 1, m):
            s = r[..., j, i] - np.einsum("...k,...k->...", t[..., :j, j], t[..., :j, i])
            t[..., j, i] = s / tjj
    return t, ok


def cholesky_upper(r: np.ndarray, floor: float = PIVOT_FLOOR) -> np.ndarray:
    """Upper-triangular ``t`` with positive diagonal such that ``t' t = r``.

    Raises
    ------
    NotPositiveDefinite
        If any pivot is ``<= floor``.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("expected a square matrix")
    t, ok = batch_cholesky_upper(r, floor)
    if not ok:
        raise NotPositiveDefinite("matrix is not positive definite (pivot below floor)")
    return t


@dataclass(frozen=True)
class PosDefMatrix:
    """A point of the cone together with its Cholesky factor and minors."""

    entries: np.ndarray
    chol: np.ndarray = field(repr=False)
    minors: np.ndarray = field(repr=False)

    @classmethod
    def from_array(cls, r, floor: float = PIVOT_FLOOR, check_symmetry: bool = True):
        r = np.array(r, dtype=float)
        if check_symmetry:
            scale = max(np.abs(r).max(), np.finfo(float).tiny)
            if np.abs(r - r.T).max() > 1e-12 * scale:
                raise ValueError("matrix is not symmetric")
            r = 0.5 * (r + r.T)
        t = cholesky_upper(r, floor)
        minors = np.cumprod(np.diag(t) ** 2)
        for a in (r, t, minors):
            a.setflags(write=False)
        return cls(r, t, minors)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def det(self) -> float:
        return float(self.minors[-1])


def _as_posdef(r) -> PosDefMatrix:
    return r if isinstance(r, PosDefMatrix) else PosDefMatrix.from_array(r)


def principal_minors(r, method: str = "cholesky") -> np.ndarray:
    """Leading principal minors ``[Delta_1(r), ..., Delta_m(r)]``.

    ``method="cholesky"`` uses the squared Cholesky diagonal,
    ``method="determinant"`` takes determinants of the leading blocks.
    """
    if method == "cholesky":
        return np.array(_as_posdef(r).minors)
    if method == "determinant":
        r = r.entries if isinstance(r, PosDefMatrix) else np.asarray(r, dtype=float)
        minors = np.array([np.linalg.det(r[:i, :i]) for i in range(1, r.shape[0] + 1)])
        if np.any(minors <= 0):
            raise NotPositiveDefinite("non-positive principal minor")
        return minors
    raise ValueError(f"unknown method {method!r}")


def log_composite_power(r, lam) -> complex:
    p = _as_posdef(r)
    lam = as_index(lam, p.m)
    return complex(np.dot(lam, np.log(np.diag(p.chol))))


def composite_power(r, lam) -> complex:
    """Composite power function ``r**lam`` of the cone.

    Evaluated as ``exp(sum_j lam_j log t_jj)`` from the Cholesky diagonal;
    the logs are real, so there is no branch ambiguity.
    """
    return complex(np.exp(log_composite_power(r, lam)))


def composite_power_minors(r, lam) -> complex:
    """Same as :func:`composite_power`, via ratios of principal minors."""
    minors = principal_minors(r, method="determinant")
    lam = as_index(lam, minors.size)
    prev = np.concatenate(([1.0], minors[:-1]))
    return complex(np.exp(np.sum(lam / 2 * np.log(minors / prev))))


def batch_composite_power(r: np.ndarray, lam, floor: float = PIVOT_FLOOR) -> np.ndarray:
    """Vectorized ``r**lam`` over a stack; NaN where ``r`` fails the pivot floor."""
    t, ok = batch_cholesky_upper(r, floor)
    lam = as_index(lam, t.shape[-1])
    logd = np.log(np.diagonal(t, axis1=-2, axis2=-1))
    out = np.exp(logd @ lam)
    return np.where(ok, out, np.nan)


def triangular_power(t: np.ndarray, lam) -> np.ndarray:
    """``prod_j t_jj ** lam_j`` for a stack of upper-triangular factors."""
    lam = as_index(lam, t.shape[-1])
    return np.exp(np.log(np.diagonal(t, axis1=-2, axis2=-1)) @ lam)
