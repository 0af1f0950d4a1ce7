"""Sampling, coordinate decompositions and integration engines.

Measures follow the library-wide conventions:

* ``dv`` on ``V_{n,m}`` has total mass ``sigma_{n,m}``; samplers draw from
  the normalized invariant law and integrators apply the mass.
* ``d_*r = |r|^{-(m+1)/2} dr`` on the cone.
* Triangular coordinates ``x = u t`` carry ``dx = prod_j t_jj^{n-j} dt dv``.

Two importance samplers remove the algebraic singularities that make the
plain estimators heavy-tailed:

``sample_tilted_gaussian``
    draws ``x`` with density proportional to ``(x'x)^a exp(-|x|^2/2s^2)``
    by giving the Bartlett diagonal ``t_jj`` a chi law with ``n-j+1+a_j``
    degrees of freedom.

``sample_stiefel_tilted``
    draws frames ``v`` together with weights ``w`` such that
    ``E[f(v) w] = E_Haar[f(v) (u'v v'u)^lam]``.  It writes the Gaussian
    generating ``v`` as ``y q`` with ``u'y = L`` lower triangular, so the
    kernel splits as ``prod_j L_jj^{lam_j} * (S^{-1})^lam`` with ``S = y'y``;
    the first factor is absorbed by tilting the chi laws of ``L_jj``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .cone import (
    PIVOT_FLOOR,
    PosDefMatrix,
    as_index,
    batch_cholesky_upper,
    batch_composite_power,
    reverse_matrix,
)
from .errors import InvalidDimensions, QuadratureNotConverged, RankDeficient
from .mc import CHUNK, McEstimate, RngStream, monte_carlo
from .special import in_L_set, in_Lambda_set, stiefel_volume
from .errors import ConvergenceDomain

FRAME_TOL = 1e-12


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def _check_nm(n: int, m: int) -> None:
    if not (1 <= m <= n):
        raise InvalidDimensions(f"need 1 <= m <= n, got n={n}, m={m}")


def transpose(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -1, -2)


def gram_schmidt(x: np.ndarray, floor: float = PIVOT_FLOOR):
    """Thin QR with positive triangular diagonal, vectorized over a stack.

    Classical Gram-Schmidt with one re-orthogonalization pass.  Returns
    ``(q, r, ok)``; ``ok`` is False where a column norm fell below the
    floor relative to the column scale.
    """
    x = np.asarray(x)
    m = x.shape[-1]
    q = np.zeros_like(x)
    r = np.zeros(x.shape[:-2] + (m, m), dtype=x.dtype)
    ok = np.ones(x.shape[:-2], dtype=bool)
    for j in range(m):
        v = x[..., :, j].copy()
        scale = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        for _ in range(2):
            if j:
                c = np.einsum("...ij,...i->...j", q[..., :, :j].conj(), v)
                v = v - np.einsum("...ij,...j->...i", q[..., :, :j], c)
                r[..., :j, j] += c
        nrm = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        good = nrm > np.maximum(floor, 1e-13 * scale)
        ok &= good
        nrm = np.where(good, nrm, 1.0)
        r[..., j, j] = nrm
        q[..., :, j] = v / nrm[..., None]
    return q, r, ok


def is_frame(v: np.ndarray, tol: float = FRAME_TOL) -> bool:
    v = np.asarray(v)
    m = v.shape[-1]
    return bool(np.abs(transpose(v) @ v - np.eye(m)).max() <= tol)


def sample_stiefel(n: int, m: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed orthonormal frames in ``V_{n,m}``.

    A Gaussian ``n x m`` matrix is orthonormalized by QR with the gauge
    fixed by a positive triangular diagonal.
    """
    _check_nm(n, m)
    gen = _generator(rng)
    shape = (n, m) if size is None else (size, n, m)
    q, _, _ = gram_schmidt(gen.standard_normal(shape))
    return q


def sample_orthogonal(n: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-distributed elements of ``O(n)``."""
    return sample_stiefel(n, n, rng, size)


def polar_decompose(x: np.ndarray):
    """``x = v r^{1/2}`` with ``r = x'x`` and ``v`` a frame.

    Returns ``(v, PosDefMatrix(r))``.
    """
    x = np.asarray(x, dtype=float)
    r = x.T @ x
    r = 0.5 * (r + r.T)
    try:
        pd = PosDefMatrix.from_array(r, check_symmetry=False)
    except ValueError as exc:
        raise RankDeficient("matrix does not have full column rank") from exc
    w, e = np.linalg.eigh(r)
    if w.min() <= PIVOT_FLOOR:
        raise RankDeficient("matrix does not have full column rank")
    inv_sqrt = (e / np.sqrt(w)) @ e.T
    return x @ inv_sqrt, pd


def symmetric_sqrt(r: np.ndarray) -> np.ndarray:
    w, e = np.linalg.eigh(r)
    return (e * np.sqrt(w)[..., None, :]) @ transpose(e)


def triangular_decompose(x: np.ndarray):
    """``x = u t`` with ``u`` a frame and ``t`` upper triangular, positive diagonal."""
    x = np.asarray(x, dtype=float)
    q, r, ok = gram_schmidt(x)
    if not np.all(ok):
        raise RankDeficient("matrix does not have full column rank")
    return q, r


def complement_frame(u: np.ndarray) -> np.ndarray:
    """An orthonormal frame of the orthogonal complement of ``span(u)``.

    Works on a stack; the complement is taken from a complete QR.
    """
    u = np.asarray(u, dtype=float)
    n, m = u.shape[-2:]
    q, _ = np.linalg.qr(u, mode="complete")
    return q[..., :, m:]


# -- importance samplers ------------------------------------------------------

def _chi(gen: np.random.Generator, dof, size) -> np.ndarray:
    return np.sqrt(gen.gamma(np.asarray(dof) / 2.0, 2.0, size=size))


def tilted_gaussian_log_norm(n: int, m: int, power=None, scale: float = 1.0) -> float:
    """log of ``int (x'x)^a exp(-|x|^2 / 2 s^2) dx`` for real ``a``."""
    d = n * m
    base = d * math.log(scale) + d / 2 * math.log(2 * math.pi)
    if power is None:
        return base
    a = as_index(power, m).real
    j = np.arange(1, m + 1)
    dof = n - j + 1
    return base + float(
        np.sum(a * math.log(scale) + a / 2 * math.log(2) + gammaln((dof + a) / 2) - gammaln(dof / 2))
    )


def sample_tilted_gaussian(
    n: int, m: int, gen: np.random.Generator, size: int, power=None, scale: float = 1.0,
    reverse: bool = False,
):
    """Draw ``x`` with density proportional to ``(x'x)^a exp(-|x|^2 / 2 s^2)``.

    With ``reverse=True`` the power is applied to ``(x'x)_*`` instead.
    Returns ``(x, t)`` where ``t`` is the triangular factor of ``x`` (of
    ``x`` with its columns reversed when ``reverse`` is set).
    """
    g = gen.standard_normal((size, n, m))
    if power is None:
        x = scale * g
        _, t, _ = gram_schmidt(x[..., ::-1] if reverse else x)
        return x, t
    a = as_index(power, m).real
    j = np.arange(1, m + 1)
    dof = n - j + 1 + a
    if np.any(dof <= 0):
        raise ConvergenceDomain("tilt power outside the integrable range")
    u, t, _ = gram_schmidt(g)
    idx = np.arange(m)
    t[:, idx, idx] = _chi(gen, dof, (size, m))
    t *= scale
    x = u @ t
    if reverse:
        x = x[..., ::-1].copy()
    return x, t


def tilted_gaussian_draw(
    n: int, m: int, gen: np.random.Generator, size: int, power=None, scale: float = 1.0,
    reverse: bool = False,
):
    """Tilted Gaussian draws with their inverse normalized densities.

    Returns ``(x, t, 1/q(x))`` where ``q`` is the exact proposal density,
    so ``mean(g(x) / q(x))`` estimates ``int g``.
    """
    x, t = sample_tilted_gaussian(n, m, gen, size, power, scale, reverse)
    log_q = -np.sum(x * x, axis=(-2, -1)) / (2 * scale**2) - tilted_gaussian_log_norm(n, m, power, scale)
    if power is not None:
        a = as_index(power, m).real
        log_q = log_q + np.log(np.diagonal(t, axis1=-2, axis2=-1)) @ a
    return x, t, np.exp(-log_q)


def sample_stiefel_tilted(u: np.ndarray, lam, gen: np.random.Generator, size: int):
    """Frames ``v`` and weights ``w`` with ``E[f(v) w] = E_Haar[f(v) (u'vv'u)^lam]``.

    ``u`` may be a single frame or a stack of ``size`` frames.  Requires
    ``lam`` in the convergence set.
    """
    u = np.asarray(u, dtype=float)
    n, m = u.shape[-2:]
    lam = as_index(lam, m)
    if not in_L_set(lam):
        raise ConvergenceDomain("lam outside the convergence set")
    a, b = lam.real, lam.imag
    j = np.arange(1, m + 1)
    dof = m - j + 1
    log_c = float(np.sum(a / 2 * math.log(2) + gammaln((dof + a) / 2) - gammaln(dof / 2)))

    low = np.zeros((size, m, m))
    idx = np.arange(m)
    diag = _chi(gen, dof + a, (size, m))
    low[:, idx, idx] = diag
    il, jl = np.tril_indices(m, -1)
    low[:, il, jl] = gen.standard_normal((size, il.size))
    g = gen.standard_normal((size, n, m))
    y = u @ low + g - u @ (transpose(u) @ g)
    s = transpose(y) @ y
    weight = batch_composite_power(reverse_matrix(s), -lam[::-1])
    if np.any(b):
        weight = weight * np.exp(1j * (np.log(diag) @ b))
    q = sample_orthogonal(m, gen, size)
    v, _, ok = gram_schmidt(y @ q)
    weight = np.where(ok, weight, np.nan) * math.exp(log_c)
    return v, weight


# -- integrators --------------------------------------------------------------

def integrate_stiefel(
    f: Callable[[np.ndarray], np.ndarray],
    n: int,
    m: int,
    samples: int,
    rng: RngStream,
    partitions: int = 1,
    chunk: int = CHUNK,
) -> McEstimate:
    """``int_{V_{n,m}} f(v) dv`` by Haar sampling.

    ``f`` maps a stack of frames to values; non-finite values (for example
    from a Gram matrix below the pivot floor) are skipped and counted.
    """
    _check_nm(n, m)

    def draw(gen, size):
        return f(sample_stiefel(n, m, gen, size))

    return monte_carlo(draw, samples, rng, partitions, scale=stiefel_volume(n, m), chunk=chunk)


def integrate_matrix_gaussian(
    g: Callable[[np.ndarray], np.ndarray],
    n: int,
    m: int,
    samples: int,
    rng: RngStream,
    partitions: int = 1,
    power=None,
    reverse: bool = False,
    scale: float = 1.0,
) -> McEstimate:
    """``int_{R^{n x m}} g(x) dx`` by importance sampling.

    The proposal is the matrix Gaussian with standard deviation ``scale``,
    optionally tilted by ``(x'x)^power`` (or ``(x'x)_*^power`` with
    ``reverse``).  The proposal density is applied exactly, so the estimate
    is unbiased whenever the integral converges; the caller is responsible
    for a finite second moment of ``g / proposal``.
    """
    _check_nm(n, m)
    if power is not None:
        power = as_index(power, m).real
        if not in_Lambda_set(power, n):
            raise ConvergenceDomain("tilt power outside the integrable range")

    def draw(gen, size):
        x, _, inv_q = tilted_gaussian_draw(n, m, gen, size, power, scale, reverse)
        return g(x) * inv_q

    return monte_carlo(draw, samples, rng, partitions)


# -- cone quadrature ----------------------------------------------------------

POSITIVE_RANGE = (-5.5, 3.5)
REAL_RANGE = (-3.5, 3.5)


def _positive_nodes(level: int, lo: float, hi: float):
    h = 2.0**-level
    w = np.arange(lo, hi + h / 2, h)
    s = np.pi / 2 * np.sinh(w)
    # nodes x = exp(s); log of the dx weight
    return np.exp(s), s + np.log(h * np.pi / 2 * np.cosh(w))


def _real_nodes(level: int, lo: float, hi: float):
    h = 2.0**-level
    w = np.arange(lo, hi + h / 2, h)
    s = np.pi / 2 * np.sinh(w)
    return np.sinh(s), np.log(h * np.pi / 2 * np.cosh(w) * np.cosh(s))


def triangular_grid(m: int, level: int, positive_range=POSITIVE_RANGE, real_range=REAL_RANGE):
    """Tensor-product double-exponential nodes on ``T_m``.

    Returns ``(t, log_w)`` with ``t`` a stack of upper-triangular matrices
    and ``log_w`` the log Lebesgue weights of ``dt = prod_{i<=j} dt_ij``.
    """
    if m < 1:
        raise InvalidDimensions("m must be positive")
    pos = _positive_nodes(level, *positive_range)
    real = _real_nodes(level, *real_range)
    coords = [(i, j) for j in range(m) for i in range(j + 1)]
    nodes = [pos[0] if i == j else real[0] for i, j in coords]
    logs = [pos[1] if i == j else real[1] for i, j in coords]
    grids = np.meshgrid(*nodes, indexing="ij")
    wgrids = np.meshgrid(*logs, indexing="ij")
    count = grids[0].size
    t = np.zeros((count, m, m))
    log_w = np.zeros(count)
    for (i, j), gr, wg in zip(coords, grids, wgrids):
        t[:, i, j] = gr.ravel()
        log_w += wg.ravel()
    return t, log_w


def cone_grid(m: int, level: int, positive_range=POSITIVE_RANGE, real_range=REAL_RANGE):
    """Nodes ``r = t't`` and log weights for ``d_*r`` on the cone.

    In Cholesky coordinates ``d_*r = 2^m prod_j t_jj^{-j} dt``.
    """
    t, log_w = triangular_grid(m, level, positive_range, real_range)
    diag = np.diagonal(t, axis1=-2, axis2=-1)
    j = np.arange(1, m + 1)
    log_w = log_w + m * math.log(2) - np.log(diag) @ j
    return transpose(t) @ t, t, log_w


REPRESENTABLE_RTOL = 1e-8


def _weighted_sum(h, points, log_w, node_chunk, factors=None, pass_factor=False):
    total = None
    for start in range(0, log_w.size, node_chunk):
        sl = slice(start, start + node_chunk)
        pts = points[sl]
        keep = np.ones(pts.shape[0], dtype=bool)
        if pass_factor:
            vals = np.asarray(h(pts, factors[sl]))
        elif factors is not None:
            # Nodes whose Cholesky factor cannot be recovered from r = t't in
            # floating point (tiny pivot under a large off-diagonal) are
            # dropped; their exact contribution is below the rule's error.
            t2, keep = batch_cholesky_upper(pts)
            d = np.diagonal(factors[sl], axis1=-2, axis2=-1)
            d2 = np.diagonal(t2, axis1=-2, axis2=-1)
            keep &= np.all(np.abs(d2 - d) <= REPRESENTABLE_RTOL * d, axis=-1)
            vals = np.asarray(h(pts))
        else:
            vals = np.asarray(h(pts))
        shape = (-1,) + (1,) * (vals.ndim - 1)
        w = np.exp(log_w[sl]).reshape(shape)
        part = np.sum(np.where(keep.reshape(shape), w * vals, 0), axis=0)
        total = part if total is None else total + part
    return total


def _converged(fine, coarse, rtol):
    fine = np.asarray(fine)
    diff = np.abs(fine - np.asarray(coarse))
    return bool(np.all(diff <= rtol * np.maximum(np.abs(fine), np.finfo(float).tiny)))


def integrate_cone(
    h: Callable[[np.ndarray], np.ndarray],
    m: int,
    level: int = 4,
    rtol: float = 1e-6,
    positive_range=POSITIVE_RANGE,
    real_range=REAL_RANGE,
    node_chunk: int = 1 << 16,
    pass_factor: bool = False,
):
    """``int_Omega h(r) d_*r`` for ``m <= 2`` by tensor-product quadrature.

    ``h`` receives a stack of matrices ``r`` and returns values of shape
    ``(nodes,)`` or ``(nodes, K)``; the result then has shape ``()`` or
    ``(K,)``.  The rule is evaluated at ``level`` and ``level - 1``.

    With ``pass_factor=True`` the call is ``h(r, t)`` where ``r = t't``;
    integrands involving composite powers should use ``t`` directly, since
    refactoring ``r`` loses the small pivots near the cone boundary.
    Otherwise nodes whose factor cannot be recovered from ``r`` are dropped.

    Raises
    ------
    QuadratureNotConverged
        If the two levels disagree beyond ``rtol`` (relative).
    """
    if m not in (1, 2):
        raise InvalidDimensions("cone quadrature is limited to m <= 2")
    results = []
    for lev in (level - 1, level):
        r, t, log_w = cone_grid(m, lev, positive_range, real_range)
        results.append(_weighted_sum(h, r, log_w, node_chunk, t, pass_factor))
    coarse, fine = results
    if not _converged(fine, coarse, rtol):
        raise QuadratureNotConverged(
            f"cone quadrature levels {level - 1} and {level} disagree beyond {rtol:g}"
        )
    return fine[()] if np.ndim(fine) == 0 else fine


def integrate_triangular(
    h: Callable[[np.ndarray], np.ndarray],
    m: int,
    level: int = 4,
    rtol: float = 1e-6,
    positive_range=POSITIVE_RANGE,
    real_range=REAL_RANGE,
    node_chunk: int = 1 << 16,
):
    """``int_{T_m} h(t) dt`` (Lebesgue measure on the triangular entries)."""
    if m not in (1, 2):
        raise InvalidDimensions("triangular quadrature is limited to m <= 2")
    results = []
    for lev in (level - 1, level):
        t, log_w = triangular_grid(m, lev, positive_range, real_range)
        results.append(_weighted_sum(h, t, log_w, node_chunk))
    coarse, fine = results
    if not _converged(fine, coarse, rtol):
        raise QuadratureNotConverged(
            f"triangular quadrature levels {level - 1} and {level} disagree beyond {rtol:g}"
        )
    return fine[()] if np.ndim(fine) == 0 else fine


# -- nested coordinate integrals ----------------------------------------------

# Level 3 on these ranges integrates the Gaussian-type inner integrands to
# about 1e-6 relative (far below the Monte Carlo error of the outer frame
# average); level 2 is only good to ~1e-2, hence the loose level check.
NESTED_POSITIVE_RANGE = (-3.0, 2.5)
NESTED_REAL_RANGE = (-2.5, 2.5)


def _quadratic_features(s: np.ndarray) -> np.ndarray:
    """Entries ``(s11, 2 s12, s22)`` so that ``tr(s B) = features . (B11, B12, B22)``."""
    return np.stack([s[:, 0, 0], 2 * s[:, 0, 1], s[:, 1, 1]], axis=1)


def _frame_features(b: np.ndarray) -> np.ndarray:
    return np.stack([b[:, 0, 0], b[:, 0, 1], b[:, 1, 1]], axis=0)


def polar_nested_integral(
    precision: np.ndarray, m: int, frames: int, rng: RngStream, level: int = 3, rtol: float = 1e-2,
    chunk: int = 64,
) -> McEstimate:
    """``int exp(-tr(x'Ax)/2) dx`` in polar coordinates ``x = v r^{1/2}``.

    Evaluates ``2^{-m} int_Omega |r|^{(n-m-1)/2} int_V phi(v r^{1/2}) dv dr``
    with the frame integral by Haar sampling (``frames`` draws) and the cone
    integral by quadrature for each frame.  Since
    ``phi(v r^{1/2}) = exp(-tr(r v'Av)/2)``, the inner integrand is linear in
    the entries of ``r`` inside the exponential.  Limited to ``m = 2``.
    """
    a = np.asarray(precision, dtype=float)
    n = a.shape[0]
    if m != 2:
        raise InvalidDimensions("nested polar check is implemented for m = 2")
    # dr = |r|^{(m+1)/2} d_*r, so the cone weight is |r|^{n/2} = (t11 t22)^n
    def inner(bf):
        def h(r, t):
            d = np.prod(np.diagonal(t, axis1=-2, axis2=-1), axis=-1)
            return (d**n)[:, None] * np.exp(-0.5 * (_quadratic_features(r) @ bf))

        return integrate_cone(h, m, level, rtol, NESTED_POSITIVE_RANGE, NESTED_REAL_RANGE, pass_factor=True)

    def draw(gen, size):
        v = sample_stiefel(n, m, gen, size)
        return inner(_frame_features(transpose(v) @ a @ v)) * 2.0**-m

    return monte_carlo(draw, frames, rng, scale=stiefel_volume(n, m), chunk=chunk)


def triangular_nested_integral(
    precision: np.ndarray, m: int, frames: int, rng: RngStream, level: int = 3, rtol: float = 1e-2,
    chunk: int = 64,
) -> McEstimate:
    """``int exp(-tr(x'Ax)/2) dx`` in triangular coordinates ``x = u t``.

    Uses ``dx = prod_j t_jj^{n-j} dt du`` with the frame integral by Haar
    sampling and the ``t`` integral by quadrature.  Limited to ``m = 2``.
    """
    a = np.asarray(precision, dtype=float)
    n = a.shape[0]
    if m != 2:
        raise InvalidDimensions("nested triangular check is implemented for m = 2")
    j = np.arange(1, m + 1)

    def inner(bf):
        def h(t):
            d = np.diagonal(t, axis1=-2, axis2=-1)
            weight = np.exp(np.log(d) @ (n - j))
            # tr(t' B t) = tr(B t t')
            return weight[:, None] * np.exp(-0.5 * (_quadratic_features(t @ transpose(t)) @ bf))

        return integrate_triangular(h, m, level, rtol, NESTED_POSITIVE_RANGE, NESTED_REAL_RANGE)

    def draw(gen, size):
        u = sample_stiefel(n, m, gen, size)
        return inner(_frame_features(transpose(u) @ a @ u))

    return monte_carlo(draw, frames, rng, scale=stiefel_volume(n, m), chunk=chunk)
