"""Composite cosine transforms on Stiefel manifolds and their spectral checks.

``(T^lam f)(u) = int_{V_{n,m}} f(v) (u'v v'u)^lam dv``.  Estimates use the
importance-tilted frame sampler by default, which keeps the variance
finite on the whole convergence set; plain Haar sampling is available as
an independent path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cone import as_index, batch_composite_power, composite_power, is_constant
from .errors import ConvergenceDomain, DimensionsTooSmall, InvalidDimensions, ThresholdNotMet
from .geometry import (
    complement_frame,
    sample_orthogonal,
    sample_stiefel,
    sample_stiefel_tilted,
    transpose,
    triangular_decompose,
)
from .mc import McEstimate, RngStream, combined_stderr, monte_carlo
from .special import (
    ZERO,
    average_closed_form,
    in_L_set,
    multiplier_constant,
    multiplier_mu,
    stiefel_volume,
    uhh_condition,
)

RIGHT_O = "right_O_m_invariant"
RIGHT_SO = "right_SO_m_invariant"
NO_INVARIANCE = "none"


@dataclass(frozen=True)
class AngleFunction:
    """A function on frames, vectorized over a leading stack axis."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    invariance: str = NO_INVARIANCE
    name: str = "f"

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(v))

    def spot_check(self, n: int, m: int, gen: np.random.Generator, trials: int = 10, tol: float = 1e-10) -> bool:
        """Test the declared right invariance on random (frame, rotation) pairs."""
        if self.invariance == NO_INVARIANCE:
            return True
        v = sample_stiefel(n, m, gen, trials)
        g = sample_orthogonal(m, gen, trials)
        if self.invariance == RIGHT_SO:
            flip = np.linalg.det(g) < 0
            g[flip, :, 0] *= -1
        a, b = self(v), self(v @ g)
        return bool(np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.abs(a))))


def constant_one() -> AngleFunction:
    return AngleFunction(lambda v: np.ones(np.shape(v)[:-2]), RIGHT_O, "one")


def projection_quadratic(d: np.ndarray) -> AngleFunction:
    """``f(v) = tr(D v v')`` for symmetric ``D``: an invariant degree-2 polynomial."""
    d = np.asarray(d, dtype=float)
    return AngleFunction(lambda v: np.einsum("ij,...ik,...jk->...", d, v, v), RIGHT_O, "tr(Dvv')")


# -- H-polynomials ------------------------------------------------------------

@dataclass(frozen=True)
class HPolynomial:
    """``P(x) = det(a'x)^k`` with complex ``a`` satisfying ``a'a = 0``."""

    a: np.ndarray
    k: int

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        if np.abs(a.T @ a).max() > 1e-12:
            raise ValueError("a'a must vanish")
        if self.k < 0:
            raise ValueError("degree must be non-negative")
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.a.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return eval_h_polynomial(self, x)

    def as_angle_function(self) -> AngleFunction:
        inv = RIGHT_O if self.k % 2 == 0 else RIGHT_SO
        return AngleFunction(self.__call__, inv, f"hpoly:{self.k}")


def make_h_polynomial(n: int, m: int, k: int) -> HPolynomial:
    """``a = [e_1 .. e_m] + i [e_{m+1} .. e_{2m}]``, so ``a'a = I - I = 0``.

    Raises
    ------
    DimensionsTooSmall
        If ``2m > n``.
    """
    if m < 1 or k < 0:
        raise InvalidDimensions("need m >= 1 and k >= 0")
    if 2 * m > n:
        raise DimensionsTooSmall(f"H-polynomials need 2m <= n, got n={n}, m={m}")
    a = np.zeros((n, m), dtype=complex)
    idx = np.arange(m)
    a[idx, idx] = 1.0
    a[m + idx, idx] = 1j
    return HPolynomial(a, k)


def eval_h_polynomial(p: HPolynomial, x: np.ndarray) -> np.ndarray:
    """``det(a'x)^k`` for one matrix or a stack."""
    x = np.asarray(x)
    if p.k == 0:
        return np.ones(x.shape[:-2], dtype=complex) if x.ndim > 2 else np.complex128(1.0)
    d = np.linalg.det(np.einsum("ij,...ik->...jk", p.a, x))
    return d**p.k


# -- transforms ---------------------------------------------------------------

def _check_lambda(lam, force: bool) -> None:
    if not in_L_set(lam):
        if not force:
            raise ConvergenceDomain("lam lies outside the convergence set")
        warnings.warn("lam outside the convergence set; the integral diverges", RuntimeWarning, stacklevel=3)


def cosine_transform(
    f: AngleFunction,
    lam,
    u: np.ndarray,
    samples: int,
    rng: RngStream,
    partitions: int = 1,
    method: str = "tilted",
    force: bool = False,
) -> McEstimate:
    """Estimate ``(T^lam f)(u)``.

    ``method="tilted"`` draws frames with the kernel built into the law
    (requires ``lam`` in the convergence set); ``method="haar"`` samples
    frames uniformly and multiplies by the kernel.  ``force`` allows a
    ``lam`` outside the convergence set on the Haar path only.
    """
    u = np.asarray(u, dtype=float)
    n, m = u.shape
    lam = as_index(lam, m)
    _check_lambda(lam, force)
    sigma = stiefel_volume(n, m)
    if method == "tilted" and in_L_set(lam):
        def draw(gen, size):
            v, w = sample_stiefel_tilted(u, lam, gen, size)
            return f(v) * w
    elif method in ("tilted", "haar"):
        def draw(gen, size):
            v = sample_stiefel(n, m, gen, size)
            b = transpose(v) @ u
            return f(v) * batch_composite_power(transpose(b) @ b, lam)
    else:
        raise ValueError(f"unknown method {method!r}")
    return monte_carlo(draw, samples, rng, partitions, scale=sigma)


def det_cosine_transform(
    f: AngleFunction, lam: complex, u: np.ndarray, samples: int, rng: RngStream, partitions: int = 1
) -> McEstimate:
    """``int f(v) |det(v'u)|^lam dv`` with Haar frames.

    The direct determinant path has finite variance for ``Re lam > -1/2``.
    """
    lam = complex(lam)
    if not lam.real > -1:
        raise ConvergenceDomain("need Re lam > -1")
    u = np.asarray(u, dtype=float)
    n, m = u.shape

    def draw(gen, size):
        v = sample_stiefel(n, m, gen, size)
        d = np.abs(np.linalg.det(transpose(v) @ u))
        return f(v) * np.exp(lam * np.log(d))

    return monte_carlo(draw, samples, rng, partitions, scale=stiefel_volume(n, m))


def radial_extension(
    f: AngleFunction, lam, y: np.ndarray, samples: int, rng: RngStream, partitions: int = 1
) -> McEstimate:
    """``(T^lam f)(y) = (y'y)^lam (T^lam f)(u)`` with ``y = u t``."""
    y = np.asarray(y, dtype=float)
    u, _ = triangular_decompose(y)
    lam = as_index(lam, y.shape[1])
    est = cosine_transform(f, lam, u, samples, rng, partitions)
    return est.scaled(composite_power(y.T @ y, lam))


# -- spectral checks ----------------------------------------------------------

@dataclass
class CheckReport:
    """Outcome of a Monte Carlo identity check."""

    name: str
    passed: bool
    target: complex
    estimates: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def _candidate_frames(p: HPolynomial, count: int, gen: np.random.Generator, pool: int = 200):
    cand = sample_stiefel(p.n, p.m, gen, pool)
    vals = np.abs(p(cand))
    threshold = 0.05 * np.quantile(vals, 0.9)
    good = np.flatnonzero(vals >= threshold)
    if good.size == 0 or not np.any(vals > 0):
        raise ThresholdNotMet("no sampled frame has |P(u)| above the threshold")
    return cand[good[:count]], float(threshold)


def frame_dispersion(q: np.ndarray, e: np.ndarray) -> float:
    """Largest standardized deviation of per-frame quotients from their pooled mean.

    The pooled mean is inverse-variance weighted; each deviation is divided
    by the combined error of that frame and the pooled mean.
    """
    q = np.asarray(q)
    e = np.asarray(e, dtype=float)
    if q.size < 2:
        return 0.0
    w = 1 / e**2
    mean = np.sum(w * q) / np.sum(w)
    se_mean = math.sqrt(1 / np.sum(w))
    return float(np.max(np.abs(q - mean) / np.sqrt(e**2 + se_mean**2)))


def eigen_relation_check(
    p: HPolynomial,
    lam,
    n_frames: int,
    samples: int,
    rng: RngStream,
    partitions: int = 1,
) -> CheckReport:
    """Rayleigh quotients ``(T^lam P)(u) / P(u)`` against ``c mu_k(lam)``.

    Frames with ``|P(u)|`` below 5% of the 90th percentile (over a pool of
    candidates) are skipped.  Frame independence is judged by
    :func:`frame_dispersion`, which must not exceed 3.
    """
    lam = as_index(lam, p.m)
    if not in_L_set(lam):
        raise ConvergenceDomain("lam lies outside the convergence set")
    if p.k % 2:
        raise ValueError("the eigen-relation is checked for even degrees only")
    mu = multiplier_mu(lam, p.k, p.n)
    target = multiplier_constant(p.n, p.m, p.k) * mu.numeric()
    frames, threshold = _candidate_frames(p, n_frames, rng.child(0).generator())
    f = p.as_angle_function()
    quotients, errs = [], []
    for i, u in enumerate(frames):
        est = cosine_transform(f, lam, u, samples, rng.child(i + 1), partitions)
        pu = complex(p(u))
        quotients.append(est.value / pu)
        errs.append(est.stderr / abs(pu))
    q = np.array(quotients)
    e = np.array(errs)
    within = np.abs(q - target) <= 3 * e
    dispersion = frame_dispersion(q, e)
    passed = bool(np.all(within) and dispersion <= 3)
    return CheckReport(
        "eigen",
        passed,
        target,
        [McEstimate(complex(v), float(s), samples) for v, s in zip(q, e)],
        {"dispersion": dispersion, "threshold": threshold, "mu": mu},
    )


def annihilation_check(
    p: HPolynomial, lam, samples: int, rng: RngStream, n_frames: int = 5, partitions: int = 1
) -> CheckReport:
    """Check that ``T^lam`` kills ``P``: zero multiplier and null estimates.

    Requires ``lam`` in the convergence set, violating the injectivity
    criterion, ``2m <= n``, even ``k`` and a vanishing multiplier.  The
    sufficient degree bound ``k > max_j Re(lam_j + m - j)`` is reported.
    """
    lam = as_index(lam, p.m)
    m = p.m
    if not in_L_set(lam):
        raise ConvergenceDomain("lam lies outside the convergence set")
    if uhh_condition(lam):
        raise ValueError("lam satisfies the injectivity criterion; nothing is annihilated")
    if p.k % 2:
        raise ValueError("annihilation is checked for even degrees only")
    mu = multiplier_mu(lam, p.k, p.n)
    j = np.arange(1, m + 1)
    bound = float(np.max((lam + m - j).real))
    frames = sample_stiefel(p.n, m, rng.child(0).generator(), n_frames)
    f = p.as_angle_function()
    ests = [cosine_transform(f, lam, u, samples, rng.child(i + 1), partitions) for i, u in enumerate(frames)]
    null = all(abs(e.value) <= 3 * e.stderr for e in ests)
    return CheckReport(
        "annihilate",
        bool(mu.kind == ZERO and null),
        0j,
        ests,
        {"mu": mu, "degree_bound": bound, "above_bound": p.k > bound},
    )


def perp_function(f: AngleFunction, n: int) -> AngleFunction:
    """``f_perp(w) = f(w_perp)``; well defined for right O(m)-invariant ``f``."""
    return AngleFunction(lambda w: f(complement_frame(w)), f.invariance, f"{f.name}_perp")


def perp_duality_check(
    f: AngleFunction,
    lam: complex,
    n: int,
    m: int,
    samples: int,
    rng: RngStream,
    u: np.ndarray | None = None,
    partitions: int = 1,
) -> CheckReport:
    """Mass-normalized ``T^lam f`` at ``u`` against ``T^lam f_perp`` at ``u_perp``.

    Both sides are averages over the Grassmannian, so dividing each by the
    total mass of its Stiefel manifold removes the normalization.
    """
    if not complex(lam).real > -1:
        raise ConvergenceDomain("need Re lam > -1")
    if u is None:
        u = sample_stiefel(n, m, rng.child(0).generator())
    u_perp = complement_frame(u)
    left = det_cosine_transform(f, lam, u, samples, rng.child(1), partitions)
    right = det_cosine_transform(perp_function(f, n), lam, u_perp, samples, rng.child(2), partitions)
    left = left.scaled(1 / stiefel_volume(n, m))
    right = right.scaled(1 / stiefel_volume(n, n - m))
    tol = 3 * combined_stderr(left, right)
    passed = abs(left.value - right.value) <= tol
    return CheckReport("perp", bool(passed), right.value, [left, right], {"tolerance": tol})


def boundary_sequence(n: int, m: int, eps=(0.5, 0.25, 0.125)) -> list[float]:
    """Closed-form ``T^lam 1`` along ``lam_j = j - m - 1 + eps`` toward the boundary."""
    j = np.arange(1, m + 1)
    return [abs(average_closed_form(n, m, j - m - 1 + e).numeric()) for e in eps]
