"""Zeta integrals on matrix space and the identities built from them.

``Z(phi, lam, f) = int r^lam f(v) conj(phi(x)) dx`` with ``x = v r^{1/2}``,
and ``Z_*`` uses ``(r_*)^lam``.  For right O(m)-invariant ``f`` the polar
frame may be replaced by the triangular frame of ``x``, which is what the
samplers produce.

All estimators draw ``x`` from a Gaussian tilted by ``(x'x)^{Re lam}``
(or its reversed form), so the algebraic singularity of the integrand is
carried by the proposal and the weights stay bounded near the boundary.
"""

from __future__ import annotations

import math

import numpy as np

from .cone import as_index, reverse_index
from .errors import ConvergenceDomain, DimensionsTooSmall
from .gaussian import GaussianSchwartz
from .geometry import gram_schmidt, sample_stiefel_tilted, tilted_gaussian_draw, transpose
from .mc import McEstimate, RngStream, monte_carlo
from .report import Case, exact_case, mc_case
from .special import (
    TaggedValue,
    average_closed_form,
    gamma_cone,
    in_L_set,
    in_Lambda_set,
    stiefel_volume,
    strip_check,
)
from .transforms import AngleFunction, HPolynomial, constant_one, eval_h_polynomial

STRIP_TOL = 1e-12


def _power(t: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``(x'x)^lam = prod_j t_jj^{lam_j}`` from the triangular factor of the draw."""
    return np.exp(np.log(np.diagonal(t, axis1=-2, axis2=-1)) @ lam)


def _zeta(phi, lam, f, samples, rng, partitions, proposal_scale, reverse) -> McEstimate:
    n, m = phi.n, phi.m
    lam = as_index(lam, m)
    if not in_Lambda_set(lam, n):
        raise ConvergenceDomain("lam lies outside the absolute-convergence set of the zeta integral")
    f = f or constant_one()
    if proposal_scale is None:
        proposal_scale = 1 / math.sqrt(phi.scale)

    def draw(gen, size):
        x, t, inv_q = tilted_gaussian_draw(n, m, gen, size, lam.real, proposal_scale, reverse)
        u, _, _ = gram_schmidt(x)
        return _power(t, lam) * f(u) * np.conj(phi(x)) * inv_q

    return monte_carlo(draw, samples, rng, partitions)


def zeta_integral(
    phi: GaussianSchwartz, lam, f: AngleFunction | None, samples: int, rng: RngStream,
    partitions: int = 1, proposal_scale: float | None = None,
) -> McEstimate:
    """Monte Carlo estimate of ``Z(phi, lam, f)``.

    ``proposal_scale`` is the standard deviation of the untilted proposal;
    it defaults to the width of ``phi``.
    """
    return _zeta(phi, lam, f, samples, rng, partitions, proposal_scale, reverse=False)


def zeta_star(
    phi: GaussianSchwartz, lam, f: AngleFunction | None, samples: int, rng: RngStream,
    partitions: int = 1, proposal_scale: float | None = None,
) -> McEstimate:
    """Monte Carlo estimate of ``Z_*(phi, lam, f)`` (reversed composite power)."""
    return _zeta(phi, lam, f, samples, rng, partitions, proposal_scale, reverse=True)


def zeta_closed_form(phi: GaussianSchwartz, lam) -> complex:
    """``Z(phi, lam, 1) = Z_*(phi, lam, 1)`` for a centered isotropic ``phi``.

    Separating polar coordinates gives
    ``2^{-m} sigma_{n,m} Gamma_cone(lam + n) (2/s)^{(|lam| + nm)/2}``.
    """
    if not phi.isotropic:
        raise ValueError("closed form needs a centered isotropic Gaussian")
    n, m, s = phi.n, phi.m, phi.scale
    lam = as_index(lam, m)
    if not in_Lambda_set(lam, n):
        raise ConvergenceDomain("lam lies outside the absolute-convergence set of the zeta integral")
    g = gamma_cone(lam + n).value
    power = np.exp((np.sum(lam) + n * m) / 2 * math.log(2 / s))
    return complex(np.conj(phi.weight) * 2.0**-m * stiefel_volume(n, m) * g * power)


def normalized_zeta(z, lam, n: int) -> TaggedValue:
    """``Z / Gamma_cone(lam + n0)``; finite wherever ``Z`` is."""
    g = gamma_cone(as_index(lam) + n)
    value = z.value if isinstance(z, McEstimate) else complex(z)
    if not g.is_finite:
        return TaggedValue("zero", 0j, g.order)
    return TaggedValue.finite(value / g.value)


# -- functional equation ------------------------------------------------------

def functional_strip(m: int):
    j = np.arange(1, m + 1)
    return j - m - 1, j - m


def functional_constant(lam) -> complex:
    """``c_lam = 2^{-|lam|} pi^{m^2/2} / sigma_{m,m}``."""
    lam = as_index(lam)
    m = lam.size
    return complex(2.0 ** (-np.sum(lam)) * math.pi ** (m * m / 2) / stiefel_volume(m, m))


def transform_pairing(
    f: AngleFunction, lam, phi: GaussianSchwartz, samples: int, rng: RngStream,
    partitions: int = 1, proposal_scale: float | None = None,
) -> McEstimate:
    """``int (T^lam f)(x) conj((F phi)(x)) dx`` with one joint draw per sample.

    ``x`` comes from the Gaussian tilted by ``(x'x)^{Re lam}``; given its
    triangular frame ``u`` a frame ``v`` is drawn from the tilted frame
    sampler, so ``f(v) w`` is an unbiased draw of ``(T^lam f)(u)``.
    """
    n, m = phi.n, phi.m
    lam = as_index(lam, m)
    if not in_L_set(lam):
        raise ConvergenceDomain("lam lies outside the convergence set")
    fphi = phi.fourier_function() if phi.shift is None else None
    if proposal_scale is None:
        proposal_scale = math.sqrt(phi.scale)
    sigma = stiefel_volume(n, m)

    def draw(gen, size):
        x, t, inv_q = tilted_gaussian_draw(n, m, gen, size, lam.real, proposal_scale)
        u, _, _ = gram_schmidt(x)
        v, w = sample_stiefel_tilted(u, lam, gen, size)
        ft = fphi(x) if fphi is not None else phi.fourier(x)
        return f(v) * w * _power(t, lam) * np.conj(ft) * inv_q

    return monte_carlo(draw, samples, rng, partitions, scale=sigma)


def functional_equation_residual(
    lam, f: AngleFunction | None, phi: GaussianSchwartz, n: int, m: int, samples: int,
    rng: RngStream, partitions: int = 1, mismatch: float = 1.0,
) -> list[Case]:
    """Both sides of the functional equation for ``T^lam`` in the strip.

    LHS: ``c_lam / Gamma_cone(lam + m0) * (T^lam f, F phi)``.
    RHS: ``(2 pi)^{nm} Z_*(phi, -lam_* - n0, f) / Gamma_cone(-lam_*)``.
    ``mismatch`` scales both proposal widths away from the exact Gaussian
    widths, which keeps the estimators honest (non-degenerate) when ``f`` is
    constant.  For ``f = 1`` and centered isotropic ``phi`` the cases also
    compare each side with its closed form.
    """
    lam = as_index(lam, m)
    if (phi.n, phi.m) != (n, m):
        raise ValueError("phi has the wrong shape")
    lo, hi = functional_strip(m)
    if not strip_check(lam, lo, hi, STRIP_TOL):
        raise ConvergenceDomain("lam must satisfy j-m-1 < Re lam_j < j-m")
    one = f is None
    f = f or constant_one()
    mu = -reverse_index(lam) - n
    g_lam = gamma_cone(lam + m).value
    g_rev = gamma_cone(-reverse_index(lam)).value
    c = functional_constant(lam)

    pairing = transform_pairing(
        f, lam, phi, samples, rng.child(0), partitions, mismatch * math.sqrt(phi.scale)
    )
    zs = zeta_star(phi, mu, f, samples, rng.child(1), partitions, mismatch / math.sqrt(phi.scale))
    lhs = pairing.scaled(c / g_lam)
    rhs = zs.scaled((2 * math.pi) ** (n * m) / g_rev)
    cases = [mc_case("functional_equation", lhs, rhs)]
    if one and phi.isotropic:
        fphi = phi.fourier_function()
        lhs_cf = c / g_lam * average_closed_form(n, m, lam).value * zeta_closed_form(fphi, lam)
        rhs_cf = (2 * math.pi) ** (n * m) / g_rev * zeta_closed_form(phi, mu)
        cases += [
            mc_case("functional_lhs_vs_closed", lhs, lhs_cf),
            mc_case("functional_rhs_vs_closed", rhs, rhs_cf),
            exact_case("functional_closed_forms", lhs_cf, rhs_cf, rtol=1e-10),
        ]
    return cases


# -- Fourier transform of the composite power ---------------------------------

def power_fourier_strip(n: int, m: int):
    j = np.arange(1, m + 1)
    return j - n - 1, j - m


def power_fourier_constant(lam, n: int) -> complex:
    """``c_lam = 2^{nm + |lam|} pi^{nm/2}``."""
    lam = as_index(lam)
    m = lam.size
    return complex(2.0 ** (n * m + np.sum(lam)) * math.pi ** (n * m / 2))


def power_fourier_closed(lam, n: int, m: int, phi: GaussianSchwartz):
    """Closed forms of both sides for a centered isotropic Gaussian."""
    lam = as_index(lam, m)
    mu = -reverse_index(lam) - n
    lhs = gamma_cone(-reverse_index(lam)).value * zeta_closed_form(phi.fourier_function(), lam)
    rhs = power_fourier_constant(lam, n) * gamma_cone(lam + n).value * zeta_closed_form(phi, mu)
    return lhs, rhs


def power_fourier_residual(
    lam, n: int, m: int, phi: GaussianSchwartz, samples: int, rng: RngStream,
    partitions: int = 1, mismatch: float = 1.25, closed_rtol: float = 1e-8,
) -> list[Case]:
    """Parseval form of the Fourier transform of ``(y'y)^lam`` in its strip.

    ``Gamma_cone(-lam_*) int (y'y)^lam conj(F phi)(y) dy``
    against ``c_lam Gamma_cone(lam + n0) int (x'x)_*^{-lam_* - n0} conj(phi)(x) dx``.
    """
    lam = as_index(lam, m)
    lo, hi = power_fourier_strip(n, m)
    if not strip_check(lam, lo, hi, STRIP_TOL):
        raise ConvergenceDomain("lam must satisfy j-n-1 < Re lam_j < j-m")
    if (phi.n, phi.m) != (n, m):
        raise ValueError("phi has the wrong shape")
    mu = -reverse_index(lam) - n
    fphi = phi.fourier_function()
    left = zeta_integral(fphi, lam, None, samples, rng.child(0), partitions, mismatch / math.sqrt(fphi.scale))
    right = zeta_star(phi, mu, None, samples, rng.child(1), partitions, mismatch / math.sqrt(phi.scale))
    lhs = left.scaled(gamma_cone(-reverse_index(lam)).value)
    rhs = right.scaled(power_fourier_constant(lam, n) * gamma_cone(lam + n).value)
    cases = [mc_case("power_fourier", lhs, rhs)]
    if phi.isotropic:
        lhs_cf, rhs_cf = power_fourier_closed(lam, n, m, phi)
        cases += [
            exact_case("power_fourier_closed_forms", lhs_cf, rhs_cf, rtol=closed_rtol),
            mc_case("power_fourier_lhs_vs_closed", lhs, lhs_cf),
            mc_case("power_fourier_rhs_vs_closed", rhs, rhs_cf),
        ]
    return cases


# -- Hecke identity -----------------------------------------------------------

def hecke_identity_residual(
    p: HPolynomial, y: np.ndarray, samples: int, rng: RngStream, partitions: int = 1
) -> Case:
    """``int P(x) e^{-pi |x|^2} e^{2 pi i tr(y'x)} dx`` against ``i^{km} P(y) e^{-pi |y|^2}``.

    The proposal is the Gaussian with variance ``1/(2 pi)``, whose density
    is exactly ``e^{-pi |x|^2}``, so the weights reduce to ``P(x)`` times a
    phase.
    """
    n, m = p.n, p.m
    if 2 * m > n:
        raise DimensionsTooSmall("the Hecke identity is checked for 2m <= n")
    y = np.asarray(y, dtype=float)
    scale = 1 / math.sqrt(2 * math.pi)

    def draw(gen, size):
        x = scale * gen.standard_normal((size, n, m))
        phase = 2 * math.pi * np.einsum("ij,...ij->...", y, x)
        return eval_h_polynomial(p, x) * np.exp(1j * phase)

    est = monte_carlo(draw, samples, rng, partitions)
    target = (1j ** ((p.k * m) % 4)) * complex(eval_h_polynomial(p, y)) * math.exp(-math.pi * np.sum(y * y))
    return mc_case(f"hecke_k{p.k}", est, target)
