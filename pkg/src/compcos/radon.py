"""Matrix Radon transform of Gaussian functions and the projection-slice identity.

A matrix plane is ``{x in R^{n x m} : xi'x = t}`` with ``xi`` in
``V_{n,k}`` and ``t`` a ``k x m`` matrix.  It is parametrized as
``x = g_xi [omega; t]`` where ``g_xi = [xi_perp, xi]`` is a rotation
carrying the last ``k`` basis vectors onto ``xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensions
from .gaussian import GaussianMixture, GaussianSchwartz
from .geometry import FRAME_TOL, gram_schmidt, is_frame
from .mc import McEstimate, RngStream, monte_carlo


@dataclass(frozen=True)
class MatrixPlane:
    xi: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        t = np.array(self.t, dtype=float)
        if not is_frame(xi, FRAME_TOL):
            raise ValueError("xi must have orthonormal columns")
        if t.shape[0] != xi.shape[1]:
            raise ValueError("t must have k rows")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def k(self) -> int:
        return self.xi.shape[1]

    @property
    def m(self) -> int:
        return self.t.shape[1]


def rotation_for(xi: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """A rotation ``g`` in ``SO(n)`` whose last ``k`` columns are ``xi``.

    The complement is taken by orthonormalizing ``[xi | random]`` and the
    first complement column is flipped if needed to make ``det g = +1``.
    """
    xi = np.asarray(xi, dtype=float)
    n, k = xi.shape
    q, _, _ = gram_schmidt(np.hstack([xi, gen.standard_normal((n, n - k))]))
    perp = q[:, k:]
    g = np.hstack([perp, xi])
    if np.linalg.det(g) < 0:
        g[:, 0] = -g[:, 0]
    return g


def _check(n: int, k: int, m: int) -> None:
    if not (1 <= m <= k < n):
        raise InvalidDimensions(f"need 1 <= m <= k < n, got n={n}, k={k}, m={m}")


def _radon_component(phi: GaussianSchwartz, g: np.ndarray, k: int, t: np.ndarray) -> complex:
    n, m = phi.n, phi.m
    b = g.T @ phi.A @ g
    b11, b12, b22 = b[: n - k, : n - k], b[: n - k, n - k :], b[n - k :, n - k :]
    schur = b22 - b12.T @ np.linalg.solve(b11, b12)
    tau = t - g[:, n - k :].T @ phi.c
    logdet11 = np.linalg.slogdet(b11)[1]
    log_mass = (n - k) * m / 2 * math.log(2 * math.pi) - m / 2 * logdet11
    return complex(phi.weight * math.exp(log_mass) * np.exp(-np.einsum("ij,ik,kj->", tau, schur, tau) / 2))


def radon_gaussian(phi, plane: MatrixPlane, gen: np.random.Generator | None = None) -> complex:
    """``int phi(g_xi [omega; t]) d omega`` in closed form.

    Completing the square in ``omega`` leaves the Schur complement of the
    ``omega`` block of ``g_xi' A g_xi``.
    """
    mix = GaussianMixture.of(phi)
    _check(plane.n, plane.k, plane.m)
    if (mix.n, mix.m) != (plane.n, plane.m):
        raise InvalidDimensions("plane and function shapes differ")
    g = rotation_for(plane.xi, gen if gen is not None else np.random.default_rng(0))
    return sum(_radon_component(c, g, plane.k, plane.t) for c in mix.components)


def radon_gaussian_mc(
    phi, plane: MatrixPlane, samples: int, rng: RngStream, partitions: int = 1
) -> McEstimate:
    """Monte Carlo estimate of the plane integral with a Gaussian proposal on ``omega``."""
    mix = GaussianMixture.of(phi)
    n, k, m = plane.n, plane.k, plane.m
    _check(n, k, m)
    g = rotation_for(plane.xi, rng.child(999).generator())
    d = (n - k) * m
    log_norm = d / 2 * math.log(2 * math.pi)

    def draw(gen, size):
        omega = gen.standard_normal((size, n - k, m))
        x = g @ np.concatenate([omega, np.broadcast_to(plane.t, (size, k, m))], axis=1)
        return mix(x) * np.exp(np.sum(omega * omega, axis=(1, 2)) / 2)

    return monte_carlo(draw, samples, rng, partitions, scale=math.exp(log_norm))


def radon_fourier(phi, xi: np.ndarray, b: np.ndarray) -> complex:
    """``km``-dimensional Fourier transform of ``t -> R phi(xi, t)`` at ``b``.

    Each component's plane integral is a Gaussian in ``t`` with precision
    the Schur complement ``S``, center ``xi'c`` and mass
    ``(2 pi)^{(n-k)m/2} det(B11)^{-m/2}``; its transform is taken in closed form.
    """
    mix = GaussianMixture.of(phi)
    xi = np.asarray(xi, dtype=float)
    b = np.asarray(b, dtype=float)
    n, k = xi.shape
    _check(n, k, mix.m)
    g = rotation_for(xi, np.random.default_rng(0))
    total = 0j
    for c in mix.components:
        m = c.m
        bb = g.T @ c.A @ g
        b11, b12, b22 = bb[: n - k, : n - k], bb[: n - k, n - k :], bb[n - k :, n - k :]
        schur = b22 - b12.T @ np.linalg.solve(b11, b12)
        center = xi.T @ c.c
        log_mass = (n - k) * m / 2 * math.log(2 * math.pi) - m / 2 * np.linalg.slogdet(b11)[1]
        log_ft = k * m / 2 * math.log(2 * math.pi) - m / 2 * np.linalg.slogdet(schur)[1]
        quad = np.einsum("ij,ik,kj->", b, np.linalg.inv(schur), b)
        phase = np.sum(b * center)
        total += c.weight * math.exp(log_mass + log_ft) * np.exp(1j * phase - quad / 2)
    return complex(total)


@dataclass(frozen=True)
class SliceResult:
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def projection_slice_residual(phi, xi: np.ndarray, b: np.ndarray, rtol: float = 1e-8) -> SliceResult:
    """Compare ``(F phi)(xi b)`` with the transform of the plane integrals at ``b``."""
    mix = GaussianMixture.of(phi)
    xi = np.asarray(xi, dtype=float)
    _check(xi.shape[0], xi.shape[1], mix.m)
    lhs = complex(mix.fourier(xi @ np.asarray(b, dtype=float)))
    rhs = radon_fourier(mix, xi, b)
    return SliceResult(lhs, rhs, abs(lhs - rhs), rtol * max(abs(lhs), 1.0))
