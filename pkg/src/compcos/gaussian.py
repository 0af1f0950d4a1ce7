"""Gaussian test functions on matrix space and their Fourier transforms.

The Fourier convention is ``(F f)(y) = int exp(i tr(y'x)) f(x) dx`` with
Parseval constant ``(2 pi)^{nm}``.  A component is

    phi(x) = w * exp(-tr((x - c)' A (x - c)) / 2)

with ``A`` an ``n x n`` positive definite precision acting on the rows of
``x``; the isotropic case ``A = s I`` is the workhorse of the zeta suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cone import PosDefMatrix


@dataclass(frozen=True)
class GaussianSchwartz:
    """``w exp(-tr((x - c)' A (x - c)) / 2)`` on ``R^{n x m}``.

    ``precision=None`` means ``A = scale * I``.
    """

    n: int
    m: int
    scale: float = 1.0
    precision: np.ndarray | None = field(default=None, repr=False)
    shift: np.ndarray | None = field(default=None, repr=False)
    weight: complex = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.precision is not None:
            a = np.array(self.precision, dtype=float)
            PosDefMatrix.from_array(a)
            if a.shape != (self.n, self.n):
                raise ValueError("precision must be n x n")
            object.__setattr__(self, "precision", a)
        if self.shift is not None:
            c = np.array(self.shift, dtype=float)
            if c.shape != (self.n, self.m):
                raise ValueError("shift must be n x m")
            object.__setattr__(self, "shift", c)

    @property
    def A(self) -> np.ndarray:
        if self.precision is None:
            return self.scale * np.eye(self.n)
        return self.precision

    @property
    def c(self) -> np.ndarray:
        return np.zeros((self.n, self.m)) if self.shift is None else self.shift

    @property
    def isotropic(self) -> bool:
        return self.precision is None and self.shift is None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x) - self.c
        q = np.einsum("...ij,ik,...kj->...", d, self.A, d)
        return self.weight * np.exp(-q / 2)

    def total(self) -> complex:
        """``int phi`` (the Fourier transform at zero)."""
        return complex(self.fourier(np.zeros((self.n, self.m))))

    def fourier(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y)
        nm = self.n * self.m
        cov = np.linalg.inv(self.A)
        logdet = np.linalg.slogdet(self.A)[1]
        q = np.einsum("...ij,ik,...kj->...", y, cov, y)
        phase = np.einsum("...ij,ij->...", y, self.c)
        return (
            self.weight
            * math.exp(nm / 2 * math.log(2 * math.pi) - self.m / 2 * logdet)
            * np.exp(1j * phase - q / 2)
        )

    def fourier_function(self) -> "GaussianSchwartz":
        """``F phi`` as a Gaussian in its own right (centered components only)."""
        if self.shift is not None:
            raise ValueError("the transform of a shifted Gaussian is not a real Gaussian")
        nm = self.n * self.m
        w = self.weight * math.exp(nm / 2 * math.log(2 * math.pi) - self.m / 2 * np.linalg.slogdet(self.A)[1])
        if self.precision is None:
            return GaussianSchwartz(self.n, self.m, 1.0 / self.scale, weight=w)
        return GaussianSchwartz(self.n, self.m, precision=np.linalg.inv(self.A), weight=w)


@dataclass(frozen=True)
class GaussianMixture:
    """A finite sum of :class:`GaussianSchwartz` components."""

    components: tuple[GaussianSchwartz, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        shapes = {(c.n, c.m) for c in self.components}
        if len(shapes) != 1:
            raise ValueError("mixture components must share a shape")

    @classmethod
    def of(cls, phi) -> "GaussianMixture":
        return phi if isinstance(phi, cls) else cls((phi,))

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def m(self) -> int:
        return self.components[0].m

    def __call__(self, x):
        return sum(c(x) for c in self.components)

    def fourier(self, y):
        return sum(c.fourier(y) for c in self.components)

    def total(self) -> complex:
        return sum(c.total() for c in self.components)


def random_mixture(n: int, m: int, gen: np.random.Generator, count: int = 3) -> GaussianMixture:
    """Shifted anisotropic Gaussians with random weights (for linearity checks)."""
    comps = []
    for _ in range(count):
        g = gen.standard_normal((n, n))
        a = g @ g.T / n + 0.5 * np.eye(n)
        comps.append(
            GaussianSchwartz(
                n, m, precision=a, shift=0.5 * gen.standard_normal((n, m)),
                weight=float(gen.uniform(0.5, 1.5)),
            )
        )
    return GaussianMixture(tuple(comps))
