"""Meromorphic special functions of the cone and the injectivity classifier.

Gamma products are evaluated in log space.  Arguments that land on the
poles of the scalar gamma function are detected symbolically (within
``POLE_TOL``) before any floating-point evaluation, so a ratio with
cancelling poles yields its finite limit instead of ``nan``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .cone import as_index, is_constant, reverse_index
from .errors import InvalidDimensions, PoleAtNonPositiveInteger

POLE_TOL = 1e-12
FINITE, ZERO, POLE = "finite", "zero", "pole"


@dataclass(frozen=True)
class TaggedValue:
    """Result of evaluating a meromorphic expression at a point."""

    kind: str
    value: complex = 0j
    order: int = 0

    def __post_init__(self):
        if self.kind not in (FINITE, ZERO, POLE):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind != FINITE and self.order < 1:
            raise ValueError("zeros and poles carry a positive order")

    @classmethod
    def finite(cls, value) -> "TaggedValue":
        return cls(FINITE, complex(value), 0)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    def numeric(self) -> complex:
        """Value as a number: 0 for zeros, ``inf`` for poles."""
        if self.kind == ZERO:
            return 0j
        if self.kind == POLE:
            return complex(math.inf, 0)
        return self.value


def gamma_pole_index(z: complex, tol: float = POLE_TOL) -> int | None:
    """Return ``q`` if ``z`` is (within ``tol``) the pole ``-q`` of Gamma."""
    z = complex(z)
    if abs(z.imag) > tol or z.real > tol:
        return None
    q = round(-z.real)
    if abs(z.real + q) <= tol:
        return int(q)
    return None


def log_gamma_complex(z: complex) -> complex:
    """Principal branch of ``log Gamma(z)``.

    Raises
    ------
    PoleAtNonPositiveInteger
        If ``z`` is within 1e-14 of ``0, -1, -2, ...``.
    """
    if gamma_pole_index(z, tol=1e-14) is not None:
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at {z}")
    return complex(loggamma(complex(z)))


def _gamma_product(args, prefactor_log: float = 0.0) -> TaggedValue:
    log_sum = complex(prefactor_log)
    poles = 0
    for a in args:
        if gamma_pole_index(a) is not None:
            poles += 1
        else:
            log_sum += loggamma(complex(a))
    if poles:
        return TaggedValue(POLE, 0j, poles)
    return TaggedValue.finite(cmath.exp(log_sum))


def gamma_cone_args(lam) -> np.ndarray:
    lam = as_index(lam)
    j = np.arange(1, lam.size + 1)
    return (lam - j + 1) / 2


def gamma_cone(lam) -> TaggedValue:
    """Gamma function of the cone, ``pi^{m(m-1)/4} prod_j Gamma((lam_j - j + 1)/2)``."""
    lam = as_index(lam)
    m = lam.size
    return _gamma_product(gamma_cone_args(lam), m * (m - 1) / 4 * math.log(math.pi))


def siegel_gamma(a: complex, m: int) -> TaggedValue:
    """Siegel gamma ``Gamma_m(a) = pi^{m(m-1)/4} prod_{j<m} Gamma(a - j/2)``."""
    args = [complex(a) - j / 2 for j in range(m)]
    return _gamma_product(args, m * (m - 1) / 4 * math.log(math.pi))


def log_siegel_gamma(a: float, m: int) -> float:
    """Real log of ``Gamma_m(a)`` for real ``a > (m-1)/2``."""
    return m * (m - 1) / 4 * math.log(math.pi) + sum(
        math.lgamma(a - j / 2) for j in range(m)
    )


def sphere_area(i: int) -> float:
    """Surface area of the unit sphere ``S^i`` in ``R^{i+1}``."""
    return 2 * math.pi ** ((i + 1) / 2) / math.gamma((i + 1) / 2)


def _check_nm(n: int, m: int) -> None:
    if not (1 <= m <= n):
        raise InvalidDimensions(f"need 1 <= m <= n, got n={n}, m={m}")


def stiefel_volume(n: int, m: int) -> float:
    """Total mass of ``V_{n,m}``: ``2^m pi^{nm/2} / Gamma_m(n/2)``."""
    _check_nm(n, m)
    return math.exp(m * math.log(2) + n * m / 2 * math.log(math.pi) - log_siegel_gamma(n / 2, m))


def stiefel_volume_spheres(n: int, m: int) -> float:
    """Same mass as a product of sphere areas ``|S^{n-1}| ... |S^{n-m}|``."""
    _check_nm(n, m)
    return math.prod(sphere_area(n - i) for i in range(1, m + 1))


def average_closed_form(n: int, m: int, lam) -> TaggedValue:
    """``T^lam 1``: the integral of ``(u'v v'u)^lam`` over ``V_{n,m}``.

    Equals ``2^m pi^{nm/2} / Gamma_m(m/2) * Gamma_cone(lam + m) / Gamma_cone(lam + n)``.
    """
    _check_nm(n, m)
    lam = as_index(lam, m)
    num = gamma_cone(lam + m)
    den = gamma_cone(lam + n)
    if not num.is_finite:
        return num
    if not den.is_finite:
        return TaggedValue(ZERO, 0j, den.order)
    pref = math.exp(m * math.log(2) + n * m / 2 * math.log(math.pi) - log_siegel_gamma(m / 2, m))
    return TaggedValue.finite(pref * num.value / den.value)


# -- multiplier ---------------------------------------------------------------

@dataclass(frozen=True)
class _Factor:
    arg: complex
    slope: float  # d(arg)/d(delta) along lam + delta * (1, ..., 1)
    numerator: bool


def _multiplier_factors(lam: np.ndarray, k: int, n: int) -> list[_Factor]:
    m = lam.size
    rev = reverse_index(lam)
    j = np.arange(1, m + 1)
    factors = []
    # Gamma_cone(lam + m0)
    factors += [_Factor(a, 0.5, True) for a in (lam + m - j + 1) / 2]
    # Gamma_cone(k0 - lam_*)
    factors += [_Factor(a, -0.5, True) for a in (k - rev - j + 1) / 2]
    # Gamma_cone(-lam_*)
    factors += [_Factor(a, -0.5, False) for a in (-rev - j + 1) / 2]
    # Gamma_cone(lam + k0 + n0)
    factors += [_Factor(a, 0.5, False) for a in (lam + k + n - j + 1) / 2]
    return factors


def multiplier_mu(lam, k: int, n: int) -> TaggedValue:
    """Funk-Hecke type multiplier of the composite cosine transform.

    ``mu_k(lam) = G(lam+m0) G(k0-lam_*) / (G(-lam_*) G(lam+k0+n0))`` with
    ``G`` the cone gamma function.  Each of the ``4m`` scalar gamma factors
    is classified as finite or polar.  A polar factor ``Gamma(-q + c*delta)``
    contributes its leading Laurent coefficient ``(-1)^q / (q! c)``, where
    ``delta`` moves every component of ``lam`` together.  The net order
    decides the tag; at net order zero the coefficients give the limit.
    The ``pi`` prefactors cancel and are omitted.
    """
    lam = as_index(lam)
    if k < 0:
        raise ValueError("degree k must be non-negative")
    if n <= lam.size:
        raise InvalidDimensions("multiplier requires n > m")
    order = 0
    log_sum = 0j
    for f in _multiplier_factors(lam, k, n):
        q = gamma_pole_index(f.arg)
        if q is None:
            term, o = complex(loggamma(f.arg)), 0
        else:
            term = -math.lgamma(q + 1) - cmath.log(f.slope) + (1j * math.pi if q % 2 else 0)
            o = 1
        if f.numerator:
            log_sum += term
            order += o
        else:
            log_sum -= term
            order -= o
    if order > 0:
        return TaggedValue(POLE, 0j, order)
    if order < 0:
        return TaggedValue(ZERO, 0j, -order)
    return TaggedValue.finite(cmath.exp(log_sum))


def multiplier_constant(n: int, m: int, k: int) -> complex:
    """The constant ``c = pi^{m(n-m)/2} i^{km} sigma_{m,m}`` of the eigen-relation."""
    return math.pi ** (m * (n - m) / 2) * (1j ** ((k * m) % 4)) * stiefel_volume(m, m)


# -- convergence sets ---------------------------------------------------------

def in_L_set(lam) -> bool:
    """``Re lam_j > j - m - 1`` for every j (absolute convergence of T^lam)."""
    lam = as_index(lam)
    m = lam.size
    j = np.arange(1, m + 1)
    return bool(np.all(lam.real > j - m - 1))


def in_Lambda_set(lam, n: int) -> bool:
    """``Re lam_j > j - n - 1`` for every j (absolute convergence of zeta integrals)."""
    lam = as_index(lam)
    j = np.arange(1, lam.size + 1)
    return bool(np.all(lam.real > j - n - 1))


def in_polar_set(lam, n: int, tol: float = POLE_TOL) -> bool:
    """``lam_j = j - n - l`` for some j and some odd ``l >= 1``."""
    lam = as_index(lam)
    for j, lj in enumerate(lam, start=1):
        if abs(lj.imag) > tol:
            continue
        l = j - n - lj.real
        li = round(l)
        if abs(l - li) <= tol and li >= 1 and li % 2 == 1:
            return True
    return False


def strip_check(lam, lower, upper, tol: float = 1e-12) -> bool:
    """``lower_j < Re lam_j < upper_j`` with a closed-boundary tolerance."""
    re = as_index(lam).real
    return bool(np.all(re > np.asarray(lower) + tol) and np.all(re < np.asarray(upper) - tol))


def uhh_condition(lam) -> bool:
    """True when ``lam_j + m - j`` avoids ``{0, 2, 4, ...}`` for every j."""
    lam = as_index(lam)
    m = lam.size
    for j, lj in enumerate(lam, start=1):
        q = gamma_pole_index(-(lj + m - j) / 2)
        if q is not None:
            return False
    return True


# -- classifier ---------------------------------------------------------------

STRICTLY_INSIDE_L = "strictly_inside_L"
VIOLATES_UHH = "violates_uhh"
RANK_ONE_RULE = "rank_one_rule"
RANK_GT_ONE_RULE = "rank_gt_one_rule"
OUTSIDE_CONVERGENCE = "outside_convergence"


@dataclass(frozen=True)
class InjectivityVerdict:
    """Outcome of :func:`injectivity_classify`.

    ``injective`` is ``None`` when the question is not decided: outside the
    convergence set, or a non-constant index failing the criterion with
    ``2m > n``.
    """

    injective: bool | None
    reason: str
    annihilated_degrees: str = ""
    zero_degrees: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "injective": self.injective,
            "reason": self.reason,
            "annihilated_degrees": self.annihilated_degrees,
            "zero_degrees": list(self.zero_degrees),
            "notes": list(self.notes),
        }


def _zero_degrees(lam, n: int, kmax: int) -> tuple[int, ...]:
    return tuple(
        k for k in range(0, kmax + 1, 2) if multiplier_mu(lam, k, n).kind == ZERO
    )


def _is_nonneg_integer(z: complex, step: int) -> bool:
    q = gamma_pole_index(-z / step)
    return q is not None


def injectivity_classify(lam, n: int, kmax: int = 16) -> InjectivityVerdict:
    """Decide injectivity of ``T^lam`` on right O(m)-invariant functions.

    Constant indices use the rank dichotomy (rank one: fails exactly on
    ``{0, 2, 4, ...}``; higher rank: fails on ``{0, 1, 2, ...}``).  Other
    indices use the criterion ``lam_j + m - j not in {0, 2, 4, ...}``;
    failure proves non-injectivity only when ``2m <= n``.
    """
    lam = as_index(lam)
    m = lam.size
    if not (1 <= m < n):
        raise InvalidDimensions(f"need 1 <= m < n, got n={n}, m={m}")
    if not in_L_set(lam):
        return InjectivityVerdict(
            None,
            OUTSIDE_CONVERGENCE,
            notes=("transform is not an absolutely convergent operator here",),
        )

    if is_constant(lam):
        l0 = lam[0]
        rank = min(m, n - m)
        # the dual side (n, n - m) is used when 2m > n
        dual_m = m if 2 * m <= n else n - m
        dual_lam = np.full(dual_m, l0)
        if rank == 1:
            bad = _is_nonneg_integer(l0, 2)
            reason = RANK_ONE_RULE
        else:
            bad = _is_nonneg_integer(l0, 1)
            reason = RANK_GT_ONE_RULE
        if not bad:
            return InjectivityVerdict(True, reason)
        bound = (l0 + dual_m - 1).real
        notes = () if dual_m == m else (f"witness lives on the dual V_{{{n},{n - m}}}",)
        return InjectivityVerdict(
            False,
            reason,
            annihilated_degrees=f"even k > {bound:g}",
            zero_degrees=_zero_degrees(dual_lam, n, kmax),
            notes=notes,
        )

    if uhh_condition(lam):
        return InjectivityVerdict(True, STRICTLY_INSIDE_L)
    j = np.arange(1, m + 1)
    bound = float(np.max((lam + m - j).real))
    if 2 * m <= n:
        return InjectivityVerdict(
            False,
            VIOLATES_UHH,
            annihilated_degrees=f"even k > {bound:g}",
            zero_degrees=_zero_degrees(lam, n, kmax),
            notes=("witness requires 2m <= n",),
        )
    return InjectivityVerdict(
        None,
        VIOLATES_UHH,
        notes=("witness requires 2m <= n; necessity unknown when 2m > n",),
    )
