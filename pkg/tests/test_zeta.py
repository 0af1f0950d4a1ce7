import math

import numpy as np
import pytest

from compcos.errors import ConvergenceDomain, DimensionsTooSmall
from compcos.gaussian import GaussianSchwartz
from compcos.mc import RngStream
from compcos.special import gamma_cone
from compcos.transforms import HPolynomial, make_h_polynomial, projection_quadratic
from compcos.zeta import (
    functional_constant,
    functional_equation_residual,
    hecke_identity_residual,
    normalized_zeta,
    power_fourier_closed,
    power_fourier_constant,
    power_fourier_residual,
    zeta_closed_form,
    zeta_integral,
    zeta_star,
)

SAMPLES = 200_000


def within(est, target, sigmas=3.0):
    return abs(est.value - target) <= sigmas * est.stderr + 1e-10 * abs(target)


def test_zeta_gaussian_mass():
    phi = GaussianSchwartz(4, 2)
    assert zeta_closed_form(phi, [0, 0]) == pytest.approx((2 * math.pi) ** 4, rel=1e-12)
    est = zeta_integral(phi, [0, 0], None, SAMPLES, RngStream(0, 0), proposal_scale=1.2)
    assert within(est, (2 * math.pi) ** 4)


def test_zeta_closed_form_m1_oracle():
    # int_{R^n} |x|^lam e^{-s|x|^2/2} dx by the radial integral
    n, lam, s = 3, 1.3, 0.7
    ref = 4 * math.pi * 0.5 * (2 / s) ** ((lam + n) / 2) * math.gamma((lam + n) / 2)
    assert zeta_closed_form(GaussianSchwartz(n, 1, s), [lam]) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("lam", [(2.0, 2.0), (1.0, -0.5)])
def test_zeta_mc_matches_closed_form(lam):
    phi = GaussianSchwartz(4, 2, 1.3)
    est = zeta_integral(phi, lam, None, SAMPLES, RngStream(1, 0), proposal_scale=1.1)
    assert within(est, zeta_closed_form(phi, lam))
    est = zeta_star(phi, lam, None, SAMPLES, RngStream(1, 1), proposal_scale=1.1)
    assert within(est, zeta_closed_form(phi, lam))


def test_zeta_domain():
    with pytest.raises(ConvergenceDomain):
        zeta_integral(GaussianSchwartz(3, 1), [-3.0], None, 10, RngStream(0, 0))


def test_normalized_zeta():
    assert normalized_zeta(5.0, [1.0], 3).value == pytest.approx(5.0 / gamma_cone([4.0]).value)
    assert normalized_zeta(5.0, [-3.0], 3).kind == "zero"


def test_constants():
    assert functional_constant([0.0]) == pytest.approx(math.sqrt(math.pi) / 2)
    assert power_fourier_constant([-2.0], 3) == pytest.approx(2 * math.pi**1.5)


def test_power_fourier_rank_one_classical():
    # F|x|^lam = 2^{lam+n} pi^{n/2} Gamma((lam+n)/2) / Gamma(-lam/2) |y|^{-lam-n}; both sides exact
    lhs, rhs = power_fourier_closed([-2.0], 3, 1, GaussianSchwartz(3, 1))
    assert lhs == pytest.approx(rhs, rel=1e-12)
    lhs, rhs = power_fourier_closed([-1.3, -0.6], 4, 2, GaussianSchwartz(4, 2, 0.8))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_power_fourier_mc():
    cases = power_fourier_residual([-2.5, -1.5], 4, 2, GaussianSchwartz(4, 2), SAMPLES, RngStream(2, 0))
    assert all(c.passed for c in cases), [c.to_dict() for c in cases if not c.passed]
    with pytest.raises(ConvergenceDomain):
        power_fourier_residual([-1.0, -1.0], 4, 2, GaussianSchwartz(4, 2), 10, RngStream(2, 0))


def test_functional_equation_rank_one():
    cases = functional_equation_residual([-0.5], None, GaussianSchwartz(3, 1), 3, 1, SAMPLES, RngStream(3, 0), mismatch=1.2)
    assert {c.name for c in cases} >= {"functional_equation", "functional_closed_forms"}
    assert all(c.passed for c in cases), [c.to_dict() for c in cases if not c.passed]


def test_functional_equation_invariant_quadratic():
    f = projection_quadratic(np.diag([1.0, -1.0, 2.0]))
    cases = functional_equation_residual([-0.5], f, GaussianSchwartz(3, 1), 3, 1, SAMPLES, RngStream(3, 1), mismatch=1.2)
    assert all(c.passed for c in cases)


def test_functional_equation_strip():
    with pytest.raises(ConvergenceDomain):
        functional_equation_residual([-1.0, -0.5], None, GaussianSchwartz(4, 2), 4, 2, 10, RngStream(0, 0))


def test_hecke_identity():
    gen = np.random.default_rng(4)
    for k in (0, 1, 2):
        case = hecke_identity_residual(make_h_polynomial(4, 2, k), 0.5 * gen.standard_normal((4, 2)), SAMPLES, RngStream(4, k))
        assert case.passed, case.to_dict()
    case = hecke_identity_residual(make_h_polynomial(4, 2, 1), np.zeros((4, 2)), SAMPLES, RngStream(4, 9))
    assert case.rhs == 0 and case.passed
    with pytest.raises(DimensionsTooSmall):
        hecke_identity_residual(HPolynomial(np.zeros((3, 2)), 1), np.zeros((3, 2)), 10, RngStream(0, 0))
