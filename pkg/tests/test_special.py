import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from compcos.errors import InvalidDimensions, PoleAtNonPositiveInteger
from compcos.special import (
    OUTSIDE_CONVERGENCE,
    RANK_GT_ONE_RULE,
    RANK_ONE_RULE,
    STRICTLY_INSIDE_L,
    VIOLATES_UHH,
    TaggedValue,
    average_closed_form,
    gamma_cone,
    in_L_set,
    in_Lambda_set,
    in_polar_set,
    injectivity_classify,
    log_gamma_complex,
    multiplier_constant,
    multiplier_mu,
    siegel_gamma,
    stiefel_volume,
    stiefel_volume_spheres,
    uhh_condition,
)

from conftest import rel


def test_log_gamma_examples():
    assert log_gamma_complex(1) == 0
    assert log_gamma_complex(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)


@given(st.floats(0.05, 40), st.floats(-30, 30))
def test_log_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    ref = complex(mp.loggamma(mp.mpc(x, y)))
    assert abs(log_gamma_complex(z) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_log_gamma_reflection_side():
    for z in (-0.5 + 0.3j, -2.7, -7.25 + 1j):
        assert abs(np.exp(log_gamma_complex(z)) - complex(mp.gamma(z))) <= 1e-11 * abs(complex(mp.gamma(z)))


@pytest.mark.parametrize("z", [0, -1, -4, -1e-15])
def test_log_gamma_poles(z):
    with pytest.raises(PoleAtNonPositiveInteger):
        log_gamma_complex(z)


def test_tagged_value_invariants():
    with pytest.raises(ValueError):
        TaggedValue("zero", 0j, 0)
    with pytest.raises(ValueError):
        TaggedValue("bogus")
    assert TaggedValue("pole", order=2).numeric() == complex(math.inf, 0)
    assert TaggedValue("zero", order=1).numeric() == 0


def test_gamma_cone_examples():
    assert gamma_cone([2]).value == pytest.approx(1)
    assert gamma_cone([1, 2]).value == pytest.approx(math.pi**1.5, rel=1e-14)
    assert siegel_gamma(1, 1).value == pytest.approx(1)
    assert siegel_gamma(1.5, 2).value == pytest.approx(math.pi / 2, rel=1e-14)
    assert gamma_cone([0, 3]).kind == "pole"


@given(st.integers(1, 4), st.floats(0, 6), st.floats(-2, 2))
def test_cone_gamma_constant_index_is_siegel(m, x, y):
    lam = complex(m + x, y)
    a = gamma_cone(np.full(m, lam)).value
    b = mp.mpf(1)
    for j in range(m):
        b *= mp.gamma(mp.mpc(lam.real, lam.imag) / 2 - mp.mpf(j) / 2)
    b *= mp.pi ** (mp.mpf(m * (m - 1)) / 4)
    assert rel(a, complex(b)) < 1e-12
    assert rel(a, siegel_gamma(lam / 2, m).value) < 1e-12


def test_stiefel_volume_examples():
    assert stiefel_volume(3, 1) == pytest.approx(4 * math.pi, rel=1e-14)
    assert stiefel_volume(2, 2) == pytest.approx(4 * math.pi, rel=1e-14)
    for n in range(1, 11):
        for m in range(1, n + 1):
            assert rel(stiefel_volume(n, m), stiefel_volume_spheres(n, m)) < 1e-12
    with pytest.raises(InvalidDimensions):
        stiefel_volume(2, 3)


def rank_one_mu(lam, k, n, eps=mp.mpf("1e-25")):
    """Rank-one multiplier at lam + eps with 50-digit arithmetic."""
    with mp.workdps(50):
        x = mp.mpf(lam) + eps
        return (
            mp.gamma((x + 1) / 2) * mp.gamma((k - x) / 2) * mp.rgamma(-x / 2) * mp.rgamma((x + k + n) / 2)
        )


def rank_one_tag(lam, k, n):
    def polar(z):
        return z <= 0 and float(z).is_integer()

    top = polar((lam + 1) / 2) + polar((k - lam) / 2)
    bottom = polar(-lam / 2) + polar((lam + k + n) / 2)
    return "pole" if top > bottom else "zero" if top < bottom else "finite"


@pytest.mark.parametrize("n", [3, 5])
def test_rank_one_multiplier_grid(n):
    for lam, k in itertools.product(np.arange(-0.5, 9.5, 0.5), range(5)):
        tv = multiplier_mu([lam], k, n)
        assert tv.kind == rank_one_tag(lam, k, n), (lam, k)
        if tv.kind == "finite":
            ref = complex(rank_one_mu(lam, k, n))
            assert abs(tv.value - ref) <= 1e-12 * max(1.0, abs(ref)), (lam, k)


def test_multiplier_examples():
    assert multiplier_mu([0], 2, 3).kind == "zero"
    assert multiplier_mu([0], 2, 3).order == 1
    tv = multiplier_mu([1, 1], 2, 4)
    assert tv.kind == "finite"
    # two of the eight factors are polar and cancel; compare with the limit
    # along the diagonal direction in 50-digit arithmetic
    with mp.workdps(50):
        x = mp.mpf(1) + mp.mpf("1e-25")
        g = mp.gamma
        num = [(x + 2) / 2, (x + 1) / 2, (2 - x) / 2, (1 - x) / 2]
        den = [-x / 2, (-x - 1) / 2, (x + 6) / 2, (x + 5) / 2]
        direct = complex(mp.fprod(g(a) for a in num) / mp.fprod(g(a) for a in den))
    assert rel(tv.value, direct) < 1e-12


def test_multiplier_rejects_bad_arguments():
    with pytest.raises(ValueError):
        multiplier_mu([1.0], -1, 3)
    with pytest.raises(InvalidDimensions):
        multiplier_mu([1.0, 1.0], 2, 2)


@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("k", [0, 2, 4])
def test_constant_reduces_to_rank_one(n, k):
    expected = 2 * math.pi ** ((n - 1) / 2) * (-1) ** (k // 2)
    assert abs(multiplier_constant(n, 1, k) - expected) <= 1e-12 * abs(expected)


@pytest.mark.parametrize("n,m", [(3, 1), (4, 2), (5, 2), (6, 3)])
def test_degree_zero_eigenvalue_is_the_average(n, m):
    for lam in ([0.5] * m, [1.0 + 0.3j] * m, list(np.linspace(0.2, 1.7, m))):
        c_mu = multiplier_constant(n, m, 0) * multiplier_mu(lam, 0, n).value
        assert rel(c_mu, average_closed_form(n, m, lam).value) < 1e-10


@pytest.mark.parametrize("n,m", [(4, 2), (5, 2)])
def test_zero_set_on_integer_grid(n, m):
    for lam in itertools.product(range(-1, 6), repeat=m):
        if not in_L_set(lam):
            continue
        bound = max(lam[j - 1] + m - j for j in range(1, m + 1))
        for k in range(0, 13, 2):
            kind = multiplier_mu(lam, k, n).kind
            if uhh_condition(lam):
                assert kind != "zero", (lam, k)
            elif k > bound:
                assert kind == "zero", (lam, k)


def test_set_membership_examples():
    assert in_L_set([0, 0])
    assert not in_L_set([-2.5, 0])
    for m in range(1, 6):
        assert in_L_set(np.full(m, -0.99))
    # the open half-plane ends at the first polar point -3
    assert in_Lambda_set([-2.9], 3) and not in_Lambda_set([-3], 3)
    assert [l for l in range(-12, 3) if in_polar_set([l], 3)] == [-11, -9, -7, -5, -3]
    assert in_Lambda_set([50, 50], 4) and not in_polar_set([50, 50], 4)


def test_uhh_condition():
    assert uhh_condition([0.5, 0.5])
    assert not uhh_condition([1, 0])
    assert not uhh_condition([1, 1])
    assert uhh_condition([0, 1])


def test_classifier_examples():
    assert injectivity_classify([2], 3).injective is False
    assert injectivity_classify([2], 3).reason == RANK_ONE_RULE
    assert injectivity_classify([1], 3).injective is True
    v = injectivity_classify([1, 1], 4)
    assert v.injective is False and v.reason == RANK_GT_ONE_RULE
    v = injectivity_classify([0.5, 0.7], 5)
    assert v.injective is True and v.reason == STRICTLY_INSIDE_L
    v = injectivity_classify([1, 0], 4)
    assert v.injective is False and v.reason == VIOLATES_UHH
    assert 4 in v.zero_degrees
    v = injectivity_classify([-3, -3], 4)
    assert v.injective is None and v.reason == OUTSIDE_CONVERGENCE
    # criterion fails, but no annihilation witness is available when 2m > n
    assert injectivity_classify([1, 0], 3).injective is None
    with pytest.raises(InvalidDimensions):
        injectivity_classify([1, 1], 2)


def test_average_closed_form_examples():
    for n, m in [(3, 1), (4, 2), (6, 3)]:
        assert rel(average_closed_form(n, m, np.zeros(m)).value, stiefel_volume(n, m)) < 1e-12
    # m = 1: the mean of |v_1|^{2a} on S^{n-1}
    n, a = 5, 0.7
    ref = stiefel_volume(n, 1) * math.gamma(a + 0.5) * math.gamma(n / 2) / (math.sqrt(math.pi) * math.gamma(a + n / 2))
    assert rel(average_closed_form(n, 1, [2 * a]).value, ref) < 1e-12
