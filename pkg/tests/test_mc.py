import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from compcos.mc import McEstimate, RngStream, combined_stderr, monte_carlo, split_counts


def normal_draw(gen, size):
    return gen.standard_normal(size) + 2.0


def test_same_stream_reproduces():
    a = monte_carlo(normal_draw, 10_000, RngStream(7, 3), partitions=4)
    b = monte_carlo(normal_draw, 10_000, RngStream(7, 3), partitions=4)
    assert a == b


def test_threads_do_not_change_the_result():
    a = monte_carlo(normal_draw, 40_000, RngStream(7, 3), partitions=4, chunk=1000)
    b = monte_carlo(normal_draw, 40_000, RngStream(7, 3), partitions=4, chunk=1000, workers=4)
    assert a == b


def test_children_are_distinct_streams():
    s = RngStream(1, 2)
    draws = {tuple(s.child(i).generator().integers(0, 2**62, 4)) for i in range(20)}
    assert len(draws) == 20


def test_estimate_and_stderr():
    est = monte_carlo(normal_draw, 100_000, RngStream(0, 0))
    assert abs(est.value - 2.0) <= 3 * est.stderr
    assert est.stderr == pytest.approx(1 / math.sqrt(100_000), rel=0.02)


def test_complex_stderr_is_componentwise_max():
    est = monte_carlo(lambda g, n: g.standard_normal(n) + 3j * g.standard_normal(n), 100_000, RngStream(0, 1))
    assert est.stderr == pytest.approx(3 / math.sqrt(100_000), rel=0.02)


def test_non_finite_values_are_skipped():
    def draw(gen, size):
        x = np.ones(size)
        x[::10] = np.nan
        return x

    est = monte_carlo(draw, 1000, RngStream(0, 2))
    assert est.value == 1 and est.skipped == 100 and est.skipped_fraction == 0.1


@given(st.integers(1, 10_000), st.integers(1, 16))
def test_split_counts(samples, partitions):
    counts = split_counts(samples, partitions)
    assert sum(counts) == samples and max(counts) - min(counts) <= 1


def test_argument_checks():
    with pytest.raises(ValueError):
        monte_carlo(normal_draw, 1, RngStream(0, 0))
    with pytest.raises(ValueError):
        monte_carlo(normal_draw, 10, RngStream(0, 0), partitions=0)


def test_helpers():
    e = McEstimate(2 + 1j, 0.5, 10)
    assert e.scaled(-2j).value == (2 + 1j) * -2j and e.scaled(-2j).stderr == 1.0
    assert combined_stderr(McEstimate(0, 3, 2), McEstimate(0, 4, 2)) == 5
    assert e.to_dict()["value_im"] == 1.0
