import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coe.errors import DomainError
from coe.measures import ModeMeasures, capacity, capacity_u, entropy, mode_measures, renyi2

LN2 = math.log(2)


def test_maximally_mixed():
    m = mode_measures(0.0)
    assert (m.coe, m.ee, m.renyi2) == (0.0, pytest.approx(LN2), pytest.approx(LN2))


@pytest.mark.parametrize("x", [1.0, -1.0])
def test_pure(x):
    assert mode_measures(x) == ModeMeasures(0.0, 0.0, 0.0)


def test_half():
    expected = 0.25 * 0.75 * math.log(3) ** 2
    assert capacity(0.5) == pytest.approx(expected, abs=1e-15)
    assert capacity_u(0.75) == pytest.approx(expected, abs=1e-15)


def test_domain():
    with pytest.raises(DomainError):
        mode_measures(1.0001)
    with pytest.raises(DomainError):
        capacity(np.array([0.2, np.nan]))
    with pytest.raises(DomainError):
        capacity_u(-0.1)
    with pytest.raises(DomainError):
        mode_measures(np.array([0.1, 0.2]))


def test_vectorized_matches_scalar():
    xs = np.linspace(-1, 1, 41)
    np.testing.assert_array_equal(capacity(xs), [capacity(float(x)) for x in xs])


@settings(max_examples=200, deadline=None)
@given(st.floats(-1.0, 1.0))
def test_invariants(x):
    m = mode_measures(x)
    assert m.coe >= 0
    assert m.ee >= m.renyi2 - 1e-15 >= -1e-15
    assert m.coe == pytest.approx(capacity_u((1 + x) / 2), abs=1e-12)
    assert m == mode_measures(-x) or (m.coe, m.ee, m.renyi2) == pytest.approx((capacity(-x), entropy(-x), renyi2(-x)), abs=1e-15)
