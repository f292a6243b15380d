import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemfd.spectra import (
    EigenEntry,
    EigenvalueList,
    check_spectral_bounds,
    dumps_spectrum,
    football_spectrum,
    legendre_shooting,
    loads_spectrum,
    oracle_spectrum,
    scalar_to_oneform_spectrum,
    shooting_eigenvalues,
)


def test_round_sphere():
    assert football_spectrum(2 * math.pi, 7).as_pairs() == [(0.0, 1), (2.0, 3), (6.0, 5)]


def test_football_pi():
    spec = football_spectrum(math.pi, 13)
    assert spec.as_pairs() == [(0.0, 1), (2.0, 1), (6.0, 3), (12.0, 3)]
    six = spec.entries[2]
    assert sorted(six.labels) == [(-1, 0), (0, 2), (1, 0)]


def test_labels_and_multiplicities_consistent():
    spec = football_spectrum(1.3, 40)
    spec.check_scalar()
    for e in spec.entries:
        assert e.multiplicity == len(e.labels)
        nonzero = sorted(n for n, _ in e.labels if n)
        assert nonzero == sorted(-n for n in nonzero)


@pytest.mark.parametrize("angle", [0.5, 1.0, math.pi, 5.0, 6.2])
def test_weiss_equality(angle):
    bounds = check_spectral_bounds(football_spectrum(angle, 10))
    assert bounds["weiss_ok"] and bounds["weiss_equality"] and bounds["oneform_gap_ok"]


def test_bounds_flag_small_gap():
    fake = EigenvalueList([EigenEntry(0.0, 1), EigenEntry(1.5, 2)])
    assert not check_spectral_bounds(fake)["weiss_ok"]


def test_shooting_examples():
    assert abs(legendre_shooting(1.0, 0, 2.0)) <= 1e-9
    assert abs(legendre_shooting(2.0, 1, 6.0)) <= 1e-9
    assert abs(legendre_shooting(2.0, 1, 5.0)) > 0.1


def test_shooting_domain():
    with pytest.raises(ValueError):
        legendre_shooting(0.5, 0, 1.0)


@settings(max_examples=4, deadline=None)
@given(st.floats(0.1, 2 * math.pi))
def test_closed_form_roots_are_shooting_roots(angle):
    gamma = 2 * math.pi / angle
    for e in football_spectrum(angle, 15).entries:
        for n, _ in e.labels:
            if n >= 0:
                assert abs(legendre_shooting(gamma, n, e.lam)) <= 1e-8


def test_oracle_finds_no_extra_roots():
    closed = football_spectrum(1.9 * math.pi, 15).expanded()
    oracle = oracle_spectrum(1.9 * math.pi, 15).expanded()
    assert len(closed) == len(oracle)
    assert np.max(np.abs(np.array(closed) - np.array(oracle))) <= 1e-8


def test_shooting_eigenvalues_for_one_block():
    roots = shooting_eigenvalues(1.5, 1, 20.0)
    expected = [(1.5 + k) * (2.5 + k) for k in range(4) if (1.5 + k) * (2.5 + k) <= 20]
    assert np.allclose(roots, expected, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 6.0), st.floats(0.01, 0.2), st.integers(1, 3), st.integers(0, 3))
def test_eigenvalue_monotone_in_angle(angle, step, n, k):
    def lam(a):
        nu = n * 2 * math.pi / a + k
        return nu * (nu + 1)

    lo = lam(angle)
    hi = lam(min(angle + step, 2 * math.pi))
    assert hi <= lo
    assert (0.0 < lo) and (0.0 < hi)


def test_oneform_spectrum():
    scalar = EigenvalueList([EigenEntry(0.0, 1), EigenEntry(2.0, 3)])
    assert scalar_to_oneform_spectrum(scalar).as_pairs() == [(2.0, 6)]
    assert scalar_to_oneform_spectrum(EigenvalueList([EigenEntry(0.0, 1)])).entries == []
    oneform = scalar_to_oneform_spectrum(football_spectrum(math.pi, 13))
    assert all(e.lam > 1 for e in oneform.entries)


def test_text_round_trip():
    spec = football_spectrum(2.2, 9)
    back = loads_spectrum(dumps_spectrum(spec, comment="football"))
    assert back.as_pairs() == spec.as_pairs()
    with pytest.raises(ValueError):
        loads_spectrum("1.0 2 3\n")
    with pytest.raises(ValueError):
        loads_spectrum("1.0 0\n")


def test_domain_errors():
    with pytest.raises(ValueError):
        football_spectrum(7.0, 5)
    with pytest.raises(ValueError):
        football_spectrum(1.0, 0)
