import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conemfd.indicial import (
    ModeLabel,
    SpectralGapError,
    closedness_defect,
    critical_window,
    friedrichs_filter,
    mode_residual,
    report_residuals,
    roots_cone_oneform,
    roots_cone_scalar,
    roots_edge,
    roots_vertex,
)
from conemfd.spectra import football_spectrum


def _vals(report):
    return [round(v, 12) for v in report.values]


def _assert_all_residuals(report):
    for _, _, res in report_residuals(report):
        assert res <= 1e-9


def test_critical_windows():
    w2, w3 = critical_window(2), critical_window(3)
    assert (w2.lo, w2.hi) == (-1.0, 1.0)
    assert (w3.lo, w3.hi) == (-1.5, 0.5)
    assert not w2.in_l2(-1.0)
    assert w2.in_l2(-0.99)
    with pytest.raises(ValueError):
        critical_window(4)


def test_cone_scalar_examples():
    r = roots_cone_scalar(math.pi)
    assert _vals(r) == [0.0]
    assert r.roots[0].multiplicity == 2 and r.roots[0].has_log_partner
    wide = roots_cone_scalar(1.5 * math.pi, window=(-4, 4))
    g = 4.0 / 3.0
    # windows are (lo, hi], so 4 is in and -4 is out
    assert np.allclose(wide.values, [-2 * g, -g, 0.0, g, 2 * g, 3 * g])
    assert wide.root_at(0.0).multiplicity == 2
    _assert_all_residuals(wide)
    assert roots_cone_scalar(1.0, window=(0.3, 0.3)).roots == ()


@given(st.floats(0.2, 6.2))
def test_cone_scalar_symmetric(angle):
    r = roots_cone_scalar(angle, window=(-5, 5))
    vals = sorted(r.values)
    assert np.allclose(vals, sorted(-v for v in vals))


def test_cone_oneform_critical_roots():
    r = roots_cone_oneform(1.5 * math.pi)
    minus, plus = r.root_at(-1 / 3), r.root_at(1 / 3)
    assert {m.describe() for m in minus.modes} == {"[eta++,n=-1]", "[eta--,n=1]"}
    assert {m.describe() for m in plus.modes} == {"[eta-+,n=1]", "[eta+-,n=-1]"}
    assert [e.value for e in r.endpoint_roots] == [1.0]
    _assert_all_residuals(r)


def test_cone_oneform_small_angle_has_no_critical_pair():
    r = roots_cone_oneform(math.pi / 2)
    assert all("critical" not in root.note for root in r.roots)


def test_cone_oneform_conjugation_symmetry():
    r = roots_cone_oneform(2.0, window=(-6, 6))
    flip = {"eta++": "eta--", "eta--": "eta++", "eta+-": "eta-+", "eta-+": "eta+-"}
    for root in r.roots:
        labels = {(m.polarization, m.n) for m in root.modes}
        assert {(flip[p], -n) for p, n in labels} == labels


def test_critical_pair_degenerates_near_full_angle():
    r = roots_cone_oneform(2 * math.pi - 1e-6)
    near = [root for root in r.roots if abs(root.value) < 1e-5]
    assert len(near) == 2
    assert all("critical" in root.note for root in near)


def test_edge_examples():
    r = roots_edge(1.5 * math.pi)
    assert np.allclose(r.values, [-1 / 3, 0.0, 1 / 3])
    zero = r.root_at(0.0)
    assert {m.describe() for m in zero.modes} == {"[dy,n=0]", "[dy,n=0,log]"}
    _assert_all_residuals(r)
    assert _vals(roots_edge(2 * math.pi / 3)) == [0.0]
    full = roots_edge(math.pi, window=(-2.5, 3.5))
    assert np.allclose(full.values, [-2, -1, 0, 1, 2, 3])
    _assert_all_residuals(full)


def test_edge_friedrichs_filter():
    f = friedrichs_filter(roots_edge(1.5 * math.pi))
    assert np.allclose(f.values, [0.0, 1 / 3])
    assert [m.describe() for m in f.root_at(0.0).modes] == ["[dy,n=0]"]
    assert {m.describe() for m in f.root_at(1 / 3).modes} == {"[eta-+,n=1]", "[eta+-,n=-1]"}
    assert friedrichs_filter(f).values == f.values
    assert friedrichs_filter(roots_cone_scalar(1.0, window=(0.3, 0.3))).roots == ()


def test_vertex_spectrum_two():
    r = roots_vertex([0.0, 2.0])
    assert r.groups() == {"A": [0.0], "B": [-1.0]}
    everything = sorted(r.values + [e.value for e in r.endpoint_roots])
    assert np.allclose(everything, [-3, -2, -1, 0, 1, 2])
    coexact = sorted(v.value for v in r.roots if any(m.polarization == "coexact" for m in v.modes))
    assert coexact == [-2.0, 1.0]
    assert friedrichs_filter(r).values == [0.0]
    _assert_all_residuals(r)


def test_vertex_group_values():
    r = roots_vertex([0.0, 2.75])
    assert r.groups()["A"][0] == pytest.approx(-1.5 + 0.5 * math.sqrt(12), abs=1e-12)
    assert r.groups()["B"][0] == pytest.approx(0.5 - 0.5 * math.sqrt(12), abs=1e-12)
    assert r.groups()["A"][0] == pytest.approx(0.2320508, abs=1e-7)
    assert roots_vertex([0.0, 3.9]).groups() == {"A": [], "B": []}


@given(st.floats(1.0001, 3.7499))
def test_vertex_grouping_property(lam):
    g = roots_vertex([0.0, lam]).groups()
    assert len(g["A"]) == 1 and -0.5 < g["A"][0] < 0.5
    assert len(g["B"]) == 1 and -1.5 < g["B"][0] < -0.5


@given(st.floats(1.0, 1e4))
def test_closedness_certificate(lam):
    assert abs(closedness_defect(lam)) <= 1e-12 * max(1.0, lam)


def test_vertex_rejects_gap_violation():
    with pytest.raises(SpectralGapError):
        roots_vertex([0.0, 0.8])


def test_vertex_from_football():
    r = roots_vertex(football_spectrum(2.0, 4.0))
    _assert_all_residuals(r)


def test_mode_residual_examples():
    assert mode_residual("cone-scalar", math.pi, 2.0, ModeLabel("scalar", 1)) <= 1e-10
    assert mode_residual("cone-scalar", math.pi, 1.9, ModeLabel("scalar", 1)) > 0.01
    s = 3.0
    eta_plus = ModeLabel("coupled-A", lam=2.0, vector=(2 * math.sqrt(2), 1 + s))
    assert mode_residual("vertex", None, 0.0, eta_plus) <= 1e-9
