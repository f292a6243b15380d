import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conemfd.geom import DomainError, cs, cs_prime, edge_metric, sn, sn_prime, space_form_box, vertex_metric


def test_sn_cs_examples():
    assert sn(0, 2.5) == 2.5
    assert cs(-1, 0.0) == 1.0
    assert sn(-1, 0.0) == 0.0
    assert cs(1, math.pi / 2) == pytest.approx(0.0, abs=1e-16)


def test_kappa_must_be_a_space_form():
    with pytest.raises(DomainError):
        sn(2, 1.0)
    with pytest.raises(DomainError):
        cs(True, 1.0)


@given(st.sampled_from([-1, 0, 1]), st.floats(-5.0, 5.0))
def test_pythagorean_identity(kappa, r):
    assert cs(kappa, r) ** 2 + kappa * sn(kappa, r) ** 2 == pytest.approx(1.0, abs=1e-12 * math.cosh(r) ** 2)


@pytest.mark.parametrize("kappa", [-1, 0, 1])
def test_derivatives_second_order(kappa):
    r = np.linspace(-2.0, 2.0, 9)
    errs = []
    for h in (1e-2, 5e-3):
        d_sn = (sn(kappa, r + h) - sn(kappa, r - h)) / (2 * h)
        d_cs = (cs(kappa, r + h) - cs(kappa, r - h)) / (2 * h)
        errs.append(max(np.max(np.abs(d_sn - sn_prime(kappa, r))), np.max(np.abs(d_cs - cs_prime(kappa, r)))))
    if kappa == 0:
        # sn and cs are polynomials of degree <= 1; only rounding remains
        assert max(errs) < 1e-10
        return
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)


def test_edge_metric_examples():
    flat = edge_metric(0, 1.5 * math.pi)
    x = np.array([[0.7, 0.3, 0.2]])
    assert np.allclose(flat.metric(x)[0], np.diag([1.0, 0.49, 1.0]))
    hyp = edge_metric(-1, 1.5 * math.pi)
    g = hyp.metric(np.array([[1.0, 0.1, 0.0]]))[0]
    assert np.allclose(g, np.diag([1.0, math.sinh(1.0) ** 2, math.cosh(1.0) ** 2]), rtol=1e-14)
    with pytest.raises(DomainError):
        edge_metric(0, 3 * math.pi)


def test_vertex_metric_examples():
    ch = vertex_metric(1, [2.0, 2.5, 3.0])
    assert np.allclose(ch.metric(np.array([[math.pi / 2, math.pi / 2, 0.1]]))[0], np.eye(3))
    flat = vertex_metric(0, [2.0, 2.5, 3.0])
    r, s = 0.6, 0.8
    g = flat.metric(np.array([[r, s, 0.2]]))[0]
    assert np.allclose(g, np.diag([1.0, r * r, (r * math.sin(s)) ** 2]))
    with pytest.raises(DomainError):
        flat.metric(np.array([[0.0, 0.5, 0.1]]))
    with pytest.raises(DomainError):
        vertex_metric(0, [2.0, 2 * math.pi])


@pytest.mark.parametrize(
    "chart",
    [edge_metric(-1, 2.0), edge_metric(1, 5.0), vertex_metric(-1, [1.0, 2.0, 3.0]), space_form_box(-1, ((-1, 1), (-1, 1), (0.5, 2))), space_form_box(1)],
    ids=["edge-hyp", "edge-sph", "vertex-hyp", "halfspace", "stereo"],
)
def test_metric_is_spd_and_matches_coframe(chart):
    rng = np.random.default_rng(3)
    lo = np.array([b[0] for b in chart.box])
    hi = np.array([b[1] for b in chart.box])
    x = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), size=(20, 3))
    g = chart.metric(x)
    e = chart.coframe(x)
    assert np.allclose(g, np.swapaxes(g, 1, 2))
    assert np.all(np.linalg.eigvalsh(g) > 0)
    assert np.max(np.abs(g - np.einsum("nai,naj->nij", e, e))) <= 1e-12


def test_log_radial_sample_grid():
    grid = edge_metric(0, 1.0).sample_grid((5, 2, 2), log_radial=True)
    rho = grid[:, 0, 0, 0]
    assert np.allclose(np.diff(np.log(rho)), np.log(rho[1] / rho[0]))
