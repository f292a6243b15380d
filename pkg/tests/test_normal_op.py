import math

import numpy as np
import pytest

from conemfd.bessel import bessel_i
from conemfd.normal_op import (
    AccuracyError,
    RadialGrid,
    edge_mode_basis,
    gaussian_bump,
    green_apply,
    injectivity_scan,
    mode_system_residual,
    radial_grid,
    weighted_membership,
)


@pytest.fixture(scope="module")
def grid():
    return radial_grid()


def test_first_mode_line():
    sols = edge_mode_basis(1, 4.0 / 3.0, 1.0)
    rho = np.array([0.3, 1.0, 2.0])
    f, g, h = sols[0].components(rho)
    i13 = bessel_i(1.0 / 3.0, rho)
    assert np.allclose(f, i13) and np.allclose(g, 1j * i13) and np.allclose(h, 0)


def test_n_zero_decouples():
    labels = [s.label.split("[")[1].rstrip("]") for s in edge_mode_basis(0, 1.2, 1.0)]
    assert labels == ["f:I1", "f:K1", "g:I1", "g:K1", "h:I0", "h:K0"]


def test_xi_zero_gives_powers():
    gamma = 1.5
    exps = sorted(round(s.exponent_at_zero, 12) for s in edge_mode_basis(1, gamma, 0.0))
    expected = sorted(round(e, 12) for e in (gamma - 1, 1 - gamma, gamma + 1, -gamma - 1, gamma, -gamma))
    assert exps == expected


@pytest.mark.parametrize("n", [-2, 0, 1, 3])
def test_modes_solve_the_system(n):
    rho = np.linspace(0.3, 3.0, 7)
    for sol in edge_mode_basis(n, 1.3, 0.8):
        r1 = mode_system_residual(sol, rho, 1e-2)
        r2 = mode_system_residual(sol, rho, 5e-3)
        assert r2 < 1e-4
        if r1 > 1e-10:
            assert math.log2(r1 / r2) > 1.8


def test_membership_examples():
    k0 = edge_mode_basis(0, 1.2, 1.0)[5]
    assert weighted_membership(k0, 0.5)
    assert not weighted_membership(k0, 1.0)
    for n in (-1, 0, 2):
        for sol in edge_mode_basis(n, 1.2, 1.0):
            if ":I" in sol.label:
                assert not weighted_membership(sol, 0.5)


def test_green_zero_source(grid):
    res = green_apply(np.zeros_like(grid.nodes), grid, 1.0)
    assert np.all(res.u == 0) and res.log_coeff == 0 and res.const_coeff == 0


def test_green_bump(grid):
    f = gaussian_bump(grid, 1.0, 0.1)
    res = green_apply(f, grid, 1.0)
    assert res.residual <= 1e-6
    assert abs(res.log_coeff) <= 1e-6 * res.f_norm
    assert res.const_coeff == pytest.approx(res.kernel_constant, rel=1e-5)


def test_green_inner_region_is_i0_profile(grid):
    # inside the support gap u is exactly a multiple of I0, tending to const_coeff
    f = np.where((grid.nodes > 0.9) & (grid.nodes < 1.1), np.cos((grid.nodes - 1) * math.pi / 0.2) ** 2, 0.0)
    res = green_apply(f, grid, 1.0)
    inner = grid.nodes < 0.5
    ratio = res.u[inner] / bessel_i(0.0, grid.nodes[inner])
    assert np.ptp(ratio) <= 1e-4 * abs(ratio.mean())
    assert ratio.mean() == pytest.approx(res.const_coeff, rel=1e-4)


def test_green_linearity(grid):
    rng = np.random.default_rng(0)
    a = gaussian_bump(grid, 1.0, 0.1) * rng.normal()
    b = gaussian_bump(grid, 2.0, 0.2) * rng.normal()
    ua, ub = green_apply(a, grid, 1.0).u, green_apply(b, grid, 1.0).u
    uab = green_apply(a + b, grid, 1.0).u
    assert np.max(np.abs(uab - ua - ub)) <= 1e-10 * np.max(np.abs(uab))


def test_green_scaling_covariance():
    lam = 2.0
    g1 = radial_grid(rho_min=5e-5, rho_max=40.0)
    g2 = RadialGrid(g1.nodes * lam, g1.weights * lam**2)
    u1 = green_apply(gaussian_bump(g1, 1.0, 0.1), g1, 1.0).u
    # f(rho/lam) on the dilated grid with xi/lam gives lam^2 u(rho/lam)
    u2 = green_apply(gaussian_bump(g2, lam, 0.1 * lam), g2, 1.0 / lam).u
    assert np.allclose(u2, lam**2 * u1, rtol=1e-8, atol=1e-12)


def test_green_errors(grid):
    f = gaussian_bump(grid)
    with pytest.raises(ValueError):
        green_apply(f, grid, 0.0)
    with pytest.raises(ValueError):
        green_apply(np.ones_like(grid.nodes), grid, 1.0)
    coarse = radial_grid(npts=2001)
    with pytest.raises(AccuracyError):
        green_apply(gaussian_bump(coarse, 1.0, 0.02), coarse, 1.0)


def test_grid_coverage():
    with pytest.raises(ValueError):
        radial_grid(rho_max=10.0)


def test_injectivity_examples():
    scan = injectivity_scan(1.2, [1.25, 0.5], 3, [0.5, 1.0])
    assert scan.verdicts[1.25] == "injective"
    assert scan.verdicts[0.5] == "kernel"
    members = {(r["n"], r["mode"]) for r in scan.members(0.5)}
    assert (0, "c6[h:K0]") in members
    assert members <= {(0, "c6[h:K0]"), (1, "c2[fg+:K]"), (-1, "c4[fg-:K]")}
    wide = injectivity_scan(3.0, [0.5], 3, [1.0])
    assert {r["mode"] for r in wide.members(0.5)} == {"c6[h:K0]"}
    header = scan.to_csv().splitlines()[0]
    assert header.split(",")[:5] == ["n", "xi", "delta", "member", "exponent_at_zero"]
