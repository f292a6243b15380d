r"""Edge normal operator of the rough Laplacian on one-forms, mode by mode.

A one-form ``f d rho + g rho d theta + h dy`` with Fourier dependence
``e^{i n gamma theta} e^{i xi y}`` solves the normal equation iff

    (-(rho d_rho)^2 + n^2 gamma^2 + 1 + rho^2 xi^2) f + 2 i n gamma g = 0
    (-(rho d_rho)^2 + n^2 gamma^2 + 1 + rho^2 xi^2) g - 2 i n gamma f = 0
    (-(rho d_rho)^2 + n^2 gamma^2 + rho^2 xi^2) h = 0.

The pairs ``g = +i f`` and ``g = -i f`` decouple the first two equations into
modified Bessel equations of orders ``|n gamma - 1|`` and ``|n gamma + 1|``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .bessel import bessel_ik

# radial function kinds; at xi = 0 the Bessel pair degenerates to powers
RADIAL_KINDS = ("I", "K", "grow", "decay")


class AccuracyError(ArithmeticError):
    """The radial grid cannot resolve the requested solve."""


@dataclass(frozen=True)
class RadialFunction:
    """One of I_nu(rho|xi|), K_nu(rho|xi|), rho^nu, rho^-nu (log rho when nu = 0)."""

    kind: str
    order: float
    xi: float

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.kind == "I":
            return np.asarray(bessel_ik(self.order, rho * abs(self.xi))[0])
        if self.kind == "K":
            return np.asarray(bessel_ik(self.order, rho * abs(self.xi))[1])
        if self.kind == "grow":
            return rho**self.order
        if self.order == 0:
            return np.log(rho)
        return rho ** (-self.order)

    @property
    def has_log(self) -> bool:
        return self.kind in ("K", "decay") and self.order == 0

    @property
    def exponent_at_zero(self) -> float:
        """Leading power at rho -> 0; a bare log counts as exponent 0."""
        if self.kind in ("I", "grow"):
            return self.order
        return -self.order

    def in_weighted_l2_at_zero(self, delta: float) -> bool:
        # rho^-delta rho^mu in L^2(rho d rho) near 0 iff mu > delta - 1; log is rho^{0-}
        mu = self.exponent_at_zero
        return mu > delta - 1.0

    def in_weighted_l2_at_infinity(self, delta: float) -> bool:
        if self.kind == "I":
            return False
        if self.kind == "K":
            return True
        if self.kind == "grow":
            return self.order - delta < -1.0
        if self.order == 0:
            return delta > 1.0
        return -self.order - delta < -1.0


@dataclass(frozen=True)
class EdgeModeSolution:
    """One fundamental solution ``(f, g, h)`` of the mode equations.

    ``terms`` lists ``(component, weight, radial function)``; components are
    0 = f (d rho), 1 = g (rho d theta), 2 = h (dy).
    """

    n: int
    gamma: float
    xi: float
    coefficients: tuple[complex, ...]
    terms: tuple[tuple[int, complex, RadialFunction], ...] = field(repr=False)
    label: str = ""

    def components(self, rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rho = np.asarray(rho, dtype=float)
        out = [np.zeros(rho.shape, dtype=complex) for _ in range(3)]
        for comp, weight, fn in self.terms:
            out[comp] = out[comp] + weight * fn(rho)
        return out[0], out[1], out[2]

    @property
    def radial(self) -> RadialFunction:
        return self.terms[0][2]

    @property
    def exponent_at_zero(self) -> float:
        return min(t[2].exponent_at_zero for t in self.terms)

    @property
    def has_log(self) -> bool:
        return any(t[2].has_log for t in self.terms)


def _radial_pair(order: float, xi: float) -> tuple[RadialFunction, RadialFunction]:
    if xi == 0:
        return RadialFunction("grow", order, 0.0), RadialFunction("decay", order, 0.0)
    return RadialFunction("I", order, xi), RadialFunction("K", order, xi)


def edge_mode_basis(n: int, gamma: float, xi: float) -> list[EdgeModeSolution]:
    """Six fundamental solutions, ordered like the coefficients c^1 ... c^6."""
    if gamma < 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    n = int(n)
    if n == 0:
        r1 = _radial_pair(1.0, xi)
        r0 = _radial_pair(0.0, xi)
        layout = [
            ((0, 1.0),), ((0, 1.0),),
            ((1, 1.0),), ((1, 1.0),),
            ((2, 1.0),), ((2, 1.0),),
        ]
        radials = [r1[0], r1[1], r1[0], r1[1], r0[0], r0[1]]
        names = ["f:I1", "f:K1", "g:I1", "g:K1", "h:I0", "h:K0"]
    else:
        minus = _radial_pair(abs(n * gamma - 1.0), xi)
        plus = _radial_pair(abs(n * gamma + 1.0), xi)
        mid = _radial_pair(abs(n) * gamma, xi)
        layout = [
            ((0, 1.0), (1, 1j)), ((0, 1.0), (1, 1j)),
            ((0, 1.0), (1, -1j)), ((0, 1.0), (1, -1j)),
            ((2, 1.0),), ((2, 1.0),),
        ]
        radials = [minus[0], minus[1], plus[0], plus[1], mid[0], mid[1]]
        names = ["fg+:I", "fg+:K", "fg-:I", "fg-:K", "h:I", "h:K"]
    basis = []
    for j in range(6):
        coeffs = tuple(1.0 + 0j if i == j else 0j for i in range(6))
        terms = tuple((comp, complex(w), radials[j]) for comp, w in layout[j])
        basis.append(
            EdgeModeSolution(n, float(gamma), float(xi), coeffs, terms, label=f"c{j + 1}[{names[j]}]")
        )
    return basis


def mode_system_residual(sol: EdgeModeSolution, rho: np.ndarray, h: float = 1e-3) -> float:
    """Max residual of the mode equations, with (rho d_rho)^2 by central differences in log rho.

    Scaled by the size of the terms so that exact solutions give O(h^2).
    """
    rho = np.asarray(rho, dtype=float)
    t = np.log(rho)
    n, gamma, xi = sol.n, sol.gamma, sol.xi
    c0 = sol.components(rho)
    cp = sol.components(np.exp(t + h))
    cm = sol.components(np.exp(t - h))
    euler = [(p - 2 * c + m) / h**2 for p, c, m in zip(cp, c0, cm)]
    f, g, hh = c0
    base = n**2 * gamma**2 + rho**2 * xi**2
    r1 = -euler[0] + (base + 1) * f + 2j * n * gamma * g
    r2 = -euler[1] + (base + 1) * g - 2j * n * gamma * f
    r3 = -euler[2] + base * hh
    scale = max(float(np.max(np.abs(np.concatenate([e for e in euler] + [(base + 1) * np.abs(x) for x in c0])))), 1e-300)
    return float(max(np.max(np.abs(r)) for r in (r1, r2, r3)) / scale)


def weighted_membership(sol: EdgeModeSolution, delta: float) -> bool:
    """Whether the solution lies in rho^delta L^2(rho d rho) on all of (0, infinity)."""
    return all(
        fn.in_weighted_l2_at_zero(delta) and fn.in_weighted_l2_at_infinity(delta)
        for _, _, fn in sol.terms
    )


# ---------------------------------------------------------------- Green solve


@dataclass(frozen=True)
class RadialGrid:
    """Log-spaced grid with Simpson weights for the measure rho d rho."""

    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = self.nodes
        if nodes.ndim != 1 or nodes.size < 5 or np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing positive reals")
        if nodes[0] > 1e-4 or nodes[-1] < 30.0:
            raise ValueError("grid must cover [1e-4, 30]")

    @property
    def log_step(self) -> float:
        return float(np.log(self.nodes[1] / self.nodes[0]))

    def norm(self, values) -> float:
        return math.sqrt(float(np.sum(self.weights * np.abs(values) ** 2)))


def radial_grid(rho_min: float = 1e-4, rho_max: float = 40.0, npts: int = 6001) -> RadialGrid:
    if npts % 2 == 0:
        npts += 1
    nodes = np.geomspace(rho_min, rho_max, npts)
    dt = math.log(rho_max / rho_min) / (npts - 1)
    simpson = np.ones(npts)
    simpson[1:-1:2] = 4.0
    simpson[2:-1:2] = 2.0
    # rho d rho = rho^2 dt
    weights = simpson * dt / 3.0 * nodes**2
    return RadialGrid(nodes, weights)


@dataclass(frozen=True)
class GreenResult:
    u: np.ndarray
    residual: float
    log_coeff: float
    const_coeff: float
    kernel_constant: float
    f_norm: float


def _cumulative_integral(g: np.ndarray, dt: float) -> np.ndarray:
    """int_{t_0}^{t_i} g dt by trapezoid plus Euler-Maclaurin end corrections.

    Unlike cumulative Simpson, the error is a smooth function of t_i, so
    finite-difference residual checks of the result see O(dt^4) rather
    than an O(dt^2) odd/even ripple.
    """
    d1 = np.gradient(g, dt, edge_order=2)
    d3 = np.gradient(np.gradient(d1, dt, edge_order=2), dt, edge_order=2)
    out = cumulative_trapezoid(g, dx=dt, initial=0.0)
    out -= dt**2 / 12.0 * (d1 - d1[0])
    out += dt**4 / 720.0 * (d3 - d3[0])
    return out


def _second_log_derivative(u: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order central second difference on interior nodes 2..n-3."""
    return (-u[4:] + 16 * u[3:-1] - 30 * u[2:-2] + 16 * u[1:-3] - u[:-4]) / (12 * dt * dt)


def apply_normal_h(u: np.ndarray, grid: RadialGrid, xi: float) -> np.ndarray:
    """-(u'' + u'/rho) + xi^2 u on interior nodes (two dropped at each end)."""
    rho = grid.nodes[2:-2]
    return -_second_log_derivative(u, grid.log_step) / rho**2 + xi**2 * u[2:-2]


def green_apply(f, grid: RadialGrid, xi: float, resolution: float = 0.05) -> GreenResult:
    """Tempered solution of -(u'' + u'/rho) + xi^2 u = f for the n = 0 dy-mode.

    u = I0 * int_rho^inf K0 f rho' d rho' + K0 * int_0^rho I0 f rho' d rho'.
    """
    if xi == 0:
        raise ValueError("xi = 0 is the indicial regime; green_apply needs xi != 0")
    f = np.asarray(f, dtype=float)
    rho = grid.nodes
    if f.shape != rho.shape:
        raise ValueError("samples must match the grid")
    fmax = float(np.max(np.abs(f)))
    if fmax == 0.0:
        z = np.zeros_like(f)
        return GreenResult(z, 0.0, 0.0, 0.0, 0.0, 0.0)
    if max(abs(f[0]), abs(f[-1])) > 1e-12 * fmax:
        raise ValueError("f is not compactly supported inside the grid")
    if float(np.max(np.abs(np.diff(f)))) > resolution * fmax:
        raise AccuracyError("grid does not resolve the source; increase npts")

    x = rho * abs(xi)
    i0, k0, _, _ = bessel_ik(np.zeros_like(x), x)
    dt = grid.log_step
    jac = rho**2  # rho d rho = rho^2 dt
    inner = _cumulative_integral(i0 * f * jac, dt)
    # integrate the tail from the right so it is exactly zero past the support
    tail = -_cumulative_integral((k0 * f * jac)[::-1], -dt)[::-1]
    u = i0 * tail + k0 * inner

    f_norm = grid.norm(f)
    res = apply_normal_h(u, grid, xi) - f[2:-2]
    interior = RadialGrid.__new__(RadialGrid)
    object.__setattr__(interior, "nodes", rho[2:-2])
    object.__setattr__(interior, "weights", grid.weights[2:-2])
    residual = interior.norm(res) / f_norm

    sel = rho <= 10.0 * rho[0]
    design = np.column_stack([np.ones(int(sel.sum())), np.log(rho[sel])])
    (const, logc), *_ = np.linalg.lstsq(design, u[sel], rcond=None)
    return GreenResult(
        u=u,
        residual=float(residual),
        log_coeff=float(logc),
        const_coeff=float(const),
        kernel_constant=float(tail[0]),
        f_norm=f_norm,
    )


def gaussian_bump(grid: RadialGrid, center: float = 1.0, width: float = 0.1) -> np.ndarray:
    """exp(-(rho - c)^2 / (2 w^2)), cut to exact zero where it drops below 1e-300."""
    z = (grid.nodes - center) / width
    out = np.exp(-0.5 * z * z)
    out[out < 1e-300] = 0.0
    return out


# ---------------------------------------------------------- injectivity scan

SCAN_COLUMNS = ("n", "xi", "delta", "member", "exponent_at_zero", "mode")


@dataclass
class InjectivityScan:
    gamma: float
    rows: list[dict]
    verdicts: dict[float, str]

    def members(self, delta: float) -> list[dict]:
        return [r for r in self.rows if r["delta"] == delta and r["member"]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SCAN_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [r["n"], format(r["xi"], ".17g"), format(r["delta"], ".17g"), int(r["member"]),
                 format(r["exponent_at_zero"], ".17g"), r["mode"]]
            )
        return buf.getvalue()


def injectivity_scan(gamma: float, deltas, n_max: int, xis) -> InjectivityScan:
    """Tabulate which basis modes lie in rho^delta L^2; injective iff none do."""
    if gamma <= 1.0:
        raise ValueError("injectivity scan needs gamma > 1")
    rows = []
    verdicts = {}
    for delta in deltas:
        delta = float(delta)
        found = False
        for n in range(-n_max, n_max + 1):
            for xi in xis:
                for sol in edge_mode_basis(n, gamma, float(xi)):
                    member = weighted_membership(sol, delta)
                    found |= member
                    rows.append(
                        {
                            "n": n,
                            "xi": float(xi),
                            "delta": delta,
                            "member": member,
                            "exponent_at_zero": sol.exponent_at_zero,
                            "mode": sol.label,
                        }
                    )
        verdicts[delta] = "kernel" if found else "injective"
    return InjectivityScan(float(gamma), rows, verdicts)
