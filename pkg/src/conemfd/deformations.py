"""Standard-form deformation tensors near a singular edge and their L^2 behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .geom import ModelChart, check_kappa, cs, edge_metric, sn
from .tensors import ChartCalculus, TensorField

KINDS = ("length", "twist", "angle")

# bump support: f' lives on [EDGE_LENGTH/4, 3 EDGE_LENGTH/4]
EDGE_LENGTH = 1.0
PROBE_Y = 0.4
R2_MIN = 0.999
FLAT_FIT_RMS = 1e-3
BORDERLINE_TOL = 1e-3


class ClassificationError(ValueError):
    """The field does not follow a power law near the singular axis."""


def _raw_bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_mass() -> float:
    return quad(lambda t: float(_raw_bump(t)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-14)[0]


def bump_derivative(y, length: float = EDGE_LENGTH):
    """f'(y): smooth, supported in [length/4, 3 length/4], integral one."""
    half = length / 4.0
    t = (np.asarray(y, dtype=float) - length / 2.0) / half
    return _raw_bump(t) / (_bump_mass() * half)


def deformation_basis(kappa: int, kind: str, angle: float = 1.5 * math.pi) -> TensorField:
    """Infinitesimal standard-form deformation along an edge.

    length: cs^2 f'(y) dy^2,  twist: sn^2 f'(y) dy dtheta,  angle: sn^2 dtheta^2,
    with ``dy dtheta`` the symmetric product.
    """
    kappa = check_kappa(kappa)
    if kind not in KINDS:
        raise ValueError(f"unknown deformation kind {kind!r}")
    chart = edge_metric(kappa, angle, box=((1e-7, 1.0), (0.0, angle), (0.0, EDGE_LENGTH)))

    def fn(x):
        rho, y = x[:, 0], x[:, 2]
        out = np.zeros((x.shape[0], 3, 3))
        if kind == "length":
            out[:, 2, 2] = cs(kappa, rho) ** 2 * bump_derivative(y)
        elif kind == "twist":
            v = 0.5 * sn(kappa, rho) ** 2 * bump_derivative(y)
            out[:, 1, 2] = v
            out[:, 2, 1] = v
        else:
            out[:, 1, 1] = sn(kappa, rho) ** 2
        return out

    return TensorField(chart, 2, fn, provenance=f"gdot[{kind},kappa={kappa}]")


@dataclass(frozen=True)
class L2Classification:
    tensor_exponent: float
    derivative_exponent: float
    tensor_in_L2: bool
    derivative_in_L2: bool
    transverse_dim: int
    fit_quality: tuple[float, float]


def orthonormal_norm(chart: ModelChart, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Pointwise norm of a covariant tensor, all indices raised with g."""
    ginv = np.linalg.inv(chart.metric(x))
    rank = t.ndim - 1
    up = t
    for slot in range(rank):
        up = np.moveaxis(np.einsum("nij,nj...->ni...", ginv, np.moveaxis(up, slot + 1, 1)), 1, slot + 1)
    sq = np.sum((up * t).reshape(t.shape[0], -1), axis=1)
    return np.sqrt(np.maximum(sq, 0.0))


def fit_exponent(radii: np.ndarray, norms: np.ndarray) -> tuple[float, float, float]:
    """Slope of log|T| against log(radius); returns (slope, R^2, rms).

    A field that vanishes identically returns slope +inf.
    """
    scale = float(np.max(norms)) if norms.size else 0.0
    if scale == 0.0 or np.all(norms <= 1e-300):
        return math.inf, 1.0, 0.0
    if np.any(norms <= 0.0):
        raise ClassificationError("norm vanishes at some sample radii but not all")
    lx, ly = np.log(radii), np.log(norms)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    rms = math.sqrt(ss_res / len(ly))
    if r2 < R2_MIN and rms > FLAT_FIT_RMS:
        raise ClassificationError(f"not a power law near the axis (R^2={r2:.6f}, rms={rms:.2e})")
    return float(slope), r2, rms


def in_weighted_l2(exponent: float, transverse_dim: int) -> bool:
    """|T| ~ r^p is square integrable against r^(d-1) dr iff 2p + d - 1 > -1.

    The borderline case diverges logarithmically and counts as not in L^2;
    fitted exponents within ``BORDERLINE_TOL`` of it are treated as borderline.
    """
    if math.isinf(exponent) and exponent > 0:
        return True
    margin = 2.0 * exponent + transverse_dim
    return margin > 2.0 * BORDERLINE_TOL


def l2_classify(
    field: TensorField,
    decades: tuple[float, float] = (1e-4, 1e-2),
    npts: int = 21,
) -> L2Classification:
    """Fit leading exponents of |T| and |nabla T| near the singular axis."""
    chart = field.chart
    if chart.kind == "edge-neighborhood":
        d = 2
        theta = chart.angle / 3.0
        radii = np.geomspace(*decades, npts)
        x = np.column_stack([radii, np.full(npts, theta), np.full(npts, PROBE_Y)])
    elif chart.kind == "vertex-cone":
        d = 3
        radii = np.geomspace(*decades, npts)
        x = np.column_stack([radii, np.full(npts, 0.5), np.full(npts, chart.angle / 3.0)])
    else:
        raise ClassificationError("classification needs an edge or vertex chart")
    step = decades[0] * 1e-2
    calc = ChartCalculus(chart, h=step)
    t = field(x)
    nt = calc.covariant_derivative(field)(x)
    p, r2a, _ = fit_exponent(radii, orthonormal_norm(chart, x, t))
    q, r2b, _ = fit_exponent(radii, orthonormal_norm(chart, x, nt))
    return L2Classification(
        tensor_exponent=p,
        derivative_exponent=q,
        tensor_in_L2=in_weighted_l2(p, d),
        derivative_in_L2=in_weighted_l2(q, d),
        transverse_dim=d,
        fit_quality=(r2a, r2b),
    )


def zero_field(kappa: int = 0, angle: float = 1.5 * math.pi) -> TensorField:
    chart = edge_metric(kappa, angle, box=((1e-7, 1.0), (0.0, angle), (0.0, EDGE_LENGTH)))
    return TensorField(chart, 2, lambda x: np.zeros((x.shape[0], 3, 3)), provenance="0")
