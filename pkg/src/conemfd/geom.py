"""Curvature-parametrized trigonometry and the model metrics near singular strata.

Three space forms are supported, indexed by the sectional curvature
``kappa`` in {-1, 0, +1}.  The charts here are the local normal forms of a
cone-manifold metric:

* edge neighbourhood, coordinates ``(rho, theta, y)``::

      d rho^2 + sn(rho)^2 d theta^2 + cs(rho)^2 dy^2

* vertex cone near one cone point of the link, coordinates ``(r, s, theta)``::

      dr^2 + sn(r)^2 (ds^2 + sin(s)^2 d theta^2)

* a coordinate box in the smooth space form (flat Cartesian for kappa = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

CURVATURES = (-1, 0, 1)


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a model operation."""


def check_kappa(kappa: int) -> int:
    if isinstance(kappa, bool) or kappa not in CURVATURES:
        raise DomainError(f"curvature must be one of {CURVATURES}, got {kappa!r}")
    return int(kappa)


def sn(kappa: int, r):
    """Solution of f'' + kappa f = 0 with f(0) = 0, f'(0) = 1."""
    kappa = check_kappa(kappa)
    r = np.asarray(r, dtype=float) if not np.isscalar(r) else float(r)
    if kappa == 1:
        return np.sin(r)
    if kappa == -1:
        return np.sinh(r)
    return r * 1.0


def cs(kappa: int, r):
    """Solution of f'' + kappa f = 0 with f(0) = 1, f'(0) = 0."""
    kappa = check_kappa(kappa)
    r = np.asarray(r, dtype=float) if not np.isscalar(r) else float(r)
    if kappa == 1:
        return np.cos(r)
    if kappa == -1:
        return np.cosh(r)
    return np.ones_like(r) if isinstance(r, np.ndarray) else 1.0


def sn_prime(kappa: int, r):
    return cs(kappa, r)


def cs_prime(kappa: int, r):
    return -kappa * sn(kappa, r)


@dataclass(frozen=True)
class ModelChart:
    """A coordinate chart carrying one of the model metrics.

    ``metric`` and ``coframe`` act on arrays of points of shape ``(..., 3)``
    and return arrays of shape ``(..., 3, 3)``.  The metric is reconstructed
    from the orthonormal coframe as ``coframe^T coframe``.
    """

    kind: str
    kappa: int
    angle: float | None
    box: tuple[tuple[float, float], ...]
    coframe_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    axes: tuple[str, str, str] = ("x", "y", "z")
    periodic_axis: int | None = None

    def _check_points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise DomainError("chart points must have 3 coordinates")
        if self.kind in ("edge-neighborhood", "vertex-cone"):
            if np.any(x[..., 0] <= 0.0):
                raise DomainError("point lies on the singular locus (radius <= 0)")
        if self.kind == "vertex-cone":
            if np.any(x[..., 1] <= 0.0):
                raise DomainError("point lies on the link cone axis (s <= 0)")
        return x

    def coframe(self, x) -> np.ndarray:
        return self.coframe_fn(self._check_points(x))

    def metric(self, x) -> np.ndarray:
        e = self.coframe(x)
        return np.einsum("...ai,...aj->...ij", e, e)

    def volume_density(self, x) -> np.ndarray:
        return np.abs(np.linalg.det(self.coframe(x)))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.ones(x.shape[:-1], dtype=bool)
        for i, (lo, hi) in enumerate(self.box):
            inside &= (x[..., i] >= lo) & (x[..., i] <= hi)
        return inside

    def sample_grid(self, counts: Sequence[int], log_radial: bool = False) -> np.ndarray:
        """Tensor-product grid over the coordinate box, shape ``(*counts, 3)``."""
        axes = []
        for i, ((lo, hi), n) in enumerate(zip(self.box, counts)):
            if i == 0 and log_radial and lo > 0:
                axes.append(np.geomspace(lo, hi, n))
            else:
                axes.append(np.linspace(lo, hi, n))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)


def _diag_coframe(*diag_fns):
    def coframe(x):
        out = np.zeros(x.shape[:-1] + (3, 3))
        for i, fn in enumerate(diag_fns):
            out[..., i, i] = fn(x)
        return out

    return coframe


def _check_angle(angle: float, closed: bool) -> float:
    angle = float(angle)
    upper_ok = angle <= TWO_PI if closed else angle < TWO_PI
    if not (angle > 0.0 and upper_ok):
        bound = "(0, 2pi]" if closed else "(0, 2pi)"
        raise DomainError(f"cone angle {angle!r} outside {bound}")
    return angle


def edge_metric(
    kappa: int,
    angle: float,
    box: tuple[tuple[float, float], ...] | None = None,
) -> ModelChart:
    """Constant curvature cylinder over a cone of angle ``angle``.

    Coordinates are ``(rho, theta, y)`` with theta of period ``angle``.
    """
    kappa = check_kappa(kappa)
    angle = _check_angle(angle, closed=True)
    if box is None:
        ymax = 1.0
        rmax = 1.0 if kappa != 1 else 1.2
        box = ((1e-6, rmax), (0.0, angle), (-ymax, ymax))
    if box[0][0] <= 0.0:
        raise DomainError("edge chart box must exclude rho = 0")
    coframe = _diag_coframe(
        lambda x: np.ones(x.shape[:-1]),
        lambda x: sn(kappa, x[..., 0]),
        lambda x: cs(kappa, x[..., 0]),
    )
    return ModelChart(
        kind="edge-neighborhood",
        kappa=kappa,
        angle=angle,
        box=tuple(tuple(map(float, b)) for b in box),
        coframe_fn=coframe,
        axes=("rho", "theta", "y"),
        periodic_axis=1,
    )


def vertex_metric(
    kappa: int,
    link_angles: Sequence[float],
    link_chart_selector: int = 0,
    box: tuple[tuple[float, float], ...] | None = None,
) -> ModelChart:
    """Cone of curvature ``kappa`` over a spherical link, near one link cone point.

    ``link_chart_selector`` picks the cone point whose neighbourhood the chart
    covers; its angle is the period of ``theta``.  Coordinates ``(r, s, theta)``.
    """
    kappa = check_kappa(kappa)
    angles = [_check_angle(a, closed=False) for a in link_angles]
    if not angles:
        raise DomainError("link needs at least one cone point")
    if not 0 <= link_chart_selector < len(angles):
        raise DomainError(f"no cone point with index {link_chart_selector}")
    angle = angles[link_chart_selector]
    if box is None:
        box = ((1e-6, 1.0), (1e-6, 1.0), (0.0, angle))
    if box[0][0] <= 0.0 or box[1][0] <= 0.0:
        raise DomainError("vertex chart box must exclude r = 0 and s = 0")
    coframe = _diag_coframe(
        lambda x: np.ones(x.shape[:-1]),
        lambda x: sn(kappa, x[..., 0]),
        lambda x: sn(kappa, x[..., 0]) * np.sin(x[..., 1]),
    )
    return ModelChart(
        kind="vertex-cone",
        kappa=kappa,
        angle=angle,
        box=tuple(tuple(map(float, b)) for b in box),
        coframe_fn=coframe,
        axes=("r", "s", "theta"),
        periodic_axis=2,
    )


def space_form_box(
    kappa: int = 0,
    box: tuple[tuple[float, float], ...] = ((-1.0, 1.0),) * 3,
) -> ModelChart:
    """Smooth space form on a coordinate box.

    kappa = 0 is Cartesian; kappa = -1 uses the upper half-space model
    (third coordinate > 0); kappa = +1 uses stereographic coordinates.
    """
    kappa = check_kappa(kappa)
    if kappa == 0:
        coframe = _diag_coframe(*(lambda x: np.ones(x.shape[:-1]),) * 3)
    elif kappa == -1:
        if box[2][0] <= 0.0:
            raise DomainError("half-space box needs positive third coordinate")
        coframe = _diag_coframe(*(lambda x: 1.0 / x[..., 2],) * 3)
    else:
        coframe = _diag_coframe(
            *(lambda x: 2.0 / (1.0 + np.sum(x * x, axis=-1)),) * 3
        )
    return ModelChart(
        kind="space-form-box",
        kappa=kappa,
        angle=None,
        box=tuple(tuple(map(float, b)) for b in box),
        coframe_fn=coframe,
    )
