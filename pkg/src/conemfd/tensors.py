"""Finite-difference tensor calculus on model charts.

Tensor fields are callables mapping an array of chart points of shape
``(N, 3)`` to covariant component arrays of shape ``(N, 3, ..., 3)``.  All
derivatives are central differences with step ``h`` (fourth order by
default, second order on request); nesting operators nests the stencils, so
a composite operator keeps the order of its stencil.

Index conventions (fixed repo-wide):

* derivative index first: ``(nabla T)[a, i, ...] = nabla_a T_{i...}``
* ``R[i, j, k, l] = g(R(d_i, d_j) d_l, d_k)`` so a space form of curvature
  kappa has ``R = kappa (g_ik g_jl - g_il g_jk)`` and ``Ric = (n-1) kappa g``
* ``(delta k)_i = -nabla^j k_{ji}``, Laplacians are positive
* 2-forms are antisymmetric arrays, ``(d w)_ij = d_i w_j - d_j w_i``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geom import DomainError, ModelChart

FieldFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TensorField:
    """Covariant tensor field of a given rank on a chart."""

    chart: ModelChart
    rank: int
    fn: FieldFn
    provenance: str = ""

    @property
    def valence(self) -> tuple[int, int]:
        return (0, self.rank)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.asarray(self.fn(x))
        expected = x.shape[:-1] + (3,) * self.rank
        if out.shape != expected:
            raise ValueError(f"field returned shape {out.shape}, expected {expected}")
        return out

    def samples(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        flat = grid.reshape(-1, 3)
        vals = self(flat)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite field samples")
        return vals.reshape(grid.shape[:-1] + (3,) * self.rank)

    def __add__(self, other: "TensorField") -> "TensorField":
        _check_compatible(self, other)
        return TensorField(self.chart, self.rank, lambda x: self.fn(x) + other.fn(x))

    def __sub__(self, other: "TensorField") -> "TensorField":
        _check_compatible(self, other)
        return TensorField(self.chart, self.rank, lambda x: self.fn(x) - other.fn(x))

    def scale(self, c: float) -> "TensorField":
        return TensorField(self.chart, self.rank, lambda x: c * self.fn(x))


def _check_compatible(a: TensorField, b: TensorField) -> None:
    if a.rank != b.rank or a.chart is not b.chart:
        raise ValueError("fields live on different charts or have different ranks")


def metric_field(chart: ModelChart) -> TensorField:
    return TensorField(chart, 2, chart.metric, provenance="g")


class ChartCalculus:
    """Central-difference calculus on one chart with step ``h``."""

    def __init__(self, chart: ModelChart, h: float = 1e-3, order: int = 4):
        if order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        self.chart = chart
        self.h = float(h)
        self.order = order

    # -- raw metric quantities -------------------------------------------

    def _check_interior(self, x):
        lo = np.array([b[0] for b in self.chart.box])
        hi = np.array([b[1] for b in self.chart.box])
        reach = (self.order // 2 + 1) * self.h
        if self.chart.kind != "space-form-box":
            # only the singular axis is a hard boundary for the stencil
            if np.any(x[..., 0] - reach <= 0.0):
                raise DomainError("stencil reaches the singular locus")
            if self.chart.kind == "vertex-cone" and np.any(x[..., 1] - reach <= 0.0):
                raise DomainError("stencil reaches the link cone axis")
        elif np.any(x - reach < lo) or np.any(x + reach > hi):
            raise DomainError("point too close to the chart boundary for the stencil")

    def partial(self, f: FieldFn) -> FieldFn:
        """Coordinate derivative, new index first."""
        h = self.h
        eye = np.eye(3) * h

        if self.order == 2:

            def df(x):
                parts = [(f(x + eye[a]) - f(x - eye[a])) / (2 * h) for a in range(3)]
                return np.stack(parts, axis=1)

        else:

            def df(x):
                parts = [
                    (
                        8.0 * (f(x + eye[a]) - f(x - eye[a]))
                        - (f(x + 2 * eye[a]) - f(x - 2 * eye[a]))
                    )
                    / (12 * h)
                    for a in range(3)
                ]
                return np.stack(parts, axis=1)

        return df

    def metric(self, x):
        return self.chart.metric(x)

    def metric_derivative(self, x):
        return self.partial(self.chart.metric)(x)

    def christoffel(self, x) -> np.ndarray:
        """Gamma[k, i, j] = Gamma^k_{ij} by differentiating the metric."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self._check_interior(x)
        g = self.metric(x)
        ginv = np.linalg.inv(g)
        dg = self.metric_derivative(x)  # dg[n, a, i, j] = d_a g_ij
        lower = 0.5 * (
            np.einsum("nijl->nlij", dg)
            + np.einsum("njil->nlij", dg)
            - dg
        )
        return np.einsum("nkl,nlij->nkij", ginv, lower)

    def riemann(self, x) -> np.ndarray:
        """R[i, j, k, l] with the convention in the module docstring."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        gam = self.christoffel(x)
        dgam = self.partial(self.christoffel)(x)  # dgam[n, a, m, j, l]
        g = self.metric(x)
        rm = (
            np.einsum("nimjl->nijml", dgam)
            - np.einsum("njmil->nijml", dgam)
            + np.einsum("nmip,npjl->nijml", gam, gam)
            - np.einsum("nmjp,npil->nijml", gam, gam)
        )  # R(d_i, d_j) d_l = rm[i, j, m, l] d_m
        return np.einsum("nkm,nijml->nijkl", g, rm)

    def ricci(self, x) -> np.ndarray:
        g = self.metric(np.atleast_2d(x))
        ginv = np.linalg.inv(g)
        return np.einsum("nik,nijkl->njl", ginv, self.riemann(x))

    def scalar_curvature(self, x) -> np.ndarray:
        ginv = np.linalg.inv(self.metric(np.atleast_2d(x)))
        return np.einsum("nij,nij->n", ginv, self.ricci(x))

    # -- covariant calculus on fields ------------------------------------

    def _cov_fn(self, f: FieldFn, rank: int) -> FieldFn:
        d = self.partial(f)

        def nabla(x):
            x = np.atleast_2d(x)
            gam = self.christoffel(x)
            t = f(x)
            out = d(x)
            for slot in range(rank):
                # contract Gamma^k_{a i_slot} with the slot-th index of T
                moved = np.moveaxis(t, slot + 1, 1)  # (n, k, ...)
                corr = np.einsum("nkai,nk...->nai...", gam, moved)
                corr = np.moveaxis(corr, 2, slot + 2)
                out = out - corr
            return out

        return nabla

    def covariant_derivative(self, field: TensorField) -> TensorField:
        return TensorField(
            field.chart,
            field.rank + 1,
            self._cov_fn(field.fn, field.rank),
            provenance=f"nabla({field.provenance})",
        )

    def _inv(self, x):
        return np.linalg.inv(self.metric(x))

    def trace(self, k: TensorField) -> TensorField:
        if k.rank < 2:
            raise ValueError("trace needs rank >= 2")

        def tr(x):
            return np.einsum("nij,nij...->n...", self._inv(x), k.fn(x))

        return TensorField(k.chart, k.rank - 2, tr, provenance=f"tr({k.provenance})")

    def rough_laplacian(self, t: TensorField) -> TensorField:
        """nabla^* nabla T = -g^{ab} nabla_a nabla_b T."""
        nn = self.covariant_derivative(self.covariant_derivative(t))

        def lap(x):
            return -np.einsum("nab,nab...->n...", self._inv(x), nn.fn(x))

        return TensorField(t.chart, t.rank, lap, provenance=f"lap({t.provenance})")

    def laplacian0(self, u: TensorField) -> TensorField:
        if u.rank != 0:
            raise ValueError("scalar Laplacian needs a function")
        return self.rough_laplacian(u)

    def d0(self, u: TensorField) -> TensorField:
        return TensorField(u.chart, 1, self.partial(u.fn), provenance=f"d({u.provenance})")

    def d1(self, w: TensorField) -> TensorField:
        dw = self.partial(w.fn)

        def f(x):
            t = dw(x)
            return t - np.swapaxes(t, 1, 2)

        return TensorField(w.chart, 2, f, provenance=f"d({w.provenance})")

    def delta1(self, w: TensorField) -> TensorField:
        nw = self.covariant_derivative(w)
        return TensorField(
            w.chart, 0, lambda x: -np.einsum("nab,nab->n", self._inv(x), nw.fn(x))
        )

    def delta2(self, beta: TensorField) -> TensorField:
        """Codifferential of a 2-form (or of a symmetric 2-tensor): -nabla^a T_{a j}."""
        nb = self.covariant_derivative(beta)
        return TensorField(
            beta.chart, 1, lambda x: -np.einsum("nab,nabj->nj", self._inv(x), nb.fn(x))
        )

    def divergence_sym(self, k: TensorField) -> TensorField:
        """(delta k)_i = -(nabla k)^j_{ji}."""
        return self.delta2(k)

    def bianchi(self, k: TensorField) -> TensorField:
        if k.rank != 2:
            raise ValueError("Bianchi operator acts on symmetric 2-tensors")
        dk = self.divergence_sym(k)
        dtr = self.d0(self.trace(k))
        return TensorField(
            k.chart, 1, lambda x: dk.fn(x) + 0.5 * dtr.fn(x), provenance=f"B({k.provenance})"
        )

    def delta_star(self, w: TensorField) -> TensorField:
        nw = self.covariant_derivative(w)

        def f(x):
            t = nw.fn(x)
            return 0.5 * (t + np.swapaxes(t, 1, 2))

        return TensorField(w.chart, 2, f, provenance=f"delta*({w.provenance})")

    def ric_action(self, w: TensorField) -> TensorField:
        def f(x):
            return np.einsum("nip,npq,nq->ni", self.ricci(x), self._inv(x), w.fn(x))

        return TensorField(w.chart, 1, f)

    def hodge_laplacian1(self, w: TensorField) -> TensorField:
        a = self.delta2(self.d1(w))
        b = self.d0(self.delta1(w))
        return a + b

    def operator_L(self, k: TensorField) -> TensorField:
        """Lichnerowicz-type operator

        ``L k = nabla^* nabla k - 2 R k + Ric o k + k o Ric - 2 (n-1) kappa k``
        with ``(R k)_ij = R_{ipjq} k^{pq}``.  Curvature is taken from the
        finite-difference Riemann tensor, never from the model value.
        """
        lap = self.rough_laplacian(k)
        kappa = k.chart.kappa

        def f(x):
            ginv = self._inv(x)
            kk = k.fn(x)
            kup = np.einsum("npa,nqb,nab->npq", ginv, ginv, kk)
            rk = np.einsum("nipjq,npq->nij", self.riemann(x), kup)
            ric = self.ricci(x)
            ric_mixed = np.einsum("nip,npq->niq", ric, ginv)
            ric_k = np.einsum("niq,nqj->nij", ric_mixed, kk)
            k_ric = np.einsum("niq,nqj->nij", kk, np.swapaxes(ric_mixed, 1, 2))
            return lap.fn(x) - 2.0 * rk + ric_k + k_ric - 4.0 * kappa * kk

        return TensorField(k.chart, 2, f, provenance=f"L({k.provenance})")

    def operator_P(self, w: TensorField) -> TensorField:
        """P w = nabla^* nabla w - Ric(w)."""
        return self.rough_laplacian(w) - self.ric_action(w)

    def operator_DE(self, k: TensorField) -> TensorField:
        """Linearized Einstein operator as 1/2 L - delta^* B."""
        return self.operator_L(k).scale(0.5) - self.delta_star(self.bianchi(k))

    def einstein_linearization(self, k: TensorField) -> TensorField:
        """d/de [Ric(g + e k) - 2 kappa (g + e k)] through the Palatini formula.

        Independent of ``operator_L``: uses only covariant derivatives of k.
        """
        nk = self.covariant_derivative(k)

        def var_gamma(x):
            t = nk.fn(x)  # t[a, i, j] = nabla_a k_ij
            # C_{l i j} = 1/2 (nabla_i k_jl + nabla_j k_il - nabla_l k_ij)
            return 0.5 * (
                np.einsum("nijl->nlij", t) + np.einsum("njil->nlij", t) - t
            )

        cfield = TensorField(k.chart, 3, var_gamma)
        nc = self.covariant_derivative(cfield)  # nc[p, l, i, j]
        kappa = k.chart.kappa

        def f(x):
            ginv = self._inv(x)
            t = nc.fn(x)
            first = np.einsum("npl,nplij->nij", ginv, t)
            second = np.einsum("npl,njlpi->nij", ginv, t)
            return first - second - 2.0 * kappa * k.fn(x)

        return TensorField(k.chart, 2, f, provenance=f"DE_palatini({k.provenance})")

    # -- T*M-valued forms (form indices first, value index last) ----------

    def d_nabla0(self, w: TensorField) -> TensorField:
        return self.covariant_derivative(w)

    def d_nabla1(self, h: TensorField) -> TensorField:
        nh = self.covariant_derivative(h)

        def f(x):
            t = nh.fn(x)  # t[a, b, j] = nabla_a h_{b;j}
            return t - np.swapaxes(t, 1, 2)

        return TensorField(h.chart, 3, f)

    def delta_nabla1(self, h: TensorField) -> TensorField:
        nh = self.covariant_derivative(h)
        return TensorField(
            h.chart, 1, lambda x: -np.einsum("nab,nabj->nj", self._inv(x), nh.fn(x))
        )

    def delta_nabla2(self, beta: TensorField) -> TensorField:
        nb = self.covariant_derivative(beta)  # nb[c, a, b, j]
        return TensorField(
            beta.chart, 2, lambda x: -np.einsum("nac,ncabj->nbj", self._inv(x), nb.fn(x))
        )


def constant_curvature_riemann(g: np.ndarray, kappa: float) -> np.ndarray:
    """kappa (g_ik g_jl - g_il g_jk) for a batch of metrics ``(N, 3, 3)``."""
    return kappa * (
        np.einsum("nik,njl->nijkl", g, g) - np.einsum("nil,njk->nijkl", g, g)
    )
