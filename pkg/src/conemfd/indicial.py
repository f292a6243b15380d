"""Indicial roots at cone points, singular edges and singular vertices.

Conventions
-----------
* cone point of angle ``alpha``: gamma = 2 pi / alpha, Fourier modes
  ``e^{i n gamma theta}``;
* one-forms near a cone point are written in the frame (dr, r dtheta); the
  four families are

      eta^{++}_n = r^{n gamma + 1} e^{i n gamma theta} (dr - i r dtheta)
      eta^{+-}_n = r^{-n gamma - 1} e^{i n gamma theta} (dr - i r dtheta)
      eta^{-+}_n = r^{n gamma - 1} e^{i n gamma theta} (dr + i r dtheta)
      eta^{--}_n = r^{-n gamma + 1} e^{i n gamma theta} (dr + i r dtheta);

* at a vertex, ``eta = a(r) psi dr + r b(r) phi'`` with ``psi`` a link
  eigenfunction of eigenvalue lambda and ``phi' = lambda^{-1/2} d psi``.

Windows are half-open intervals ``(lo, hi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-12
LOCI = ("cone-scalar", "cone-oneform", "edge", "vertex")
POLARIZATIONS = (
    "scalar", "eta++", "eta+-", "eta-+", "eta--", "dy",
    "coexact", "coupled-A", "coupled-B", "radial-lambda0",
)
RESIDUAL_GRID = np.geomspace(0.5, 2.0, 7)


class SpectralGapError(ValueError):
    """A link eigenvalue lies in (0, 1], which the vertex analysis excludes."""


# ------------------------------------------------------------------ windows


@dataclass(frozen=True)
class CriticalWindow:
    lo: float
    hi: float
    transverse_dim: int | None = None

    @property
    def measure_exponent(self) -> int | None:
        return None if self.transverse_dim is None else self.transverse_dim - 1

    def contains(self, value: float) -> bool:
        return self.lo + TOL < value <= self.hi + TOL

    def at_endpoint(self, value: float) -> bool:
        return abs(value - self.hi) <= TOL

    @property
    def empty(self) -> bool:
        return not self.hi > self.lo

    def in_l2(self, mu: float) -> bool:
        """r^mu in L^2(r^{d-1} dr) near 0 iff mu > -d/2."""
        if self.transverse_dim is None:
            raise ValueError("membership needs a transverse dimension")
        return mu > -self.transverse_dim / 2.0


def critical_window(transverse_dim: int) -> CriticalWindow:
    if transverse_dim not in (2, 3):
        raise ValueError(f"unsupported transverse dimension {transverse_dim}")
    lo = -transverse_dim / 2.0
    return CriticalWindow(lo, lo + 2.0, transverse_dim)


# -------------------------------------------------------------- roots/modes


@dataclass(frozen=True)
class ModeLabel:
    """Which solution a root belongs to.

    ``n`` is the Fourier index (cone/edge), ``lam`` the link eigenvalue
    (vertex).  ``vector`` holds the (dr, r phi') coefficients of coupled
    vertex modes.
    """

    polarization: str
    n: int | None = None
    lam: float | None = None
    log: bool = False
    vector: tuple[float, float] | None = None

    def describe(self) -> str:
        bits = [self.polarization]
        if self.n is not None:
            bits.append(f"n={self.n}")
        if self.lam is not None:
            bits.append(f"lambda={self.lam!r}")
        if self.log:
            bits.append("log")
        return "[" + ",".join(bits) + "]"


@dataclass(frozen=True)
class IndicialRoot:
    value: float
    modes: tuple[ModeLabel, ...]
    endpoint: bool = False
    in_window: bool = True
    note: str = ""

    @property
    def multiplicity(self) -> int:
        return len(self.modes)

    @property
    def has_log_partner(self) -> bool:
        return any(m.log for m in self.modes)


@dataclass(frozen=True)
class IndicialReport:
    operator: str
    locus: str
    roots: tuple[IndicialRoot, ...]
    window: CriticalWindow
    critical: CriticalWindow
    endpoint_roots: tuple[IndicialRoot, ...] = ()
    parameters: dict = field(default_factory=dict)

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.roots]

    def root_at(self, value: float) -> IndicialRoot | None:
        for r in self.roots:
            if abs(r.value - value) <= 1e-9:
                return r
        return None

    def windowed(self) -> list[IndicialRoot]:
        return [r for r in self.roots if r.in_window]

    @property
    def friedrichs_allowed(self) -> tuple[IndicialRoot, ...]:
        return friedrichs_filter(self).roots

    def groups(self) -> dict[str, list[float]]:
        """Critical vertex roots split by coupled family."""
        out: dict[str, list[float]] = {"A": [], "B": []}
        for r in self.windowed():
            for m in r.modes:
                if m.polarization == "coupled-A":
                    out["A"].append(r.value)
                elif m.polarization == "coupled-B":
                    out["B"].append(r.value)
        return out

    def to_dict(self) -> dict:
        def root_dict(r: IndicialRoot) -> dict:
            return {
                "value": r.value,
                "multiplicity": r.multiplicity,
                "has_log_partner": r.has_log_partner,
                "endpoint": r.endpoint,
                "in_window": r.in_window,
                "modes": [m.describe() for m in r.modes],
                "note": r.note,
            }

        allowed = friedrichs_filter(self).roots
        return {
            "operator": self.operator,
            "locus": self.locus,
            "parameters": self.parameters,
            "window": [self.window.lo, self.window.hi],
            "critical_window": [self.critical.lo, self.critical.hi],
            "roots": [root_dict(r) for r in self.roots],
            "endpoint_roots": [root_dict(r) for r in self.endpoint_roots],
            "friedrichs_allowed": [root_dict(r) for r in allowed],
        }


def _merge(raw: Iterable[tuple[float, ModeLabel]]) -> list[tuple[float, list[ModeLabel]]]:
    items = sorted(raw, key=lambda item: item[0])
    out: list[tuple[float, list[ModeLabel]]] = []
    for value, mode in items:
        if out and abs(value - out[-1][0]) <= TOL:
            out[-1][1].append(mode)
        else:
            out.append((value, [mode]))
    return out


def _gamma_of(angle: float) -> float:
    angle = float(angle)
    if not (0.0 < angle < 2.0 * math.pi):
        raise ValueError(f"cone angle must lie in (0, 2pi), got {angle}")
    return 2.0 * math.pi / angle


def _as_window(window, transverse_dim: int) -> CriticalWindow:
    if window is None:
        return critical_window(transverse_dim)
    lo, hi = (float(v) for v in window)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("windows must be bounded")
    return CriticalWindow(lo, hi, transverse_dim)


def _n_range(gamma: float, window: CriticalWindow, shift: float = 1.0) -> range:
    bound = max(abs(window.lo), abs(window.hi)) + shift
    nmax = int(math.floor(bound / gamma)) + 1
    return range(-nmax, nmax + 1)


def _build_report(
    operator: str,
    locus: str,
    raw: list[tuple[float, ModeLabel]],
    window: CriticalWindow,
    crit: CriticalWindow,
    include_endpoint: bool,
    parameters: dict,
    note_fn=None,
) -> IndicialReport:
    roots, endpoint_roots = [], []
    split_endpoint = abs(window.hi - crit.hi) <= TOL and not include_endpoint
    if not window.empty:
        for value, modes in _merge(raw):
            if not window.contains(value):
                continue
            endpoint = crit.at_endpoint(value)
            note = note_fn(value) if note_fn else ""
            root = IndicialRoot(value, tuple(modes), endpoint=endpoint, note=note)
            if endpoint and split_endpoint:
                endpoint_roots.append(root)
            else:
                roots.append(root)
    return IndicialReport(operator, locus, tuple(roots), window, crit, tuple(endpoint_roots), parameters)


def roots_cone_scalar(angle: float, window=None, include_endpoint: bool = False) -> IndicialReport:
    """Roots n gamma of the scalar Laplacian at a cone point; 0 is double (1, log r)."""
    gamma = _gamma_of(angle)
    crit = critical_window(2)
    win = _as_window(window, 2)
    raw = []
    for n in _n_range(gamma, win, 0.0):
        if n == 0:
            raw += [(0.0, ModeLabel("scalar", 0)), (0.0, ModeLabel("scalar", 0, log=True))]
        else:
            # r^{+|n| gamma} and r^{-|n| gamma} both carry e^{i n gamma theta}
            raw += [(abs(n) * gamma, ModeLabel("scalar", n)), (-abs(n) * gamma, ModeLabel("scalar", n))]
    return _build_report(
        "laplace-0", "cone-scalar", raw, win, crit, include_endpoint, {"angle": float(angle), "gamma": gamma}
    )


def _oneform_family(gamma: float, nrange: Iterable[int]) -> list[tuple[float, ModeLabel]]:
    raw = []
    for n in nrange:
        raw += [
            (n * gamma + 1.0, ModeLabel("eta++", n)),
            (-n * gamma - 1.0, ModeLabel("eta+-", n)),
            (n * gamma - 1.0, ModeLabel("eta-+", n)),
            (-n * gamma + 1.0, ModeLabel("eta--", n)),
        ]
    return raw


def _oneform_note(gamma: float):
    def note(value: float) -> str:
        if abs(value - (gamma - 1.0)) <= TOL and abs(value) > TOL:
            return "critical root gamma-1"
        if abs(value - (1.0 - gamma)) <= TOL and abs(value) > TOL:
            return "critical root 1-gamma"
        if abs(value - 1.0) <= TOL:
            return "endpoint root 1 (n=0); absent from the critical lists, role in the minimal domain unresolved"
        return ""

    return note


def roots_cone_oneform(angle: float, window=None, include_endpoint: bool = False) -> IndicialReport:
    """Roots n gamma +- 1 of the one-form Laplacian at a cone point."""
    gamma = _gamma_of(angle)
    crit = critical_window(2)
    win = _as_window(window, 2)
    raw = _oneform_family(gamma, _n_range(gamma, win))
    return _build_report(
        "laplace-1", "cone-oneform", raw, win, crit, include_endpoint,
        {"angle": float(angle), "gamma": gamma}, _oneform_note(gamma),
    )


def roots_edge(angle: float, window=None, include_endpoint: bool = False) -> IndicialReport:
    """Roots of the rough Laplacian (and P) on one-forms along a singular edge.

    The (d rho, rho d theta) block repeats the cone one-form lattice; the dy
    component adds r^{+-n gamma} e^{i n gamma theta} dy, with dy and log(r) dy at 0.
    """
    gamma = _gamma_of(angle)
    crit = critical_window(2)
    win = _as_window(window, 2)
    nr = _n_range(gamma, win)
    raw = _oneform_family(gamma, nr)
    for n in nr:
        if n == 0:
            raw += [(0.0, ModeLabel("dy", 0)), (0.0, ModeLabel("dy", 0, log=True))]
        else:
            raw += [(abs(n) * gamma, ModeLabel("dy", n)), (-abs(n) * gamma, ModeLabel("dy", n))]
    return _build_report(
        "rough-laplace-1", "edge", raw, win, crit, include_endpoint,
        {"angle": float(angle), "gamma": gamma}, _oneform_note(gamma),
    )


def _spectrum_values(link_spectrum) -> list[float]:
    if hasattr(link_spectrum, "expanded"):
        return [float(v) for v in link_spectrum.expanded()]
    return [float(v) for v in link_spectrum]


def roots_vertex(link_spectrum, include_endpoint: bool = False) -> IndicialReport:
    """Full root set at a singular vertex from the scalar spectrum of its link.

    Repeated values in ``link_spectrum`` count as multiplicity.
    """
    values = _spectrum_values(link_spectrum)
    if not values or min(values) != 0.0:
        raise ValueError("link spectrum must contain the eigenvalue 0")
    for lam in values:
        if lam < 0:
            raise ValueError(f"negative link eigenvalue {lam}")
        if 0.0 < lam <= 1.0:
            raise SpectralGapError(
                f"link eigenvalue {lam} lies in (0, 1]; nonzero link eigenvalues must exceed 1"
            )
    raw: list[tuple[float, ModeLabel]] = []
    for lam in values:
        if lam == 0.0:
            raw += [(1.0, ModeLabel("radial-lambda0", lam=0.0)), (-2.0, ModeLabel("radial-lambda0", lam=0.0))]
            continue
        s = math.sqrt(1.0 + 4.0 * lam)
        w = 2.0 * math.sqrt(lam)
        for sign in (1.0, -1.0):
            raw.append((-0.5 + sign * s / 2.0, ModeLabel("coexact", lam=lam)))
            raw.append((-1.5 + sign * s / 2.0, ModeLabel("coupled-A", lam=lam, vector=(w, 1.0 + sign * s))))
            raw.append((0.5 + sign * s / 2.0, ModeLabel("coupled-B", lam=lam, vector=(w, 1.0 - sign * s))))
    crit = critical_window(3)
    roots, endpoint_roots = [], []
    for value, modes in _merge(raw):
        inside = crit.contains(value)
        endpoint = inside and crit.at_endpoint(value)
        note = ""
        if inside and any(m.polarization == "coupled-A" for m in modes):
            note = "group A"
        elif inside and any(m.polarization == "coupled-B" for m in modes):
            note = "group B"
        root = IndicialRoot(value, tuple(modes), endpoint=endpoint, in_window=inside, note=note)
        if endpoint and not include_endpoint:
            endpoint_roots.append(root)
        else:
            roots.append(root)
    return IndicialReport(
        "rough-laplace-1", "vertex", tuple(roots), crit, crit, tuple(endpoint_roots),
        {"spectrum": values},
    )


def closedness_defect(lam: float) -> float:
    """(a + 1)(1 + s) - 2 lambda with s = sqrt(1 + 4 lambda), a = -3/2 + s/2.

    Vanishing is what makes the group A one-form closed.
    """
    s = math.sqrt(1.0 + 4.0 * lam)
    a = -1.5 + s / 2.0
    return (a + 1.0) * (1.0 + s) - 2.0 * lam


# ---------------------------------------------------------------- Friedrichs


def _friedrichs_modes(root: IndicialRoot, crit: CriticalWindow) -> tuple[tuple[ModeLabel, ...], str]:
    # nabla(r^mu mode) ~ r^{mu-1}; square integrable iff mu - 1 > lo
    threshold = crit.lo + 1.0
    if root.value > threshold + TOL:
        return root.modes, "gradient in L^2"
    if abs(root.value - threshold) <= TOL:
        kept = tuple(m for m in root.modes if not m.log)
        if kept and len(kept) < len(root.modes):
            return kept, "log partner excluded"
        return kept, "borderline"
    return (), "gradient not in L^2"


def friedrichs_filter(report: IndicialReport, include_endpoint: bool = False) -> IndicialReport:
    """Critical-window roots compatible with the Friedrichs domain.

    Endpoint roots are dropped unless ``include_endpoint`` is set.
    """
    kept = []
    for root in report.roots:
        if not root.in_window:
            continue
        if root.endpoint and not include_endpoint:
            continue
        modes, why = _friedrichs_modes(root, report.critical)
        if modes:
            kept.append(replace(root, modes=modes, note=(root.note + "; " if root.note else "") + why))
    return replace(report, roots=tuple(kept), endpoint_roots=())


# ------------------------------------------------------------ mode residual


def _jets(mu: complex, log: bool, r: np.ndarray):
    """u = r^mu (log r)^k with its Euler derivatives (r d_r) u, (r d_r)^2 u."""
    base = r.astype(complex) ** mu
    if not log:
        return base, mu * base, mu * mu * base
    lr = np.log(r)
    u = base * lr
    return u, mu * u + base, mu * mu * u + 2.0 * mu * base


def mode_residual(locus: str, param, root: float, mode: ModeLabel, r: np.ndarray | None = None) -> float:
    """Scaled sup-norm of the indicial operator applied to r^root * mode.

    ``param`` is the cone angle for cone/edge loci and ignored at a vertex,
    where the link eigenvalue travels with the mode.
    """
    if locus not in LOCI:
        raise ValueError(f"unknown locus {locus!r}")
    r = RESIDUAL_GRID if r is None else np.asarray(r, dtype=float)
    u, e1, e2 = _jets(root, mode.log, r)
    if locus == "vertex":
        lam = float(mode.lam)
        if mode.polarization == "radial-lambda0":
            res = [-e2 - e1 + 2.0 * u]
            scale = 3.0
        elif mode.polarization == "coexact":
            res = [-e2 - e1 + lam * u]
            scale = 1.0 + lam
        elif mode.polarization in ("coupled-A", "coupled-B"):
            a, b = mode.vector
            w = 2.0 * math.sqrt(lam)
            res = [
                (-e2 - e1 + (2.0 + lam) * u) * a - w * b * u,
                (-e2 - e1 + lam * u) * b - w * a * u,
            ]
            scale = (3.0 + lam + w) * max(abs(a), abs(b))
        else:
            raise ValueError(f"mode {mode.describe()} does not live at a vertex")
    else:
        gamma = _gamma_of(param)
        ng = (mode.n or 0) * gamma
        if mode.polarization in ("scalar", "dy"):
            res = [-e2 + ng * ng * u]
            scale = 1.0 + ng * ng
        elif mode.polarization in ("eta++", "eta+-", "eta-+", "eta--"):
            g_coef = -1j if mode.polarization in ("eta++", "eta+-") else 1j
            f, g = u, g_coef * u
            ef2, eg2 = e2, g_coef * e2
            res = [
                -ef2 + (ng * ng + 1.0) * f + 2j * ng * g,
                -eg2 + (ng * ng + 1.0) * g - 2j * ng * f,
            ]
            scale = 2.0 + ng * ng + 2.0 * abs(ng)
        else:
            raise ValueError(f"mode {mode.describe()} does not live at {locus}")
    mag = max(float(np.max(np.abs(x))) for x in (u, e1, e2))
    scale *= max(mag, 1e-300)
    return float(max(np.max(np.abs(x)) for x in res) / scale)


def report_residuals(report: IndicialReport) -> list[tuple[float, ModeLabel, float]]:
    """mode_residual for every (root, mode) pair in the report, including endpoint roots."""
    param = report.parameters.get("angle")
    out = []
    for root in tuple(report.roots) + tuple(report.endpoint_roots):
        for mode in root.modes:
            out.append((root.value, mode, mode_residual(report.locus, param, root.value, mode)))
    return out
