"""Laplace spectra of spherical footballs and their one-form counterparts.

A football of cone angle ``alpha`` is the spherical suspension of a circle of
length alpha.  Separating ``e^{i n gamma theta}``, gamma = 2 pi / alpha, the
radial equation is the associated Legendre equation of order |n| gamma, whose
Friedrichs eigenvalues are ``(|n| gamma + k)(|n| gamma + k + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

MERGE_TOL = 1e-12
FROBENIUS_R0 = 1e-3
BRACKET_WIDTH = 1e-10
SCAN_STEP = 0.25


class ShootingError(ArithmeticError):
    pass


@dataclass
class EigenEntry:
    lam: float
    multiplicity: int
    labels: list[tuple[int, int]] = field(default_factory=list)
    # individual computed values when the entry merges nearby numerical roots
    samples: list[float] = field(default_factory=list)


@dataclass
class EigenvalueList:
    entries: list[EigenEntry]

    @property
    def values(self) -> list[float]:
        return [e.lam for e in self.entries]

    @property
    def multiplicities(self) -> list[int]:
        return [e.multiplicity for e in self.entries]

    def as_pairs(self) -> list[tuple[float, int]]:
        return [(e.lam, e.multiplicity) for e in self.entries]

    def expanded(self) -> list[float]:
        """Eigenvalues repeated by multiplicity (individual samples where recorded)."""
        out = []
        for e in self.entries:
            out.extend(e.samples if len(e.samples) == e.multiplicity else [e.lam] * e.multiplicity)
        return sorted(out)

    def nonzero_min(self) -> float:
        vals = [e.lam for e in self.entries if e.lam > MERGE_TOL]
        return min(vals) if vals else math.inf

    def check_scalar(self) -> None:
        """Raise ValueError unless this looks like a scalar Laplace spectrum."""
        lams = self.values
        if any(b < a for a, b in zip(lams, lams[1:])):
            raise ValueError("eigenvalues must be sorted")
        if any(lam < 0 for lam in lams):
            raise ValueError("eigenvalues must be nonnegative")
        zeros = [e for e in self.entries if abs(e.lam) <= MERGE_TOL]
        if len(zeros) != 1 or zeros[0].multiplicity != 1:
            raise ValueError("a scalar spectrum has the eigenvalue 0 exactly once, simple")


def _merge(raw: list[tuple[float, tuple[int, int]]]) -> EigenvalueList:
    raw.sort(key=lambda item: (item[0], item[1]))
    entries: list[EigenEntry] = []
    for lam, label in raw:
        if entries and abs(lam - entries[-1].lam) <= MERGE_TOL * max(1.0, abs(lam)):
            entries[-1].multiplicity += 1
            entries[-1].labels.append(label)
        else:
            entries.append(EigenEntry(lam, 1, [label]))
    return EigenvalueList(entries)


def _gamma(angle: float) -> float:
    angle = float(angle)
    if not (0.0 < angle <= 2.0 * math.pi):
        raise ValueError(f"football angle must lie in (0, 2pi], got {angle}")
    return 2.0 * math.pi / angle


def football_spectrum(angle: float, lambda_max: float) -> EigenvalueList:
    """All Friedrichs eigenvalues <= lambda_max of the football with cone angle ``angle``."""
    gamma = _gamma(angle)
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    cutoff = lambda_max * (1.0 + MERGE_TOL)
    raw = []
    n = 0
    while n * gamma * (n * gamma + 1.0) <= cutoff:
        k = 0
        while True:
            nu = n * gamma + k
            lam = nu * (nu + 1.0)
            if lam > cutoff:
                break
            raw.append((lam, (n, k)))
            if n:
                raw.append((lam, (-n, k)))
            k += 1
        n += 1
    return _merge(raw)


# ------------------------------------------------------------------ shooting


def _frobenius_start(nu: float, lam: float, r0: float) -> tuple[float, float]:
    """(f, f') at r0 of r^nu (1 + a r^2), divided by r0^nu."""
    a = (nu * (nu + 1.0) / 3.0 - lam) / (4.0 * (nu + 1.0))
    f = 1.0 + a * r0 * r0
    df = nu / r0 * f + 2.0 * a * r0
    return f, df


def _integrate(nu: float, lam: float, r0: float, r1: float, rtol: float) -> tuple[float, float]:
    def rhs(r, y):
        s = math.sin(r)
        return [y[1], -math.cos(r) / s * y[1] + (nu * nu / (s * s) - lam) * y[0]]

    y0 = _frobenius_start(nu, lam, r0)
    sol = solve_ivp(rhs, (r0, r1), y0, method="DOP853", rtol=rtol, atol=1e-14 * max(1.0, abs(y0[1])))
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise ShootingError(f"integration failed for nu={nu}, lambda={lam}: {sol.message}")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def legendre_shooting(gamma: float, n: int, lam: float, rtol: float = 1e-12) -> float:
    """Normalized Wronskian mismatch at r = pi/2 between the two regular pole solutions.

    Zeros in ``lam`` are the eigenvalues of the n-th Fourier block.
    """
    if gamma < 1.0 or lam < 0:
        raise ValueError("need gamma >= 1 and lambda >= 0")
    nu = abs(n) * gamma
    mid = 0.5 * math.pi
    fl, dfl = _integrate(nu, lam, FROBENIUS_R0, mid, rtol)
    # The equation is invariant under r -> pi - r, so the solution regular at
    # the south pole is the reflection of the north one: same value, derivative
    # of opposite sign at the equator.
    fr, dfr = fl, -dfl
    w = fl * dfr - dfl * fr
    return w / math.sqrt((fl * fl + dfl * dfl) * (fr * fr + dfr * dfr))


def shooting_eigenvalues(gamma: float, n: int, lambda_max: float, step: float = SCAN_STEP) -> list[float]:
    """Bracket sign changes of the mismatch on a scan, then refine to width 1e-10."""
    grid = np.arange(0.0, lambda_max + step, step)
    vals = [legendre_shooting(gamma, n, float(x)) for x in grid]
    roots = []
    for (a, fa), (b, fb) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if abs(fa) < 1e-12:
            roots.append(float(a))
        elif fa * fb < 0:
            root = brentq(lambda x: legendre_shooting(gamma, n, x), a, b, xtol=BRACKET_WIDTH, rtol=1e-15)
            roots.append(float(root))
    return [r for r in roots if r <= lambda_max]


def oracle_spectrum(angle: float, lambda_max: float) -> EigenvalueList:
    """Spectrum assembled from shooting roots alone."""
    gamma = _gamma(angle)
    raw = []
    n = 0
    while n * gamma * (n * gamma + 1.0) <= lambda_max:
        for k, lam in enumerate(shooting_eigenvalues(gamma, n, lambda_max)):
            raw.append((lam, (n, k)))
            if n:
                raw.append((lam, (-n, k)))
        n += 1
    raw.sort()
    entries: list[EigenEntry] = []
    for lam, label in raw:
        if entries and abs(lam - entries[-1].lam) <= 1e-8 * max(1.0, lam):
            entries[-1].multiplicity += 1
            entries[-1].labels.append(label)
            entries[-1].samples.append(lam)
        else:
            entries.append(EigenEntry(lam, 1, [label], [lam]))
    return EigenvalueList(entries)


# ----------------------------------------------------------------- one-forms


def scalar_to_oneform_spectrum(scalar: EigenvalueList) -> EigenvalueList:
    """Hodge Laplacian on one-forms: exact and coexact copies of every nonzero eigenvalue."""
    return EigenvalueList(
        [
            EigenEntry(e.lam, 2 * e.multiplicity, list(e.labels) * 2)
            for e in scalar.entries
            if abs(e.lam) > MERGE_TOL
        ]
    )


def check_spectral_bounds(spectrum: EigenvalueList) -> dict:
    lam1 = spectrum.nonzero_min()
    oneform = scalar_to_oneform_spectrum(spectrum)
    return {
        "weiss_ok": bool(lam1 >= 2.0 - MERGE_TOL),
        "weiss_equality": bool(abs(lam1 - 2.0) <= 1e-9),
        "oneform_gap_ok": all(e.lam > 1.0 for e in oneform.entries),
        "lambda_1": lam1,
    }


# --------------------------------------------------------------- text format


def dumps_spectrum(spectrum: EigenvalueList, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.extend(f"{e.lam!r} {e.multiplicity}" for e in spectrum.entries)
    return "\n".join(lines) + "\n"


def loads_spectrum(text: str) -> EigenvalueList:
    """Parse ``lambda multiplicity`` lines; '#' starts a comment."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'lambda multiplicity'")
        lam, mult = float(parts[0]), int(parts[1])
        if mult < 1:
            raise ValueError(f"line {lineno}: multiplicity must be positive")
        entries.append(EigenEntry(lam, mult, []))
    entries.sort(key=lambda e: e.lam)
    return EigenvalueList(entries)
