"""Infinitesimal rigidity of convex polyhedra relative to their dihedral angles.

Unknowns are vertex velocities, three per vertex (tangent-frame coordinates
in the hyperbolic case).  The constraint maps are face planarity and the
dihedral angles; their joint Jacobian's numerical kernel is compared with the
trivial motions, and in the Euclidean case with the face-angle Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .polyhedra import (
    MINKOWSKI,
    Polyhedron,
    dihedral_angles,
    face_angles,
    minkowski_dot,
    planarity_residuals,
)

DEFAULT_TOL = 1e-8
MIN_GAP = 1e3
CONTAINMENT_TOL = 1e-8
FACE_TOL = 1e-6
TANGENCY_TOL = 1e-10

PASS, FAIL, INDETERMINATE = "PASS", "FAIL", "INDETERMINATE"


@dataclass
class ConstraintJacobians:
    J_planarity: np.ndarray
    J_dihedral: np.ndarray
    J_face: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.J_planarity, self.J_dihedral])


def constraint_jacobians(poly: Polyhedron) -> ConstraintJacobians:
    """Forward-mode Jacobians with respect to the 3 * nv velocity coordinates."""
    x = poly.dual_vertices()
    cols = poly.ncoords
    plan = planarity_residuals(poly, x)
    jp = plan.deriv if plan.value.size else np.zeros((0, cols))
    return ConstraintJacobians(
        J_planarity=np.array(jp),
        J_dihedral=np.array(dihedral_angles(poly, x).deriv),
        J_face=np.array(face_angles(poly, x).deriv),
    )


def central_difference_jacobian(poly: Polyhedron, which: str, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of one constraint map; a test oracle."""
    fn = {
        "planarity": lambda x: planarity_residuals(poly, x),
        "dihedral": lambda x: dihedral_angles(poly, x),
        "face": lambda x: face_angles(poly, x),
    }[which]
    scale = float(np.max(np.abs(poly.vertices)))
    h = 1e-6 * scale if h is None else h
    cols = []
    for k in range(poly.ncoords):
        e = np.zeros(poly.ncoords)
        e[k] = 1.0
        cols.append((np.asarray(fn(poly.displaced(e, h))) - np.asarray(fn(poly.displaced(e, -h)))) / (2 * h))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


# ---------------------------------------------------------- trivial motions


def _to_tangent(poly: Polyhedron, ambient: np.ndarray) -> np.ndarray:
    """Tangent-frame coordinates of an ambient velocity field, flattened."""
    frames = poly.tangent_frames()
    if poly.space == "euclidean3":
        return ambient.reshape(-1).copy()
    # frames are Minkowski-orthonormal, so coordinates are Minkowski products
    return np.einsum("vik,ij,vj->vk", frames, MINKOWSKI, ambient).reshape(-1)


def lorentz_generators() -> list[np.ndarray]:
    """Basis of so(1,3): A = J M with M antisymmetric."""
    gens = []
    for i in range(4):
        for j in range(i + 1, 4):
            m = np.zeros((4, 4))
            m[i, j], m[j, i] = 1.0, -1.0
            gens.append(MINKOWSKI @ m)
    return gens


@dataclass
class TrivialMotions:
    fields: list[np.ndarray]
    similarity_extra: list[np.ndarray] = field(default_factory=list)

    @property
    def all(self) -> list[np.ndarray]:
        return self.fields + self.similarity_extra


def trivial_motion_basis(poly: Polyhedron) -> TrivialMotions:
    """Infinitesimal isometries (plus global scaling in the Euclidean case)."""
    x = poly.vertices
    if poly.space == "euclidean3":
        fields = [np.tile(e, (poly.nv, 1)).reshape(-1) for e in np.eye(3)]
        fields += [np.cross(w, x).reshape(-1) for w in np.eye(3)]
        return TrivialMotions(fields, [x.reshape(-1).copy()])
    fields = [_to_tangent(poly, x @ a.T) for a in lorentz_generators()]
    return TrivialMotions(fields)


def axis_scaling_fields(poly: Polyhedron) -> list[np.ndarray]:
    """Velocity fields x_i e_i; they preserve all dihedral angles of an axis-aligned box."""
    if poly.space != "euclidean3":
        raise ValueError("axis scalings are defined for Euclidean polyhedra only")
    out = []
    for i in range(3):
        v = np.zeros_like(poly.vertices)
        v[:, i] = poly.vertices[:, i]
        out.append(v.reshape(-1))
    return out


def containment_residual(kernel: np.ndarray, fields) -> float:
    """max over fields of |t - P_K t| / |t|, with kernel columns orthonormal."""
    worst = 0.0
    for t in fields:
        t = np.asarray(t, dtype=float)
        r = t - kernel @ (kernel.T @ t)
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(t)))
    return worst


# ---------------------------------------------------------------- the check


@dataclass
class RigidityReport:
    space: str
    singular_values: list[float]
    kernel_dim: int
    trivial_dim: int
    trivial_containment_residual: float
    face_angle_inclusion_residual: float | None
    gap: float
    tangency_residual: float | None
    verdict: str
    tol_rel: float
    diagnostics: list[str] = field(default_factory=list)
    kernel: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "verdict": self.verdict,
            "kernel_dim": self.kernel_dim,
            "trivial_dim": self.trivial_dim,
            "trivial_containment_residual": self.trivial_containment_residual,
            "face_angle_inclusion_residual": self.face_angle_inclusion_residual,
            "gap": self.gap,
            "tangency_residual": self.tangency_residual,
            "tol_rel": self.tol_rel,
            "singular_values": list(self.singular_values),
            "diagnostics": list(self.diagnostics),
        }


def numerical_kernel(matrix: np.ndarray, tol_rel: float):
    """(singular values padded to the column count, kernel basis, gap, ambiguous)."""
    rows, cols = matrix.shape
    _, s, vt = np.linalg.svd(matrix, full_matrices=True)
    sigma = np.zeros(cols)
    sigma[: len(s)] = s
    smax = float(sigma[0]) if cols else 0.0
    if smax == 0.0:
        return sigma, np.eye(cols), math.inf, False
    thresh = tol_rel * smax
    keep = sigma > thresh
    kernel = vt[~keep].T
    kept_min = float(sigma[keep].min())
    dropped = sigma[~keep]
    # exact zeros (padding) count as rounding-level values so the gap stays finite
    floor = np.finfo(float).eps * smax
    dropped_max = max(float(dropped.max()) if dropped.size else 0.0, floor)
    gap = kept_min / dropped_max
    ambiguous = bool(np.any((sigma > thresh / 10.0) & (sigma < thresh * 10.0)))
    return sigma, kernel, gap, ambiguous


def rigidity_check(
    poly: Polyhedron,
    tol_rel: float = DEFAULT_TOL,
    face_tol: float = FACE_TOL,
    containment_tol: float = CONTAINMENT_TOL,
) -> RigidityReport:
    jac = constraint_jacobians(poly)
    sigma, kernel, gap, ambiguous = numerical_kernel(jac.stacked, tol_rel)
    triv = trivial_motion_basis(poly)
    containment = containment_residual(kernel, triv.all)
    kdim = kernel.shape[1]
    diagnostics = []
    face_res = tangency = None

    if poly.space == "euclidean3":
        face_res = max((float(np.linalg.norm(jac.J_face @ k)) for k in kernel.T), default=0.0)
        ok = face_res <= face_tol and containment <= containment_tol
    else:
        ambient = np.stack([poly.ambient_velocity(k) for k in kernel.T]) if kdim else np.zeros((0, poly.nv, 4))
        tangency = float(np.max(np.abs(minkowski_dot(ambient, poly.vertices[None])))) if kdim else 0.0
        ok = kdim == len(triv.fields) and containment <= containment_tol

    if ambiguous:
        diagnostics.append(f"singular value within 10x of the threshold {tol_rel * sigma[0]:.3e}")
    if gap < MIN_GAP:
        diagnostics.append(f"spectral gap {gap:.3e} below {MIN_GAP:.0e}")
    if containment > containment_tol:
        diagnostics.append(f"trivial motions leave the kernel (residual {containment:.3e})")
    verdict = INDETERMINATE if ambiguous or gap < MIN_GAP else (PASS if ok else FAIL)

    return RigidityReport(
        space=poly.space,
        singular_values=[float(s) for s in sigma],
        kernel_dim=kdim,
        trivial_dim=len(triv.all),
        trivial_containment_residual=containment,
        face_angle_inclusion_residual=face_res,
        gap=gap,
        tangency_residual=tangency,
        verdict=verdict,
        tol_rel=tol_rel,
        diagnostics=diagnostics,
        kernel=kernel,
    )


# ----------------------------------------------------------- gauge changes


def random_isometry(space: str, rng: np.random.Generator):
    """A random orientation-preserving isometry as a function on vertex arrays."""
    rot = Rotation.random(random_state=rng).as_matrix()
    if space == "euclidean3":
        shift = rng.normal(size=3)
        return lambda x: x @ rot.T + shift
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    t = rng.uniform(0.0, 1.0)
    boost = np.eye(4)
    boost[0, 0] = math.cosh(t)
    boost[0, 1:] = boost[1:, 0] = math.sinh(t) * direction
    boost[1:, 1:] += (math.cosh(t) - 1.0) * np.outer(direction, direction)
    full = np.eye(4)
    full[1:, 1:] = rot
    m = boost @ full
    return lambda x: x @ m.T


def moved(poly: Polyhedron, isometry) -> Polyhedron:
    x = isometry(poly.vertices)
    if poly.space == "hyperbolic3":
        # remove rounding drift off the hyperboloid
        x = x / np.sqrt(-minkowski_dot(x, x))[:, None]
    return Polyhedron(poly.space, x, poly.faces)
