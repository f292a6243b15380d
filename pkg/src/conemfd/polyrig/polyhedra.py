"""Convex polyhedra in Euclidean space and in the hyperboloid model of H^3.

Hyperbolic points live on ``<x, x> = -1, x_0 > 0`` in R^{1,3} with the form
diag(-1, 1, 1, 1).  A hyperbolic face is the section of the hyperboloid by a
linear hyperplane; its outward unit normal ``u`` is spacelike and the interior
dihedral angle between faces is ``arccos(-<u1, u2>)``.

All geometric maps below accept either plain arrays or :class:`DualArray`
vertex coordinates so the same code yields values and forward-mode Jacobians.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import dual
from .dual import DualArray

SPACES = ("euclidean3", "hyperbolic3")
KINDS = ("tetrahedron", "cube", "octahedron", "dodecahedron")
MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])
HYPERBOLOID_TOL = 1e-12
PLANARITY_TOL = 1e-10
CONVEXITY_TOL = 1e-10


class GeometryError(ValueError):
    pass


# ------------------------------------------------------------- primitives


def _comp(x, i):
    return x[..., i] if not isinstance(x, DualArray) else x[(slice(None),) * (x.value.ndim - 1) + (i,)]


def _stack_last(parts):
    duals = [p for p in parts if isinstance(p, DualArray)]
    if duals:
        lifted = [p if isinstance(p, DualArray) else duals[0]._lift(p) for p in parts]
        return dual.stack(lifted, axis=-1)
    return np.stack(parts, axis=-1)


def _sum_last(x):
    return x.sum(axis=-1) if isinstance(x, DualArray) else np.sum(x, axis=-1)


def euclid_dot(a, b):
    return _sum_last(a * b)


def minkowski_dot(a, b):
    return _sum_last(a * (b * np.array([-1.0, 1.0, 1.0, 1.0])))


def cross3(a, b):
    a0, a1, a2 = (_comp(a, i) for i in range(3))
    b0, b1, b2 = (_comp(b, i) for i in range(3))
    return _stack_last([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def _det3(a, b, c):
    return euclid_dot(a, cross3(b, c))


def cross4(a, b, c):
    """w with w . x = det[x; a; b; c] for every x in R^4."""
    comps = []
    idx = [0, 1, 2, 3]
    for i in range(4):
        rest = [j for j in idx if j != i]
        sub = [_stack_last([_comp(v, j) for j in rest]) for v in (a, b, c)]
        minor = _det3(*sub)
        comps.append(minor if i % 2 == 0 else -minor)
    return _stack_last(comps)


def det4(a, b, c, d):
    return euclid_dot(a, cross4(b, c, d))


def tangent_frame(x: np.ndarray) -> np.ndarray:
    """4x3 Minkowski-orthonormal basis of the tangent space of H^3 at x."""
    basis = []
    for e in np.eye(4)[1:]:
        v = e + minkowski_dot(e, x) * x
        for b in basis:
            v = v - minkowski_dot(v, b) * b
        basis.append(v / math.sqrt(minkowski_dot(v, v)))
    return np.column_stack(basis)


def hyperboloid_point(direction: np.ndarray, distance: float) -> np.ndarray:
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    return np.concatenate([[math.cosh(distance)], math.sinh(distance) * u])


# -------------------------------------------------------------- polyhedron


@dataclass(frozen=True)
class Edge:
    vertices: tuple[int, int]
    faces: tuple[int, int]


@dataclass
class Polyhedron:
    space: str
    vertices: np.ndarray
    faces: list[tuple[int, ...]]
    edges: list[Edge] = field(init=False)
    # +1/-1 per face so that the fan normal points outward
    orientation: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.space not in SPACES:
            raise GeometryError(f"unknown space {self.space!r}")
        self.vertices = np.asarray(self.vertices, dtype=float)
        dim = 3 if self.space == "euclidean3" else 4
        if self.vertices.ndim != 2 or self.vertices.shape[1] != dim:
            raise GeometryError(f"{self.space} vertices must have {dim} coordinates")
        self.faces = [tuple(int(i) for i in f) for f in self.faces]
        if self.space == "hyperbolic3":
            q = minkowski_dot(self.vertices, self.vertices)
            if np.any(np.abs(q + 1.0) > HYPERBOLOID_TOL) or np.any(self.vertices[:, 0] <= 0):
                raise GeometryError("hyperbolic vertices must lie on the upper hyperboloid sheet")
        self.edges = _derive_edges(self.faces, len(self.vertices))
        self.orientation = np.ones(len(self.faces))
        raw = face_normals(self, self.vertices, oriented=False)
        center = self.interior_point()
        side = euclid_dot(raw, center - self.vertices[[f[0] for f in self.faces]]) if self.space == "euclidean3" \
            else minkowski_dot(raw, np.broadcast_to(center, raw.shape))
        if np.any(np.abs(side) < 1e-14):
            raise GeometryError("degenerate face normal")
        self.orientation = -np.sign(side)
        res = planarity_residuals(self, self.vertices)
        if res.size and float(np.max(np.abs(res))) > PLANARITY_TOL:
            raise GeometryError(f"face not planar (residual {float(np.max(np.abs(res))):.3e})")
        # convex iff every vertex lies on the inner side of every face plane
        normals = face_normals(self, self.vertices)
        normals = normals / np.linalg.norm(normals, axis=-1, keepdims=True)
        if self.space == "euclidean3":
            anchors = self.vertices[[f[0] for f in self.faces]]
            height = normals @ self.vertices.T - np.sum(normals * anchors, axis=1)[:, None]
        else:
            height = (normals * np.diag(MINKOWSKI)) @ self.vertices.T
        scale = float(np.max(np.abs(self.vertices)))
        if float(np.max(height)) > CONVEXITY_TOL * scale:
            raise GeometryError("polyhedron is not convex")
        angles = dihedral_angles(self)
        if np.any(angles <= 0.0) or np.any(angles >= math.pi):
            raise GeometryError("dihedral angle outside (0, pi)")

    @property
    def nv(self) -> int:
        return len(self.vertices)

    @property
    def ncoords(self) -> int:
        return 3 * self.nv

    def interior_point(self) -> np.ndarray:
        c = self.vertices.mean(axis=0)
        if self.space == "hyperbolic3":
            c = c / math.sqrt(-minkowski_dot(c, c))
        return c

    def tangent_frames(self) -> np.ndarray:
        """(nv, dim, 3) bases in which vertex velocities are parametrized."""
        if self.space == "euclidean3":
            return np.broadcast_to(np.eye(3), (self.nv, 3, 3)).copy()
        return np.stack([tangent_frame(x) for x in self.vertices])

    def dual_vertices(self) -> DualArray:
        """Vertex coordinates seeded with one direction per velocity coordinate."""
        frames = self.tangent_frames()
        dim = self.vertices.shape[1]
        d = np.zeros((self.nv, dim, self.ncoords))
        for v in range(self.nv):
            d[v, :, 3 * v : 3 * v + 3] = frames[v]
        return DualArray(self.vertices, d)

    def displaced(self, velocity: np.ndarray, t: float) -> np.ndarray:
        """Vertices moved by t * velocity (tangent coordinates), reprojected to the model."""
        frames = self.tangent_frames()
        x = self.vertices + t * np.einsum("vij,vj->vi", frames, velocity.reshape(self.nv, 3))
        if self.space == "hyperbolic3":
            x = x / np.sqrt(-minkowski_dot(x, x))[:, None]
        return x

    def ambient_velocity(self, velocity: np.ndarray) -> np.ndarray:
        return np.einsum("vij,vj->vi", self.tangent_frames(), np.asarray(velocity).reshape(self.nv, 3))

    def to_dict(self) -> dict:
        return {"space": self.space, "vertices": self.vertices.tolist(), "faces": [list(f) for f in self.faces]}


def _derive_edges(faces, nv) -> list[Edge]:
    seen: dict[tuple[int, int], list[int]] = {}
    for fi, face in enumerate(faces):
        if len(face) < 3 or len(set(face)) != len(face):
            raise GeometryError(f"face {fi} is not a simple cycle")
        for a, b in zip(face, face[1:] + face[:1]):
            if not (0 <= a < nv and 0 <= b < nv):
                raise GeometryError(f"face {fi} references a missing vertex")
            seen.setdefault((min(a, b), max(a, b)), []).append(fi)
    edges = []
    for key in sorted(seen):
        fs = seen[key]
        if len(fs) != 2:
            raise GeometryError(f"edge {key} bounds {len(fs)} faces, expected 2")
        edges.append(Edge(key, (fs[0], fs[1])))
    return edges


def load_polyhedron(text: str) -> Polyhedron:
    data = json.loads(text)
    try:
        return Polyhedron(data["space"], np.array(data["vertices"], dtype=float), data["faces"])
    except KeyError as exc:
        raise GeometryError(f"polyhedron file lacks field {exc}") from exc


def dump_polyhedron(poly: Polyhedron) -> str:
    return json.dumps(poly.to_dict(), indent=1)


# ------------------------------------------------------------- geometry


def _take(x, idx):
    if isinstance(x, DualArray):
        return DualArray(x.value[idx], x.deriv[idx])
    return x[idx]


def face_normals(poly: Polyhedron, x, oriented: bool = True):
    """Fan-summed face normals (Euclidean cross products or Minkowski cross4), unnormalized."""
    out = []
    for fi, face in enumerate(poly.faces):
        face = list(face)
        total = None
        for i in range(1, len(face) - 1):
            a, b, c = (_take(x, face[0]), _take(x, face[i]), _take(x, face[i + 1]))
            if poly.space == "euclidean3":
                term = cross3(b - a, c - a)
            else:
                term = cross4(a, b, c) * np.array([-1.0, 1.0, 1.0, 1.0])
            total = term if total is None else total + term
        if oriented:
            total = total * float(poly.orientation[fi])
        out.append(total)
    return dual.stack(out) if isinstance(x, DualArray) else np.stack(out)


def unit_face_normals(poly: Polyhedron, x):
    n = face_normals(poly, x)
    if poly.space == "euclidean3":
        norm = dual.sqrt(euclid_dot(n, n))
    else:
        norm = dual.sqrt(minkowski_dot(n, n))
    if np.any(dual.value_of(norm) < 1e-14):
        raise GeometryError("degenerate face normal")
    return n / _expand(norm, n.shape[-1])


def dihedral_angles(poly: Polyhedron, x=None):
    """Interior dihedral angle per edge (ordered like ``poly.edges``)."""
    x = poly.vertices if x is None else x
    u = unit_face_normals(poly, x)
    f1 = [e.faces[0] for e in poly.edges]
    f2 = [e.faces[1] for e in poly.edges]
    u1, u2 = _take(u, f1), _take(u, f2)
    c = -(euclid_dot(u1, u2) if poly.space == "euclidean3" else minkowski_dot(u1, u2))
    return dual.arccos(c)


def face_angle_keys(poly: Polyhedron) -> list[tuple[int, int]]:
    return [(fi, v) for fi, face in enumerate(poly.faces) for v in face]


def face_angles(poly: Polyhedron, x=None):
    """Interior angle at every face corner, ordered like :func:`face_angle_keys`."""
    x = poly.vertices if x is None else x
    centre, prev, nxt = [], [], []
    for face in poly.faces:
        k = len(face)
        for i, v in enumerate(face):
            centre.append(v)
            prev.append(face[(i - 1) % k])
            nxt.append(face[(i + 1) % k])
    v, a, b = _take(x, centre), _take(x, prev), _take(x, nxt)
    if poly.space == "euclidean3":
        p, q = a - v, b - v
        dot = euclid_dot
    else:
        # projection to the tangent space at v: w + <w, v> v
        vv = v
        p = a + vv * _expand(minkowski_dot(a, vv), 4)
        q = b + vv * _expand(minkowski_dot(b, vv), 4)
        dot = minkowski_dot
    cosang = dot(p, q) / dual.sqrt(dot(p, p) * dot(q, q))
    return dual.arccos(cosang)


def _expand(s, dim):
    if isinstance(s, DualArray):
        return dual.stack([s] * dim, axis=-1)
    return s[..., None]


def planarity_residuals(poly: Polyhedron, x=None):
    """One normalized determinant per extra vertex of each face with more than 3 vertices."""
    x = poly.vertices if x is None else x
    xv = dual.value_of(x)
    rows = []
    for face in poly.faces:
        for j in face[3:]:
            pts = [_take(x, i) for i in (face[0], face[1], face[2], j)]
            vals = [xv[i] for i in (face[0], face[1], face[2], j)]
            if poly.space == "euclidean3":
                a, b, c, d = pts
                det = _det3(b - a, c - a, d - a)
                scale = np.prod([np.linalg.norm(vals[k] - vals[0]) for k in (1, 2, 3)])
            else:
                det = det4(*pts)
                scale = np.prod([np.linalg.norm(v) for v in vals])
            rows.append(det * (1.0 / scale))
    if not rows:
        return DualArray(np.zeros(0), np.zeros((0, x.nseed))) if isinstance(x, DualArray) else np.zeros(0)
    return dual.stack(rows) if isinstance(x, DualArray) else np.array(rows)


# -------------------------------------------------------- regular solids


def _unit_solid(kind: str) -> np.ndarray:
    if kind == "tetrahedron":
        pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    elif kind == "cube":
        pts = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
    elif kind == "octahedron":
        pts = np.vstack([np.eye(3), -np.eye(3)])
    elif kind == "dodecahedron":
        phi = (1.0 + math.sqrt(5.0)) / 2.0
        pts = [list(p) for p in itertools.product((-1.0, 1.0), repeat=3)]
        for a, b in itertools.product((-1.0, 1.0), repeat=2):
            pts += [[0.0, a / phi, b * phi], [a / phi, b * phi, 0.0], [a * phi, 0.0, b / phi]]
        pts = np.array(pts)
    else:
        raise GeometryError(f"unknown solid {kind!r}")
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def _hull_faces(pts: np.ndarray) -> list[tuple[int, ...]]:
    """Faces of a convex point set as counterclockwise (from outside) index cycles."""
    hull = ConvexHull(pts)
    groups: list[tuple[np.ndarray, set[int]]] = []
    for eq, simplex in zip(hull.equations, hull.simplices):
        for normal, members in groups:
            if np.allclose(normal, eq, atol=1e-9):
                members.update(int(i) for i in simplex)
                break
        else:
            groups.append((eq, set(int(i) for i in simplex)))
    faces = []
    for eq, members in groups:
        n = eq[:3]
        idx = sorted(members)
        centre = pts[idx].mean(axis=0)
        e1 = pts[idx[0]] - centre
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        ang = [math.atan2((pts[i] - centre) @ e2, (pts[i] - centre) @ e1) for i in idx]
        faces.append(tuple(i for _, i in sorted(zip(ang, idx))))
    faces.sort()
    return faces


def build_regular(kind: str, space: str, size: float) -> Polyhedron:
    """Regular solid with vertices at distance ``size`` from its centre.

    Euclidean: circumradius ``size``.  Hyperbolic: vertices at hyperbolic
    distance ``size`` from (1, 0, 0, 0).
    """
    if not size > 0:
        raise GeometryError("size must be positive")
    if space not in SPACES:
        raise GeometryError(f"unknown space {space!r}")
    u = _unit_solid(kind)
    faces = _hull_faces(u)
    if space == "euclidean3":
        verts = size * u
    else:
        verts = np.stack([hyperboloid_point(d, size) for d in u])
    return Polyhedron(space, verts, faces)
