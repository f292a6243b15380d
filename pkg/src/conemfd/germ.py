"""Singular germs of cone-manifolds and their validation.

A germ records the singular graph, per-edge (length, angle, twist) and, per
vertex, the spherical cone-surface link as a list of cone points.  Slots tie
each edge end to the link cone point it passes through.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import TWO_PI, check_kappa
from .polyrig.polyhedra import Polyhedron, dihedral_angles, minkowski_dot, tangent_frame

POSITION_TOL = 1e-12


class GermInputError(ValueError):
    """Malformed germ: dangling references, missing slots, bad structure."""


@dataclass(frozen=True)
class EdgeGerm:
    length: float
    angle: float
    twist: float = 0.0


@dataclass(frozen=True)
class GraphEdge:
    id: str
    # None marks a closed singular circle without vertices
    endpoints: tuple[str, str] | None


@dataclass(frozen=True)
class ConePoint:
    position: tuple[float, float, float]
    angle: float


@dataclass
class SingularGerm:
    kappa: int
    vertices: list[str]
    edges: list[GraphEdge]
    edge_data: dict[str, EdgeGerm]
    links: dict[str, list[ConePoint]]
    slots: dict[tuple[str, int], int] = field(default_factory=dict)

    def __post_init__(self):
        self.kappa = check_kappa(self.kappa)
        _check_structure(self)

    def edge_ends(self, vertex: str) -> list[tuple[str, int]]:
        return [
            (e.id, end)
            for e in self.edges
            if e.endpoints is not None
            for end in (0, 1)
            if e.endpoints[end] == vertex
        ]

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "vertices": list(self.vertices),
            "edges": [
                {
                    "id": e.id,
                    "endpoints": None if e.endpoints is None else list(e.endpoints),
                    "length": self.edge_data[e.id].length,
                    "angle": self.edge_data[e.id].angle,
                    "twist": self.edge_data[e.id].twist,
                }
                for e in self.edges
            ],
            "links": {
                v: [{"position": list(c.position), "angle": c.angle} for c in self.links[v]] for v in self.vertices
            },
            "slots": [
                {"edge": edge, "end": end, "cone_point": idx} for (edge, end), idx in sorted(self.slots.items())
            ],
        }


def _check_structure(g: SingularGerm) -> None:
    vset = set(g.vertices)
    if len(vset) != len(g.vertices):
        raise GermInputError("duplicate vertex id")
    ids = [e.id for e in g.edges]
    if len(set(ids)) != len(ids):
        raise GermInputError("duplicate edge id")
    for e in g.edges:
        if e.id not in g.edge_data:
            raise GermInputError(f"edge {e.id} has no germ data")
        if e.endpoints is not None:
            for v in e.endpoints:
                if v not in vset:
                    raise GermInputError(f"edge {e.id} references unknown vertex {v}")
    if set(g.edge_data) - set(ids):
        raise GermInputError("germ data for unknown edge")
    if set(g.links) != vset:
        raise GermInputError("links must be given for exactly the graph vertices")
    for v, link in g.links.items():
        if len(link) < 2:
            raise GermInputError(f"link of {v} has fewer than 2 cone points")
        pos = np.array([c.position for c in link], dtype=float)
        if pos.shape[1] != 3 or np.any(np.abs(np.linalg.norm(pos, axis=1) - 1.0) > 1e-9):
            raise GermInputError(f"link of {v}: positions must be unit 3-vectors")
        for i in range(len(pos)):
            for j in range(i):
                if np.linalg.norm(pos[i] - pos[j]) <= POSITION_TOL:
                    raise GermInputError(f"link of {v}: cone points {j} and {i} coincide")
    ends = {(e.id, end): e.endpoints[end] for e in g.edges if e.endpoints is not None for end in (0, 1)}
    for key, idx in g.slots.items():
        if key not in ends:
            raise GermInputError(f"slot for unknown edge end {key}")
        if not 0 <= idx < len(g.links[ends[key]]):
            raise GermInputError(f"slot {key} points past the link of {ends[key]}")
    for key in ends:
        if key not in g.slots:
            raise GermInputError(f"edge end {key} has no slot")
    for v in g.vertices:
        used = [g.slots[k] for k in g.edge_ends(v)]
        if len(set(used)) != len(used):
            raise GermInputError(f"two edge ends share a cone point at {v}")


# ------------------------------------------------------------------ checks


@dataclass(frozen=True)
class Violation:
    code: str
    locus: str
    message: str
    severity: str = "error"


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def link_area(angles) -> float:
    """Area of a spherical cone-surface with these cone angles: 4 pi - sum(2 pi - a)."""
    angles = [float(a) for a in angles]
    for a in angles:
        if not 0.0 < a < TWO_PI:
            raise ValueError(f"cone angle {a} outside (0, 2pi)")
    return 2.0 * TWO_PI - sum(TWO_PI - a for a in angles)


def moduli_dim(ell: int) -> int:
    """Dimension of the moduli space of spherical cone structures on S^2 with ell cone points."""
    if ell < 2:
        raise ValueError("a spherical cone-surface has at least two cone points")
    return 1 if ell == 2 else 3 * ell - 6


def germ_param_dim(g: SingularGerm) -> int:
    return 3 * len(g.edges) + sum(moduli_dim(len(g.links[v])) for v in g.vertices)


def validate_germ(g: SingularGerm) -> ValidationReport:
    out: list[Violation] = []
    for e in g.edges:
        d = g.edge_data[e.id]
        if not 0.0 < d.angle < TWO_PI:
            out.append(Violation("V1", e.id, f"angle {d.angle!r} outside (0, 2pi)"))
        if not d.length > 0.0:
            out.append(Violation("V2", e.id, f"length {d.length!r} not positive"))
        if not 0.0 <= d.twist < d.angle:
            out.append(Violation("V3", e.id, f"twist {d.twist!r} outside [0, {d.angle!r})"))
        if g.kappa == 1 and d.length >= math.pi:
            out.append(Violation("W2", e.id, f"length {d.length!r} >= pi in spherical geometry", "warning"))
    for v in g.vertices:
        link = g.links[v]
        ends = g.edge_ends(v)
        for c in link:
            if not 0.0 < c.angle < TWO_PI:
                out.append(Violation("V1", v, f"link cone angle {c.angle!r} outside (0, 2pi)"))
        if len(ends) == 2 and len(link) == 2:
            out.append(Violation("W1", v, "two-point link: the vertex is removable", "warning"))
        elif len(ends) < 3:
            out.append(Violation("V4", v, f"valence {len(ends)} below 3"))
        if len(ends) != len(link):
            out.append(Violation("V4", v, f"valence {len(ends)} differs from {len(link)} link cone points"))
        for edge, end in ends:
            a_edge = g.edge_data[edge].angle
            a_link = link[g.slots[(edge, end)]].angle
            if a_edge != a_link:
                out.append(
                    Violation("V5", f"{edge}:{end}", f"edge angle {a_edge!r} differs from link angle {a_link!r} at {v}")
                )
        if all(0.0 < c.angle < TWO_PI for c in link):
            area = link_area([c.angle for c in link])
            if area <= 0.0:
                out.append(Violation("V6", v, f"link area {area!r} not positive"))
    return ValidationReport(out)


# -------------------------------------------------------------- file format


def germ_from_dict(data: dict) -> SingularGerm:
    try:
        edges, edge_data = [], {}
        for rec in data["edges"]:
            ends = rec["endpoints"]
            edges.append(GraphEdge(str(rec["id"]), None if ends is None else (str(ends[0]), str(ends[1]))))
            edge_data[str(rec["id"])] = EdgeGerm(float(rec["length"]), float(rec["angle"]), float(rec.get("twist", 0.0)))
        links = {
            str(v): [ConePoint(tuple(float(x) for x in c["position"]), float(c["angle"])) for c in pts]
            for v, pts in data["links"].items()
        }
        slots = {(str(s["edge"]), int(s["end"])): int(s["cone_point"]) for s in data["slots"]}
        return SingularGerm(int(data["kappa"]), [str(v) for v in data["vertices"]], edges, edge_data, links, slots)
    except (KeyError, TypeError, IndexError) as exc:
        raise GermInputError(f"malformed germ document: {exc!r}") from exc


def loads_germ(text: str) -> SingularGerm:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GermInputError(f"not a JSON document: {exc}") from exc
    return germ_from_dict(data)


def dumps_germ(g: SingularGerm) -> str:
    # json writes floats with repr, the shortest round-trip decimal
    return json.dumps(g.to_dict(), indent=1) + "\n"


# ----------------------------------------------------------------- doubling


def _edge_length(poly: Polyhedron, a: int, b: int) -> float:
    x, y = poly.vertices[a], poly.vertices[b]
    if poly.space == "euclidean3":
        return float(np.linalg.norm(y - x))
    return float(np.arccosh(max(1.0, -minkowski_dot(x, y))))


def _direction(poly: Polyhedron, v: int, w: int) -> np.ndarray:
    """Unit direction at vertex v toward w, in the vertex's orthonormal tangent frame."""
    x, y = poly.vertices[v], poly.vertices[w]
    if poly.space == "euclidean3":
        d = y - x
    else:
        t = y + minkowski_dot(y, x) * x
        d = np.einsum("ik,ij,j->k", tangent_frame(x), np.diag([-1.0, 1.0, 1.0, 1.0]), t)
    return d / np.linalg.norm(d)


def double_polyhedron(poly: Polyhedron) -> SingularGerm:
    """Germ of the double of a convex polyhedron across all of its faces."""
    kappa = 0 if poly.space == "euclidean3" else -1
    dihedral = np.asarray(dihedral_angles(poly))
    angles = [float(2.0 * a) for a in dihedral]
    for a in angles:
        if not 0.0 < a < TWO_PI:
            raise ValueError("doubled angle outside (0, 2pi): polyhedron is not convex")
    vid = [f"v{i}" for i in range(poly.nv)]
    edges, edge_data = [], {}
    links: dict[str, list[ConePoint]] = {v: [] for v in vid}
    slots = {}
    for k, (edge, angle) in enumerate(zip(poly.edges, angles)):
        a, b = edge.vertices
        eid = f"e{k}"
        edges.append(GraphEdge(eid, (vid[a], vid[b])))
        edge_data[eid] = EdgeGerm(_edge_length(poly, a, b), angle, 0.0)
        for end, (v, w) in enumerate(((a, b), (b, a))):
            slots[(eid, end)] = len(links[vid[v]])
            links[vid[v]].append(ConePoint(tuple(float(c) for c in _direction(poly, v, w)), angle))
    return SingularGerm(kappa, vid, edges, edge_data, links, slots)
