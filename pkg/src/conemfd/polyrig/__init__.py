"""Numerical infinitesimal rigidity of convex polyhedra in E^3 and H^3."""

from .polyhedra import (
    KINDS,
    SPACES,
    GeometryError,
    Polyhedron,
    build_regular,
    dihedral_angles,
    dump_polyhedron,
    face_angle_keys,
    face_angles,
    load_polyhedron,
    planarity_residuals,
)
from .rigidity import (
    FAIL,
    INDETERMINATE,
    PASS,
    RigidityReport,
    axis_scaling_fields,
    central_difference_jacobian,
    constraint_jacobians,
    containment_residual,
    rigidity_check,
    trivial_motion_basis,
)

__all__ = [
    "KINDS",
    "SPACES",
    "GeometryError",
    "Polyhedron",
    "build_regular",
    "dihedral_angles",
    "dump_polyhedron",
    "face_angle_keys",
    "face_angles",
    "load_polyhedron",
    "planarity_residuals",
    "FAIL",
    "INDETERMINATE",
    "PASS",
    "RigidityReport",
    "axis_scaling_fields",
    "central_difference_jacobian",
    "constraint_jacobians",
    "containment_residual",
    "rigidity_check",
    "trivial_motion_basis",
]
