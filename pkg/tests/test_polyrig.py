import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conemfd.polyrig import (
    KINDS,
    PASS,
    GeometryError,
    Polyhedron,
    axis_scaling_fields,
    build_regular,
    central_difference_jacobian,
    constraint_jacobians,
    containment_residual,
    dihedral_angles,
    dump_polyhedron,
    face_angle_keys,
    face_angles,
    load_polyhedron,
    planarity_residuals,
    rigidity_check,
    trivial_motion_basis,
)
from conemfd.polyrig.polyhedra import minkowski_dot
from conemfd.polyrig.rigidity import lorentz_generators, moved, random_isometry

TETRA = math.acos(1.0 / 3.0)


def _normal_oracle_dihedrals(poly):
    """Euclidean dihedral angles from outward normals built with numpy alone."""
    centre = poly.vertices.mean(axis=0)
    normals = []
    for f in poly.faces:
        p = poly.vertices[list(f)]
        n = np.cross(p[1] - p[0], p[2] - p[0])
        if np.dot(n, p[0] - centre) < 0:
            n = -n
        normals.append(n / np.linalg.norm(n))
    return [math.pi - math.acos(np.dot(normals[e.faces[0]], normals[e.faces[1]])) for e in poly.edges]


def test_cube_counts_and_angles():
    cube = build_regular("cube", "euclidean3", 1.0)
    assert (cube.nv, len(cube.faces), len(cube.edges)) == (8, 6, 12)
    assert np.allclose(dihedral_angles(cube), math.pi / 2, atol=1e-14)
    assert np.allclose(face_angles(cube), math.pi / 2, atol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_euclidean_dihedrals_match_normal_oracle(kind):
    poly = build_regular(kind, "euclidean3", 1.3)
    assert np.allclose(dihedral_angles(poly), _normal_oracle_dihedrals(poly), atol=1e-13)


def test_tetrahedron_and_octahedron_angles():
    tet = build_regular("tetrahedron", "euclidean3", 1.0)
    assert np.allclose(dihedral_angles(tet), TETRA, atol=1e-14)
    assert np.allclose(face_angles(tet), math.pi / 3, atol=1e-14)
    octa = build_regular("octahedron", "euclidean3", 1.0)
    assert np.allclose(dihedral_angles(octa), math.acos(-1.0 / 3.0), atol=1e-14)


def test_hyperbolic_tetrahedron_small_size_limit():
    sizes = (0.1, 0.05, 0.025)
    a = [float(np.mean(dihedral_angles(build_regular("tetrahedron", "hyperbolic3", s)))) for s in sizes]
    # the defect is even in the size: two Richardson steps remove s^2 and s^4
    r1 = [(4 * a[1] - a[0]) / 3, (4 * a[2] - a[1]) / 3]
    r2 = (16 * r1[1] - r1[0]) / 15
    assert abs(r2 - TETRA) < 1e-8
    assert abs(a[2] - TETRA) > abs(r2 - TETRA)


def test_hyperbolic_angles_shrink_with_size():
    prev = TETRA
    for s in (0.5, 1.0, 2.0):
        ang = dihedral_angles(build_regular("tetrahedron", "hyperbolic3", s))
        assert np.all(ang < prev)
        prev = float(np.max(ang))


@pytest.mark.parametrize("kind", KINDS)
def test_hyperbolic_face_angle_defect(kind):
    poly = build_regular(kind, "hyperbolic3", 1.0)
    ang = np.asarray(face_angles(poly))
    keys = face_angle_keys(poly)
    for fi, face in enumerate(poly.faces):
        total = sum(a for a, (f, _) in zip(ang, keys) if f == fi)
        assert total < (len(face) - 2) * math.pi


@pytest.mark.parametrize("kind", KINDS)
def test_hyperbolic_faces_planar(kind):
    poly = build_regular(kind, "hyperbolic3", 0.8)
    assert np.allclose(minkowski_dot(poly.vertices, poly.vertices), -1.0, atol=1e-12)
    res = np.asarray(planarity_residuals(poly))
    assert res.size == 0 or np.max(np.abs(res)) < 1e-12


def test_jacobian_shapes():
    cube = build_regular("cube", "euclidean3", 1.0)
    jac = constraint_jacobians(cube)
    assert jac.J_dihedral.shape == (12, 24)
    assert jac.J_planarity.shape[1] == 24
    tet = constraint_jacobians(build_regular("tetrahedron", "hyperbolic3", 1.0))
    assert tet.J_planarity.shape == (0, 12)


@pytest.mark.parametrize("space", ["euclidean3", "hyperbolic3"])
@pytest.mark.parametrize("kind", ["cube", "octahedron"])
def test_forward_mode_matches_central_differences(kind, space):
    poly = build_regular(kind, space, 0.9)
    jac = constraint_jacobians(poly)
    for which, j in (("dihedral", jac.J_dihedral), ("face", jac.J_face)):
        fd = central_difference_jacobian(poly, which)
        assert np.max(np.abs(fd - j)) <= 1e-7


def test_directional_derivatives_random_directions():
    rng = np.random.default_rng(3)
    poly = build_regular("dodecahedron", "hyperbolic3", 0.7)
    jac = constraint_jacobians(poly)
    h = 1e-6
    for _ in range(5):
        d = rng.normal(size=poly.ncoords)
        d /= np.linalg.norm(d)
        plus = np.asarray(dihedral_angles(poly, poly.displaced(d, h)))
        minus = np.asarray(dihedral_angles(poly, poly.displaced(d, -h)))
        assert np.max(np.abs((plus - minus) / (2 * h) - jac.J_dihedral @ d)) <= 1e-7


def test_translation_field_is_uniform():
    poly = build_regular("tetrahedron", "euclidean3", 1.0)
    triv = trivial_motion_basis(poly)
    assert len(triv.fields) == 6 and len(triv.similarity_extra) == 1
    t = triv.fields[0].reshape(-1, 3)
    assert np.all(t == t[0])


def test_lorentz_generators_are_tangent():
    x = build_regular("octahedron", "hyperbolic3", 1.5).vertices
    for a in lorentz_generators():
        assert np.max(np.abs(minkowski_dot(x @ a.T, x))) <= 1e-14


def test_scalings_preserve_cube_dihedrals():
    cube = build_regular("cube", "euclidean3", 1.0)
    jac = constraint_jacobians(cube)
    scaling = trivial_motion_basis(cube).similarity_extra[0]
    assert np.max(np.abs(jac.J_dihedral @ scaling)) <= 1e-13
    for f in axis_scaling_fields(cube):
        assert np.max(np.abs(jac.stacked @ f)) <= 1e-13


@pytest.mark.parametrize("size", [0.5, 1.0, 2.0])
def test_hyperbolic_tetrahedra_are_rigid(size):
    rep = rigidity_check(build_regular("tetrahedron", "hyperbolic3", size))
    assert rep.kernel_dim == 6 and rep.verdict == PASS
    assert rep.trivial_containment_residual <= 1e-8
    assert rep.tangency_residual <= 1e-10


@pytest.mark.parametrize("kind", ["cube", "octahedron", "dodecahedron"])
def test_other_hyperbolic_solids_are_rigid(kind):
    rep = rigidity_check(build_regular(kind, "hyperbolic3", 1.0))
    assert rep.kernel_dim == 6 and rep.verdict == PASS


def test_euclidean_cube_kernel():
    cube = build_regular("cube", "euclidean3", 1.0)
    rep = rigidity_check(cube)
    assert rep.kernel_dim >= 9
    assert rep.face_angle_inclusion_residual <= 1e-6
    assert containment_residual(rep.kernel, axis_scaling_fields(cube)) <= 1e-8
    assert rep.verdict == PASS


def test_euclidean_tetrahedron_kernel():
    rep = rigidity_check(build_regular("tetrahedron", "euclidean3", 1.0))
    assert rep.kernel_dim == 7 and rep.trivial_dim == 7
    assert rep.trivial_containment_residual <= 1e-8
    assert rep.verdict == PASS


@pytest.mark.parametrize("kind", KINDS)
def test_euclidean_face_angle_inclusion(kind):
    rep = rigidity_check(build_regular(kind, "euclidean3", 1.0))
    assert rep.face_angle_inclusion_residual <= 1e-6
    assert rep.trivial_containment_residual <= 1e-8


@pytest.mark.parametrize("space", ["euclidean3", "hyperbolic3"])
def test_gauge_invariance(space):
    base = build_regular("cube", space, 0.8)
    ref = rigidity_check(base)
    rng = np.random.default_rng(2024)
    for _ in range(10):
        rep = rigidity_check(moved(base, random_isometry(space, rng)))
        assert (rep.verdict, rep.kernel_dim) == (ref.verdict, ref.kernel_dim)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 2.5), st.sampled_from(KINDS))
def test_kernel_vectors_tangent(size, kind):
    rep = rigidity_check(build_regular(kind, "hyperbolic3", size))
    assert rep.tangency_residual <= 1e-10
    assert rep.trivial_containment_residual <= 1e-8


def test_report_serializes_singular_values():
    poly = build_regular("tetrahedron", "hyperbolic3", 1.0)
    data = rigidity_check(poly).to_dict()
    assert len(data["singular_values"]) == poly.ncoords
    json.dumps(data)


@pytest.mark.parametrize("space", ["euclidean3", "hyperbolic3"])
def test_file_round_trip(space):
    poly = build_regular("octahedron", space, 1.1)
    back = load_polyhedron(dump_polyhedron(poly))
    assert np.array_equal(back.vertices, poly.vertices)
    assert [tuple(f) for f in back.faces] == [tuple(f) for f in poly.faces]


def test_load_rejects_off_hyperboloid():
    data = json.loads(dump_polyhedron(build_regular("tetrahedron", "hyperbolic3", 1.0)))
    data["vertices"][0][0] += 1e-6
    with pytest.raises(GeometryError):
        load_polyhedron(json.dumps(data))


def test_rejects_nonplanar_and_nonconvex():
    cube = build_regular("cube", "euclidean3", 1.0)
    bent = cube.vertices.copy()
    bent[0] += 0.05 * bent[0]
    with pytest.raises(GeometryError):
        Polyhedron("euclidean3", bent, cube.faces)
    octa = build_regular("octahedron", "euclidean3", 1.0)
    dented = octa.vertices.copy()
    top = int(np.argmax(dented[:, 2]))
    dented[top] *= -0.5
    with pytest.raises(GeometryError):
        Polyhedron("euclidean3", dented, octa.faces)


def test_build_errors():
    with pytest.raises(ValueError):
        build_regular("icosahedron", "euclidean3", 1.0)
    with pytest.raises(ValueError):
        build_regular("cube", "euclidean3", 0.0)
