import json
from pathlib import Path

import numpy as np
import pytest

from coulomb2d.elasticity import SQRT2, isotropic_modulus, rotate_modulus
from coulomb2d.fem.assembly import (
    SingularElement,
    assemble_full_stiffness,
    assemble_stiffness,
    assembly_threads,
    load_vector,
)
from coulomb2d.fem.mesh import DomainMesh, MeshError, load_mesh, mesh_from_json, read_gmsh22, rectangle_mesh

DATA = Path(__file__).parent / "data"


def unit_square(tags=("C", "T", "U", "T")):
    nodes = [[0, 0], [1, 0], [1, 1], [0, 1]]
    tris = [[0, 1, 2], [0, 2, 3]]
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    return nodes, tris, edges, list(tags)


def test_contact_chain_of_rectangle_bottom():
    mesh = rectangle_mesh(2.0, 1.0, 4, 2)
    c = mesh.contact
    assert c.size == 5
    np.testing.assert_allclose(c.normals, np.tile([0.0, -1.0], (5, 1)))
    np.testing.assert_allclose(c.tangents, np.tile([-1.0, 0.0], (5, 1)))
    # arc length grows along the tangent, i.e. right to left
    x = mesh.nodes[c.nodes, 0]
    assert np.all(np.diff(x) < 0)
    np.testing.assert_allclose(c.s, [0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_allclose(c.weights, [0.25, 0.5, 0.5, 0.5, 0.25])
    np.testing.assert_allclose(np.abs(c.tangent_angles), np.pi)


def test_triangles_reoriented_counter_clockwise():
    nodes, tris, edges, tags = unit_square()
    mesh = DomainMesh(nodes, [[0, 2, 1], [0, 3, 2]], edges, tags)
    assert np.all(mesh.areas > 0)


def test_untagged_boundary_defaults_to_traction():
    nodes, tris, edges, tags = unit_square()
    mesh = DomainMesh(nodes, tris, edges[:1] + edges[2:3], ["C", "U"])
    assert sorted(mesh.edge_tags.tolist()) == ["C", "T", "T", "U"]


def test_validation_errors():
    nodes, tris, edges, _ = unit_square()
    with pytest.raises(MeshError):
        DomainMesh(nodes, tris, edges, ["C", "T", "T", "T"])  # no clamped edge
    with pytest.raises(MeshError):
        DomainMesh(nodes, tris, edges, ["U", "T", "T", "T"])  # no contact edge
    with pytest.raises(MeshError):
        DomainMesh(nodes, tris, edges, ["C", "U", "T", "T"])  # shared corner node
    with pytest.raises(MeshError):
        DomainMesh(nodes, [[0, 1, 7]], edges, ["C", "T", "U", "T"])


def test_json_round_trip(tmp_path):
    mesh = rectangle_mesh(1.0, 1.0, 3, 3)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mesh.to_json()))
    back = load_mesh(path)
    np.testing.assert_array_equal(back.nodes, mesh.nodes)
    np.testing.assert_array_equal(back.contact.nodes, mesh.contact.nodes)
    with pytest.raises(MeshError):
        mesh_from_json({"nodes": [[0, 0]]})


def test_gmsh_reader():
    mesh = read_gmsh22(DATA / "square.msh")
    assert mesh.n_nodes == 9 and len(mesh.triangles) == 8
    assert mesh.contact.size == 3
    assert mesh.areas.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(mesh.contact.normals[:, 1], -1.0)
    same = load_mesh(DATA / "square.msh")
    np.testing.assert_array_equal(same.triangles, mesh.triangles)


def test_gmsh_reader_tag_map_and_errors(tmp_path):
    text = (DATA / "square.msh").read_text().replace('"U"', '"clamp"')
    p = tmp_path / "renamed.msh"
    p.write_text(text)
    with pytest.raises(MeshError):
        read_gmsh22(p)
    mesh = read_gmsh22(p, {"clamp": "U"})
    assert mesh.nodes_with("U").size == 3
    bad = tmp_path / "v4.msh"
    bad.write_text(text.replace("2.2 0 8", "4.1 0 8"))
    with pytest.raises(MeshError):
        read_gmsh22(bad)


# -- assembly ---------------------------------------------------------------------------------


def test_rigid_motions_have_zero_energy():
    mesh = rectangle_mesh(2.0, 1.0, 6, 3)
    K = assemble_full_stiffness(mesh, isotropic_modulus(1.0, 0.3))
    x, y = mesh.nodes.T
    for field in (np.column_stack([np.ones_like(x), 0 * x]), np.column_stack([0 * x, np.ones_like(x)]),
                  np.column_stack([-y, x])):
        u = field.ravel()
        assert np.abs(K @ u).max() < 1e-12


def test_uniform_strain_energy():
    m = rotate_modulus(isotropic_modulus(2.0, 0.2), 0.3)
    mesh = rectangle_mesh(1.0, 1.0, 2, 2)
    K = assemble_full_stiffness(mesh, m)
    eps = np.array([[0.3, -0.1], [-0.1, 0.2]])
    u = (mesh.nodes @ eps.T).ravel()
    e = np.array([eps[0, 0], eps[1, 1], SQRT2 * eps[0, 1]])
    assert u @ K @ u == pytest.approx(1.0 * e @ m.matrix @ e, rel=1e-12)


def test_zero_area_element_rejected():
    nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)
    tris = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    mesh = DomainMesh(nodes, tris, [(0, 1), (1, 2), (2, 3), (3, 0)], ["C", "T", "U", "T"])
    mesh.nodes[4] = [0.5, 0.0]  # collapse the first triangle
    with pytest.raises(SingularElement):
        assemble_full_stiffness(mesh, isotropic_modulus(1, 0.3))


def test_threads_env(monkeypatch):
    monkeypatch.setenv("COULOMB2D_THREADS", "3")
    assert assembly_threads() == 3
    monkeypatch.setenv("COULOMB2D_THREADS", "zero")
    assert assembly_threads() == 1
    mesh = rectangle_mesh(1.0, 1.0, 40, 30)
    m = isotropic_modulus(1.0, 0.3)
    K1 = assemble_full_stiffness(mesh, m, threads=1)
    K4 = assemble_full_stiffness(mesh, m, threads=4)
    assert abs(K1 - K4).max() == 0


def test_load_vector_totals():
    mesh = rectangle_mesh(2.0, 1.0, 4, 2)
    f = load_vector(mesh, body_force=(0.0, -3.0)).reshape(-1, 2)
    assert f[:, 1].sum() == pytest.approx(-6.0)
    # traction on both sides (each of length 1)
    f = load_vector(mesh, traction=(0.5, 0.0)).reshape(-1, 2)
    assert f[:, 0].sum() == pytest.approx(1.0)
    fn = load_vector(mesh, traction=lambda x, y: (0.0, x)).reshape(-1, 2)
    assert fn[:, 1].sum() == pytest.approx(2.0)  # x = 0 and x = 2 sides
    nodal = np.tile([1.0, 2.0], (mesh.n_nodes, 1))
    np.testing.assert_allclose(load_vector(mesh, nodal), load_vector(mesh, (1.0, 2.0)))


def test_dirichlet_elimination():
    mesh = rectangle_mesh(1.0, 1.0, 3, 3)
    st = assemble_stiffness(mesh, isotropic_modulus(1.0, 0.3))
    clamped = mesh.nodes_with("U")
    assert st.free.size == 2 * (mesh.n_nodes - clamped.size)
    u = st.solve_full(load_vector(mesh, (0.0, -1.0)))
    assert np.all(u.reshape(-1, 2)[clamped] == 0)
