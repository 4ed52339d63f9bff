import numpy as np
import pytest

from casimir_surface.bem import mesh
from casimir_surface.bem.mesh import MeshError, make_box_mesh, make_plate_mesh, make_sphere_mesh


@pytest.mark.parametrize("make", [
    lambda: make_sphere_mesh(1.0, 2),
    lambda: make_plate_mesh(8.0, 0.5, 1),
    lambda: make_box_mesh((1.0, 2.0, 3.0), (2, 3, 4), center=(1, 2, 3)),
])
def test_closed_and_orthonormal(make):
    m = make().check()
    assert m.closure_residual() < 1e-6
    frame = np.stack([m.t1, m.t2, m.normals], axis=1)
    assert np.abs(frame @ frame.transpose(0, 2, 1) - np.eye(3)).max() < 1e-12
    # right-handed: t1 x t2 = n
    assert np.allclose(np.cross(m.t1, m.t2), m.normals, atol=1e-12)


def test_sphere_area_and_counts():
    m = make_sphere_mesh(1.0, 2)
    assert abs(m.total_area / (4 * np.pi) - 1) < 0.01
    assert [make_sphere_mesh(1.0, r).n_panels for r in range(4)] == [20, 80, 320, 1280]
    assert m.volume() == pytest.approx(4 * np.pi / 3, rel=1e-12)


def test_outward_normals():
    m = make_sphere_mesh(2.0, 1, center=(1.0, -1.0, 0.5))
    assert np.all(np.einsum("ij,ij->i", m.centroids - m.center, m.normals) > 0)
    p = make_plate_mesh(4.0, 1.0, 0)
    assert p.volume() == pytest.approx(16.0)


def test_plate_refinement_grows_linearly():
    assert [mesh.plate_divisions(8.0, 0.5, r)[0] for r in (1, 2, 3)] == [6, 8, 10]


def test_rigid_motions():
    m = make_sphere_mesh(1.0, 1)
    t = m.translated([1.0, 2.0, 3.0])
    assert np.allclose(t.center, [1, 2, 3]) and np.allclose(t.vertices - m.vertices, [1, 2, 3])
    c, s = np.cos(0.3), np.sin(0.3)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    r = m.rotated(R)
    assert np.allclose(r.normals, m.normals @ R.T)
    assert r.closure_residual() < 1e-12


def test_file_round_trip(tmp_path):
    m = make_sphere_mesh(1.0, 1)
    path = tmp_path / "sphere.txt"
    mesh.write_panel_file(m, path)
    back = mesh.read_panel_file(path)
    assert back.has_connectivity
    assert np.allclose(back.vertices, m.vertices) and np.array_equal(back.faces, m.faces)
    panels = tmp_path / "panels.txt"
    mesh.write_panel_file(m, panels, triangles=False)
    p = mesh.read_panel_file(panels)
    assert not p.has_connectivity
    assert np.allclose(p.areas, m.areas) and np.allclose(p.normals, m.normals)


@pytest.mark.parametrize("text", ["1 2 3\n", "v 0 0 0\nf 1 2 3\n", "v 0 0 0\n0 0 0 1 0 0 1\n", "# only a comment\n"])
def test_malformed_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MeshError):
        mesh.read_panel_file(path)


def test_open_surface_rejected():
    from casimir_surface.bem.rwg import RWGBasis

    m = make_sphere_mesh(1.0, 0)
    opened = mesh.from_triangles(m.vertices, m.faces[1:])
    with pytest.raises(MeshError):
        RWGBasis(opened)
    with pytest.raises(MeshError):
        opened.check()


def test_duplicate_centroids_rejected():
    m = make_sphere_mesh(1.0, 0)
    dup = mesh.from_panels(np.vstack([m.centroids, m.centroids[:1]]), np.vstack([m.normals, -m.normals[:1]]),
                           np.concatenate([m.areas, m.areas[:1]]))
    with pytest.raises(MeshError):
        dup.check()
