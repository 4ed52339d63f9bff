import numpy as np
import pytest

from casimir_surface.bem import (
    ConditioningError,
    IndexMap,
    KernelMatrix,
    MeshError,
    SurfaceSystem,
    assemble_Grs,
    assemble_Mr,
    hamiltonian_energy_term,
    make_sphere_mesh,
    richardson_extrapolate,
    surface_energy_term,
)
from casimir_surface.bem.energy import _window_weights, lu_logdet
from casimir_surface.bem.operators import AssemblyError, field_blocks, reciprocity_sign
from casimir_surface.materials import MaterialModel, MediumAssignment

from conftest import EPS2, sphere_pair


def _S(M):
    return np.diag(reciprocity_sign(len(M) // 2))


def _rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    return Q if np.linalg.det(Q) > 0 else -Q


def test_body_operator_reciprocity():
    a, _ = sphere_pair(1)
    M = assemble_Mr(a, EPS2, 1.0).data
    S = _S(M)
    n = len(M) // 2
    assert np.abs(M[:n, :n] - M[:n, :n].T).max() <= 1e-12 * np.abs(M).max()
    assert np.abs(M.T - S @ M @ S).max() <= 1e-12 * np.abs(M).max()


def test_coupling_reciprocity():
    a, b = sphere_pair(1)
    G12 = assemble_Grs(a, b, EPS2, 1.0).data
    G21 = assemble_Grs(b, a, EPS2, 1.0).data
    assert np.abs(G12.T - _S(G12) @ G21 @ _S(G12)).max() <= 1e-12 * np.abs(G12).max()


def test_translated_body_has_identical_operator():
    a = make_sphere_mesh(1.0, 1, material_index=0)
    b = a.translated([3.0, -2.0, 5.0])
    Ma, Mb = assemble_Mr(a, EPS2, 0.8).data, assemble_Mr(b, EPS2, 0.8).data
    assert np.abs(Ma - Mb).max() <= 1e-12 * np.abs(Ma).max()


def test_body_operator_is_linear_in_the_two_media():
    a = make_sphere_mesh(1.0, 1, material_index=0)
    vac = MaterialModel.vacuum()
    m2 = MediumAssignment(vac, [MaterialModel.constant(2.0)])
    m4 = MediumAssignment(vac, [MaterialModel.constant(4.0)])
    diff = assemble_Mr(a, m4, 1.0).data - assemble_Mr(a, m2, 1.0).data
    # inside contributions alone: the outer medium of a one-body system
    inner = lambda eps: SurfaceSystem([a], MediumAssignment(MaterialModel.constant(eps), [vac])).outer_self_operator(0, 1.0)
    assert np.abs(diff - (inner(4.0) - inner(2.0))).max() <= 1e-12 * np.abs(diff).max()


def test_coupling_decay():
    a = make_sphere_mesh(0.5, 0, material_index=0)
    vac = MediumAssignment(MaterialModel.vacuum(), [MaterialModel.constant(2.0)])
    norms = []
    for d in (4.0, 8.0):
        b = a.translated([0.0, 0.0, d])
        norms.append(np.abs(assemble_Grs(a, b, vac, 1.0).data).max())
    expected = (np.exp(-8.0) / 8.0) / (np.exp(-4.0) / 4.0)
    assert expected / 3 < norms[1] / norms[0] < 3 * expected


def test_screening_at_large_kappa():
    bodies = sphere_pair(0, d=6.0)
    M = assemble_Mr(bodies[0], EPS2, 20.0).data
    G = assemble_Grs(bodies[0], bodies[1], EPS2, 20.0).data
    assert np.linalg.norm(G) < 1e-12 * np.linalg.norm(M)
    assert abs(surface_energy_term(bodies, EPS2, 20.0)) < 1e-20


def test_overlap_rejected():
    a = make_sphere_mesh(1.0, 1, material_index=0)
    with pytest.raises(MeshError):
        SurfaceSystem([a, a.translated([0.0, 0.0, 1.0])], EPS2)


def test_nonpositive_kappa_rejected():
    with pytest.raises(ValueError):
        assemble_Mr(make_sphere_mesh(1.0, 0), EPS2, 0.0)


def test_kernel_matrix_checks():
    imap = IndexMap([2, 3])
    assert imap.size == 10 and imap.locate(5) == (1, 0, 1) and imap.locate(9) == (1, 1, 2)
    data = np.zeros((10, 10))
    data[7, 2] = np.nan
    with pytest.raises(AssemblyError, match=r"row \(1, 1, 0\) column \(0, 1, 0\)"):
        KernelMatrix(data, imap)
    with pytest.raises(ValueError):
        KernelMatrix(np.zeros((3, 3)), imap)


def test_singular_operator_diagnostic():
    with pytest.raises(ConditioningError, match="pivot"):
        lu_logdet(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_single_body_is_zero():
    a = make_sphere_mesh(1.0, 1, material_index=0)
    assert surface_energy_term([a], EPS2, 1.0) == 0.0
    assert hamiltonian_energy_term([a], EPS2, 1.0) == 0.0


def test_far_spheres_negligible():
    assert abs(surface_energy_term(sphere_pair(1, d=20.0), EPS2, 1.0)) < 1e-8


def test_routes_and_order():
    bodies = sphere_pair(1, d=3.0)
    two = surface_energy_term(bodies, EPS2, 0.7, method="two-body")
    ratio = surface_energy_term(bodies, EPS2, 0.7, method="ratio")
    assert two < 0
    assert ratio == pytest.approx(two, rel=1e-8)
    swapped = surface_energy_term(bodies[::-1], EPS2, 0.7)
    assert swapped == pytest.approx(two, rel=1e-12)
    assert hamiltonian_energy_term(bodies[::-1], EPS2, 0.7) == pytest.approx(
        hamiltonian_energy_term(bodies, EPS2, 0.7), rel=1e-12
    )


def test_unlike_bodies_and_three_bodies():
    vac = MaterialModel.vacuum()
    media = MediumAssignment(vac, [MaterialModel.constant(2.0), MaterialModel.constant(5.0, 1.5), MaterialModel.constant(3.0)])
    bodies = [
        make_sphere_mesh(1.0, 1, material_index=0),
        make_sphere_mesh(0.7, 1, center=(2.8, 0.0, 0.0), material_index=1),
        make_sphere_mesh(0.8, 1, center=(0.0, 2.9, 0.5), material_index=2),
    ]
    s = surface_energy_term(bodies, media, 0.9)
    h = hamiltonian_energy_term(bodies, media, 0.9)
    assert h == pytest.approx(s, rel=1e-8)
    assert surface_energy_term(bodies[:2], media, 0.9, method="two-body") == pytest.approx(
        surface_energy_term(bodies[:2], media, 0.9, method="ratio"), rel=1e-8
    )


@pytest.mark.parametrize("kappa", [0.3, 1.0, 2.5])
def test_like_dielectrics_attract(kappa):
    assert surface_energy_term(sphere_pair(1, d=2.6), EPS2, kappa) < 0


def test_rigid_translation_invariance(rng):
    bodies = sphere_pair(1, d=3.0)
    base = surface_energy_term(bodies, EPS2, 1.0)
    shift = rng.normal(size=3) * 5
    moved = surface_energy_term([b.translated(shift) for b in bodies], EPS2, 1.0)
    assert moved == pytest.approx(base, rel=1e-10)


def test_rotation_invariance(rng):
    bodies = sphere_pair(1, d=3.0)
    R = _rotation(rng)
    base = surface_energy_term(bodies, EPS2, 1.0)
    rotated = surface_energy_term([b.rotated(R) for b in bodies], EPS2, 1.0)
    assert rotated == pytest.approx(base, rel=1e-10)


def test_window_weights():
    pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 2.0, 1.0], [3.0, 0.0, 0.0]])
    assert np.array_equal(_window_weights(pts, np.zeros(3), 2.0), [1.0, 0.5, 0.25, 0.0])


def test_richardson_extrapolate():
    h = np.array([0.5, 0.25, 0.125])
    f = 3.0 + 2.0 * h - 5.0 * h**2
    assert richardson_extrapolate(h, f) == pytest.approx(3.0, rel=1e-13)
    with pytest.raises(ValueError):
        richardson_extrapolate([1.0], [1.0])


def test_field_blocks_signs():
    class I:
        D = np.array([[2.0]])
        F = np.array([[3.0]])
        C = np.array([[5.0]])

    B = field_blocks(I, 2.0, 1.5, 0.5)
    assert np.allclose(B, [[-1.0 - 1.5 * 0.25 * 3, 2.5], [-2.5, -2.0 / 1.5 - 2.0 * 0.25 * 3]])
