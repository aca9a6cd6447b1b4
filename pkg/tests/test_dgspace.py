import csv

import numpy as np
import pytest

from ldg_orlicz.dgspace import (DGSpace, OrthonormalBasis, average, export_samples, jump,
                                l2_project, local_gradient)
from ldg_orlicz.errors import UsageError
from ldg_orlicz.mesh import build_cartesian, refine_regular
from ldg_orlicz.quadrature import triangle_rule


@pytest.mark.parametrize("k", [1, 2, 3])
def test_reference_basis_orthonormal(k):
    b = OrthonormalBasis(k)
    x, w = triangle_rule(2 * k + 2)
    v = b.values(x)
    assert v.T @ (w[:, None] * v) == pytest.approx(np.eye(len(b)), abs=1e-12)
    assert len(b) == (k + 1) * (k + 2) // 2


def test_reference_gradients_fd():
    b = OrthonormalBasis(3)
    x = np.array([[0.2, 0.3], [0.6, 0.1]])
    h = 1e-6
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        fd = (b.values(x + e) - b.values(x - e)) / (2 * h)
        assert b.gradients(x)[:, :, d] == pytest.approx(fd, abs=1e-8)


def test_physical_mass_is_identity(space1):
    M = np.zeros((space1.n_cells, space1.nb, space1.nb))
    np.add.at(M, space1.q_cell, space1.q_weights[:, None, None] * space1.phi[:, :, None] * space1.phi[:, None, :])
    assert M == pytest.approx(np.broadcast_to(np.eye(space1.nb), M.shape), abs=1e-13)


def poly(k):
    def f(x):
        return np.column_stack([x[:, 0] ** k - 2 * x[:, 1] + 1, x[:, 0] * x[:, 1] ** (k - 1)])
    return f


@pytest.mark.parametrize("k", [1, 2])
def test_projection_reproduces_polynomials(k, mesh1):
    sp_ = DGSpace(mesh1, k)
    f = poly(k)
    u = l2_project(sp_, f, (2,))
    assert u.at_quadrature() == pytest.approx(f(sp_.q_points), abs=1e-12)
    pts = sp_.f_points[:, 1]
    cells = mesh1.face_cells[:, 0]
    assert u.evaluate(cells, pts) == pytest.approx(f(pts), abs=1e-12)
    assert len(u.vector) == mesh1.n_cells * 2 * (k + 1) * (k + 2) // 2


def test_projection_idempotent(space1, rng):
    u = space1.field(rng.standard_normal(space1.ndofs((2,))), (2,))
    assert l2_project(space1, u).vector == pytest.approx(u.vector, abs=1e-13)


def test_gradient_of_affine(space1):
    u = l2_project(space1, lambda x: np.column_stack([3 * x[:, 0] - x[:, 1], 2 * x[:, 1]]), (2,))
    g = u.gradient_at_quadrature()
    assert g == pytest.approx(np.broadcast_to([[3.0, -1.0], [0.0, 2.0]], g.shape), abs=1e-12)
    assert local_gradient(u).at_quadrature() == pytest.approx(g, abs=1e-12)


def test_traces_of_continuous_field_agree(space2):
    u = l2_project(space2, lambda x: np.column_stack([x[:, 0] ** 2, x[:, 0] * x[:, 1]]), (2,))
    inner = space2.mesh.interior_faces
    assert u.trace(0)[inner] == pytest.approx(u.trace(1)[inner], abs=1e-12)
    assert np.max(np.abs(jump(u)[np.isin(space2.jump_faces(), inner)])) < 1e-12


def test_jump_and_average_conventions(space1, rng):
    u = space1.field(rng.standard_normal(space1.ndofs((2,))), (2,))
    mesh = space1.mesh
    f = mesh.interior_faces[3]
    j = jump(u, [f])[0]
    n = mesh.face_normals[f]
    diff = u.trace(0)[f] - u.trace(1)[f]
    assert j == pytest.approx(diff[:, :, None] * n)
    assert average(u, [f])[0] == pytest.approx(0.5 * (u.trace(0)[f] + u.trace(1)[f]))
    b = mesh.dirichlet_faces[0]
    g = lambda x: np.ones((len(x), 2))  # noqa: E731
    assert jump(u, [b], g)[0] == pytest.approx((u.trace(0)[b] - 1.0)[:, :, None] * mesh.face_normals[b])
    assert average(u, [b])[0] == pytest.approx(u.trace(0)[b])


def test_jump_on_neumann_face_is_rejected():
    mesh = build_cartesian(((0, 1), (0, 1)), 0.5, dirichlet=lambda x: x[:, 0] < 1e-12)
    sp_ = DGSpace(mesh, 1)
    u = sp_.zeros((2,))
    with pytest.raises(UsageError):
        jump(u, mesh.neumann_faces)
    assert len(jump(u)) == len(sp_.jump_faces()) == mesh.n_faces - len(mesh.neumann_faces)


def test_prolongation_is_exact(mesh1, rng):
    coarse = DGSpace(mesh1, 2)
    fine = DGSpace(refine_regular(mesh1), 2)
    u = coarse.field(rng.standard_normal(coarse.ndofs((2,))), (2,))
    v = l2_project(fine, u)
    assert v.at_quadrature() == pytest.approx(u.evaluate(fine.mesh.parent[fine.q_cell], fine.q_points),
                                              abs=1e-12)
    with pytest.raises(UsageError):
        l2_project(DGSpace(build_cartesian(h=2.0), 1), u)


def test_field_arithmetic(space1, rng):
    a = space1.field(rng.standard_normal(space1.ndofs((2,))), (2,))
    b = space1.field(rng.standard_normal(space1.ndofs((2,))), (2,))
    assert (a + b - b).vector == pytest.approx(a.vector)
    assert (2 * a).vector == pytest.approx((a * 2).vector)
    assert (-a).norm() == pytest.approx(a.norm())
    with pytest.raises(ValueError):
        type(a)(space1, np.zeros((3, 2, 3)))


def test_elevated_quadrature_near_singular_point(mesh0):
    sp_ = DGSpace(mesh0, 1, singular_points=[(0.0, 0.0)])
    plain = DGSpace(mesh0, 1)
    assert sp_.elevated.sum() == mesh0.cells_touching([(0.0, 0.0)]).sum()
    assert len(sp_.q_weights) > len(plain.q_weights)
    assert sp_.q_weights.sum() == pytest.approx(16.0)


def test_export_samples(tmp_path, space1):
    path = tmp_path / "s.csv"
    export_samples(path, space1, np.arange(len(space1.q_weights), dtype=float))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "value"] and len(rows) == len(space1.q_weights) + 1
