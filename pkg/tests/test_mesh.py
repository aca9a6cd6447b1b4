import csv

import numpy as np
import pytest

from ldg_orlicz.errors import ConfigurationError
from ldg_orlicz.mesh import (DIRICHLET, INTERIOR, NEUMANN, Triangulation, build_cartesian,
                             mesh_hierarchy, refine_regular)


def test_base_mesh_counts(mesh0):
    assert mesh0.n_cells == 32 and mesh0.n_vertices == 25 and mesh0.n_faces == 56
    assert len(mesh0.interior_faces) == 40 and len(mesh0.dirichlet_faces) == 16
    assert mesh0.grid_h == 1.0 and mesh0.level == 0
    assert mesh0.areas.sum() == pytest.approx(16.0)


def test_counterclockwise(mesh1):
    assert np.all(mesh1.areas > 0)


def test_face_orientation(mesh1):
    centroids = mesh1.vertices[mesh1.cells].mean(axis=1)
    left = mesh1.face_cells[:, 0]
    out = np.einsum("fi,fi->f", mesh1.face_midpoints - centroids[left], mesh1.face_normals)
    assert np.all(out > 0)
    interior = mesh1.interior_faces
    right = mesh1.face_cells[interior, 1]
    into = np.einsum("fi,fi->f", mesh1.face_midpoints[interior] - centroids[right],
                     mesh1.face_normals[interior])
    assert np.all(into < 0)
    assert np.linalg.norm(mesh1.face_normals, axis=1) == pytest.approx(1.0)


def test_each_interior_face_shared_by_two(mesh1):
    counts = np.bincount(mesh1.cell_faces.ravel(), minlength=mesh1.n_faces)
    assert np.all(counts[mesh1.interior_faces] == 2)
    assert np.all(counts[mesh1.dirichlet_faces] == 1)
    # local face i is opposite local vertex i
    for K in range(0, mesh1.n_cells, 17):
        for i in range(3):
            f = mesh1.cell_faces[K, i]
            assert mesh1.cells[K, i] not in mesh1.face_vertices[f]


def test_refinement_invariants():
    meshes = mesh_hierarchy(build_cartesian(), 3)
    chunk = meshes[0].chunkiness()
    for coarse, fine in zip(meshes, meshes[1:]):
        assert fine.n_cells == 4 * coarse.n_cells
        assert fine.grid_h == coarse.grid_h / 2
        assert fine.chunkiness() == pytest.approx(chunk)
        assert fine.areas.sum() == pytest.approx(16.0)
        assert fine.n_vertices - fine.n_faces + fine.n_cells == 1
        # children lie inside their parent
        cen = fine.vertices[fine.cells].mean(axis=1)
        ref = coarse.to_reference(fine.parent, cen)
        assert np.all(ref > -1e-12) and np.all(ref.sum(axis=1) < 1 + 1e-12)


def test_neumann_tags():
    mesh = build_cartesian(((0, 2), (0, 1)), 0.5, dirichlet=lambda x: x[:, 0] < 1e-12)
    assert len(mesh.dirichlet_faces) == 2
    assert len(mesh.neumann_faces) == 2 * 4 + 2 * 2 - 2
    assert set(np.unique(mesh.face_tags)) == {INTERIOR, DIRICHLET, NEUMANN}
    assert np.all(refine_regular(mesh).face_tags[refine_regular(mesh).face_cells[:, 1] < 0] > 0)


def test_bad_grid():
    with pytest.raises(ConfigurationError):
        build_cartesian(((0, 1), (0, 1)), 0.3)
    with pytest.raises(ConfigurationError):
        Triangulation([(0, 0), (1, 0), (0, 1)], [(0, 2, 1)], 1.0)


def test_face_patch_and_touching(mesh0):
    f = mesh0.interior_faces[0]
    assert len(mesh0.face_patch(f)) == 2
    assert len(mesh0.face_patch(mesh0.dirichlet_faces[0])) == 1
    assert mesh0.cells_touching([(0.0, 0.0)]).sum() == 6 or mesh0.cells_touching([(0.0, 0.0)]).sum() == 8


def test_export_csv(tmp_path, mesh0):
    mesh0.export_csv(tmp_path)
    with open(tmp_path / "cells.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "v0", "v1", "v2"] and len(rows) == 33
    with open(tmp_path / "vertices.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "x", "y"] and len(rows) == 26
