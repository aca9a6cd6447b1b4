"""Structured triangulations of rectangles with face topology.

Faces are stored once. ``face_cells[f] = (left, right)`` with ``right = -1``
on the boundary, and ``face_normals[f]`` is the unit normal pointing out of
the left cell. Boundary faces carry a tag (DIRICHLET or NEUMANN).
"""
import csv
import os

import numpy as np

from .errors import ConfigurationError

INTERIOR, DIRICHLET, NEUMANN = 0, 1, 2


def all_dirichlet(midpoints):
    return np.ones(len(midpoints), dtype=bool)


class Triangulation:
    """Conforming triangulation with counterclockwise cells.

    Parameters
    ----------
    vertices : (nv, 2) array
    cells : (nc, 3) int array, counterclockwise
    grid_h : float
        Mesh parameter h used by the scheme (the cartesian spacing for meshes
        built by :func:`build_cartesian`).
    dirichlet : callable, optional
        Maps boundary face midpoints (m, 2) to a boolean mask; True means
        Dirichlet, False means Neumann. Defaults to all Dirichlet.
    """

    def __init__(self, vertices, cells, grid_h, level=0, dirichlet=None, parent=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.cells = np.asarray(cells, dtype=np.int64)
        self.grid_h = float(grid_h)
        self.level = int(level)
        self.dirichlet = dirichlet if dirichlet is not None else all_dirichlet
        self.parent = None if parent is None else np.asarray(parent, dtype=np.int64)
        self._geometry()
        self._topology()
        for name in ("vertices", "cells", "face_vertices", "face_cells", "face_normals",
                     "face_lengths", "face_tags", "cell_faces", "areas"):
            getattr(self, name).flags.writeable = False

    # ------------------------------------------------------------------
    def _geometry(self):
        v = self.vertices[self.cells]
        self.jacobians = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
        det = np.linalg.det(self.jacobians)
        if np.any(det <= 0):
            raise ConfigurationError("cells must be counterclockwise and non-degenerate")
        self.areas = 0.5 * det
        self.inverse_jacobians = np.linalg.inv(self.jacobians)
        self.origins = v[:, 0]

    def _topology(self):
        c = self.cells
        # local edge i is opposite local vertex i
        local = np.stack([c[:, [1, 2]], c[:, [2, 0]], c[:, [0, 1]]], axis=1)
        edges = local.reshape(-1, 2)
        key = np.sort(edges, axis=1)
        uniq, first, inverse, counts = np.unique(
            key, axis=0, return_index=True, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        if np.any(counts > 2):
            raise ConfigurationError("non-manifold edge")
        nf = len(uniq)
        owner = np.arange(len(edges)) // 3
        face_cells = -np.ones((nf, 2), dtype=np.int64)
        face_cells[:, 0] = owner[first]
        second = np.ones(len(edges), dtype=bool)
        second[first] = False
        face_cells[inverse[second], 1] = owner[second]
        # orientation follows the left cell's counterclockwise edge
        fv = edges[first]
        t = self.vertices[fv[:, 1]] - self.vertices[fv[:, 0]]
        length = np.linalg.norm(t, axis=1)
        normals = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]

        self.face_vertices = fv
        self.face_cells = face_cells
        self.face_normals = normals
        self.face_lengths = length
        self.cell_faces = inverse.reshape(-1, 3)
        self.face_midpoints = 0.5 * (self.vertices[fv[:, 0]] + self.vertices[fv[:, 1]])
        tags = np.zeros(nf, dtype=np.int64)
        bnd = face_cells[:, 1] < 0
        mask = np.asarray(self.dirichlet(self.face_midpoints[bnd]), dtype=bool)
        tags[bnd] = np.where(mask, DIRICHLET, NEUMANN)
        self.face_tags = tags

    # ------------------------------------------------------------------
    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.face_vertices)

    @property
    def interior_faces(self):
        return np.flatnonzero(self.face_tags == INTERIOR)

    @property
    def dirichlet_faces(self):
        return np.flatnonzero(self.face_tags == DIRICHLET)

    @property
    def neumann_faces(self):
        return np.flatnonzero(self.face_tags == NEUMANN)

    def face_patch(self, f):
        """The one or two cells adjacent to face ``f``."""
        left, right = self.face_cells[f]
        return (int(left),) if right < 0 else (int(left), int(right))

    def diameters(self):
        v = self.vertices[self.cells]
        e = np.stack([v[:, 1] - v[:, 2], v[:, 2] - v[:, 0], v[:, 0] - v[:, 1]], axis=1)
        return np.linalg.norm(e, axis=2).max(axis=1)

    def inradii(self):
        v = self.vertices[self.cells]
        e = np.stack([v[:, 1] - v[:, 2], v[:, 2] - v[:, 0], v[:, 0] - v[:, 1]], axis=1)
        return 2.0 * self.areas / np.linalg.norm(e, axis=2).sum(axis=1)

    def chunkiness(self):
        return float(np.max(self.diameters() / self.inradii()))

    def to_reference(self, cells, points):
        """Reference coordinates of physical ``points`` (m, 2) in ``cells`` (m,)."""
        d = points - self.origins[cells]
        return np.einsum("mij,mj->mi", self.inverse_jacobians[cells], d)

    def cells_touching(self, points, tol=1e-12):
        """Boolean mask of cells having a vertex at one of ``points``."""
        mask = np.zeros(self.n_cells, dtype=bool)
        for pt in np.atleast_2d(points):
            hit = np.flatnonzero(np.linalg.norm(self.vertices - pt, axis=1) < tol)
            mask |= np.isin(self.cells, hit).any(axis=1)
        return mask

    def export_csv(self, directory):
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "vertices.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x", "y"])
            for i, (x, y) in enumerate(self.vertices):
                w.writerow([i, repr(float(x)), repr(float(y))])
        with open(os.path.join(directory, "cells.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "v0", "v1", "v2"])
            for i, c in enumerate(self.cells):
                w.writerow([i, *map(int, c)])


def build_cartesian(domain=((-2.0, 2.0), (-2.0, 2.0)), h=1.0, dirichlet=None):
    """Split an h-spaced cartesian grid into triangles.

    Diagonals alternate in a checkerboard pattern.
    """
    (x0, x1), (y0, y1) = domain
    nx, ny = (x1 - x0) / h, (y1 - y0) / h
    if min(nx, ny) < 1 or abs(nx - round(nx)) > 1e-10 or abs(ny - round(ny)) > 1e-10:
        raise ConfigurationError(f"domain sides must be positive integer multiples of h={h}")
    nx, ny = int(round(nx)), int(round(ny))
    xs = x0 + h * np.arange(nx + 1)
    ys = y0 + h * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    cells = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if (i + j) % 2 == 0:
                cells += [(a, b, c), (a, c, d)]
            else:
                cells += [(a, b, d), (b, c, d)]
    return Triangulation(vertices, np.array(cells), h, level=0, dirichlet=dirichlet)


def refine_regular(mesh):
    """Red refinement: split every triangle into four via edge midpoints.

    Child ``4 * K + j`` has parent ``K``; child 3 is the inner triangle.
    """
    nv = mesh.n_vertices
    vertices = np.vstack([mesh.vertices, mesh.face_midpoints])
    c = mesh.cells
    m = nv + mesh.cell_faces  # midpoint of the edge opposite local vertex i
    children = np.stack([
        np.column_stack([c[:, 0], m[:, 2], m[:, 1]]),
        np.column_stack([m[:, 2], c[:, 1], m[:, 0]]),
        np.column_stack([m[:, 1], m[:, 0], c[:, 2]]),
        np.column_stack([m[:, 0], m[:, 1], m[:, 2]]),
    ], axis=1).reshape(-1, 3)
    parent = np.repeat(np.arange(mesh.n_cells), 4)
    return Triangulation(vertices, children, mesh.grid_h / 2.0, level=mesh.level + 1,
                         dirichlet=mesh.dirichlet, parent=parent)


def mesh_hierarchy(base, levels):
    """``[base, refine(base), ...]`` with ``levels + 1`` meshes."""
    out = [base]
    for _ in range(levels):
        out.append(refine_regular(out[-1]))
    return out
