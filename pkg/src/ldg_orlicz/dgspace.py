"""Broken polynomial spaces, L2 projections, traces, jumps and averages.

Each cell K carries the basis phi_i^K(x) = b_i(F_K^{-1} x) / sqrt(2 |K|),
where b_i is L2-orthonormal on the reference triangle. The local mass
matrices are therefore identities and the local L2 projection is a single
weighted quadrature sum.

Coefficients of a field with value shape ``shape`` are stored as an array
of shape (n_cells, *shape, n_basis); the flat DOF vector is its ravel.
"""
import csv
from math import factorial

import numpy as np
import scipy.sparse as sp

from .errors import UsageError
from .mesh import DIRICHLET, INTERIOR, NEUMANN
from .quadrature import line_rule, triangle_rule


class OrthonormalBasis:
    """L2-orthonormal polynomials of total degree <= k on the reference triangle.

    Obtained from the monomials by a Cholesky factorisation of their exact
    Gram matrix, so b_0 = sqrt(2) is the constant.
    """

    def __init__(self, degree):
        self.degree = int(degree)
        self.exponents = [(a, n - a) for n in range(self.degree + 1) for a in range(n, -1, -1)]
        e = self.exponents
        gram = np.array([[factorial(a1 + a2) * factorial(b1 + b2) / factorial(a1 + a2 + b1 + b2 + 2)
                          for (a2, b2) in e] for (a1, b1) in e])
        L = np.linalg.cholesky(gram)
        self.coefficients = np.linalg.inv(L)

    def __len__(self):
        return len(self.exponents)

    def _monomials(self, x):
        x = np.atleast_2d(x)
        return np.stack([x[:, 0] ** a * x[:, 1] ** b for a, b in self.exponents], axis=1)

    def values(self, x):
        return self._monomials(x) @ self.coefficients.T

    def gradients(self, x):
        x = np.atleast_2d(x)
        dx, dy = [], []
        for a, b in self.exponents:
            dx.append(a * x[:, 0] ** max(a - 1, 0) * x[:, 1] ** b if a else np.zeros(len(x)))
            dy.append(b * x[:, 0] ** a * x[:, 1] ** max(b - 1, 0) if b else np.zeros(len(x)))
        dm = np.stack([np.stack(dx, axis=1), np.stack(dy, axis=1)], axis=-1)
        return np.einsum("ij,mjd->mid", self.coefficients, dm)


class DGSpace:
    """Scalar broken P_k space on a mesh plus its quadrature data.

    Vector and tensor fields reuse the same scalar basis per component.

    Parameters
    ----------
    mesh : Triangulation
    degree : int
    quad_order, face_quad_order : int, optional
        Default 2k + 6 for both.
    singular_points : array_like, optional
        Cells with a vertex at one of these points get ``quad_order +
        elevation``.
    """

    def __init__(self, mesh, degree, quad_order=None, face_quad_order=None,
                 singular_points=None, elevation=4):
        self.mesh = mesh
        self.degree = int(degree)
        self.basis = OrthonormalBasis(self.degree)
        self.nb = len(self.basis)
        self.quad_order = quad_order or 2 * self.degree + 6
        self.face_quad_order = face_quad_order or 2 * self.degree + 6
        self.scale = 1.0 / np.sqrt(2.0 * mesh.areas)
        self.singular_points = singular_points
        self.elevation = elevation
        elevated = np.zeros(mesh.n_cells, dtype=bool)
        if singular_points is not None and len(singular_points):
            elevated = mesh.cells_touching(singular_points)
        self.elevated = elevated
        self._build_cell_quadrature(elevation)
        self._build_face_quadrature()

    # ------------------------------------------------------------------
    def _build_cell_quadrature(self, elevation):
        mesh = self.mesh
        chunks = []
        for order, cells in ((self.quad_order, np.flatnonzero(~self.elevated)),
                             (self.quad_order + elevation, np.flatnonzero(self.elevated))):
            if len(cells) == 0:
                continue
            ref, w = triangle_rule(order)
            chunks.append((np.repeat(cells, len(w)), np.tile(ref, (len(cells), 1)), np.tile(w, len(cells))))
        cell = np.concatenate([c[0] for c in chunks])
        ref = np.concatenate([c[1] for c in chunks])
        w = np.concatenate([c[2] for c in chunks])
        order = np.argsort(cell, kind="stable")
        cell, ref, w = cell[order], ref[order], w[order]
        self.q_cell = cell
        self.q_ref = ref
        self.q_points = mesh.origins[cell] + np.einsum("qij,qj->qi", mesh.jacobians[cell], ref)
        self.q_weights = w * 2.0 * mesh.areas[cell]
        self.q_offsets = np.concatenate([[0], np.cumsum(np.bincount(cell, minlength=mesh.n_cells))])
        s = self.scale[cell]
        self.phi = self.basis.values(ref) * s[:, None]
        grad_ref = self.basis.gradients(ref)
        # physical gradient = J^{-T} reference gradient
        self.dphi = np.einsum("qji,qmj->qmi", mesh.inverse_jacobians[cell], grad_ref) * s[:, None, None]
        nq, nb = self.phi.shape
        cols = cell[:, None] * nb + np.arange(nb)[None, :]
        self.E = sp.csr_matrix((self.phi.ravel(), (np.repeat(np.arange(nq), nb), cols.ravel())),
                               shape=(nq, mesh.n_cells * nb))

    def _build_face_quadrature(self):
        mesh = self.mesh
        s, w = line_rule(self.face_quad_order)
        self.nqf = len(s)
        a = mesh.vertices[mesh.face_vertices[:, 0]]
        b = mesh.vertices[mesh.face_vertices[:, 1]]
        self.f_points = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        self.f_weights = w[None, :] * mesh.face_lengths[:, None]
        nf, nq, nb = mesh.n_faces, self.nqf, self.nb
        self.f_phi = np.zeros((2, nf, nq, nb))
        self.Ef = []
        rows_all = np.arange(nf * nq)
        for side in (0, 1):
            cells = mesh.face_cells[:, side]
            ok = np.flatnonzero(cells >= 0)
            pts = self.f_points[ok].reshape(-1, 2)
            cc = np.repeat(cells[ok], nq)
            ref = mesh.to_reference(cc, pts)
            vals = self.basis.values(ref) * self.scale[cc][:, None]
            self.f_phi[side, ok] = vals.reshape(len(ok), nq, nb)
            rows = rows_all.reshape(nf, nq)[ok].ravel()
            cols = cc[:, None] * nb + np.arange(nb)[None, :]
            self.Ef.append(sp.csr_matrix((vals.ravel(), (np.repeat(rows, nb), cols.ravel())),
                                         shape=(nf * nq, mesh.n_cells * nb)))

    # ------------------------------------------------------------------
    @property
    def n_cells(self):
        return self.mesh.n_cells

    def ndofs(self, shape=()):
        return self.n_cells * int(np.prod(shape, dtype=int)) * self.nb

    def zeros(self, shape=()):
        return BrokenField(self, np.zeros((self.n_cells, *shape, self.nb)))

    def field(self, vector, shape=()):
        """Wrap a flat DOF vector."""
        return BrokenField(self, np.asarray(vector, dtype=float).reshape(self.n_cells, *shape, self.nb))

    def project_values(self, values):
        """Coefficients of the L2 projection of quadrature-point ``values`` (Nq, *shape)."""
        values = np.asarray(values, dtype=float)
        shape = values.shape[1:]
        flat = values.reshape(len(values), -1) * self.q_weights[:, None]
        c = (self.E.T @ flat).reshape(self.n_cells, self.nb, -1)
        return BrokenField(self, np.moveaxis(c, 1, -1).reshape(self.n_cells, *shape, self.nb))

    def integrate(self, values):
        """Sum of ``values`` (Nq, ...) against the quadrature weights."""
        return np.tensordot(self.q_weights, np.asarray(values), axes=(0, 0))

    def integrate_faces(self, values, faces=None):
        """Sum over ``faces`` of face-quadrature ``values`` (len(faces), nqf, ...)."""
        w = self.f_weights if faces is None else self.f_weights[faces]
        return np.tensordot(w, np.asarray(values), axes=([0, 1], [0, 1]))

    def cell_sums(self, values):
        """Per-cell quadrature sums of ``values`` (Nq, ...)."""
        v = np.asarray(values) * self.q_weights.reshape((-1,) + (1,) * (np.ndim(values) - 1))
        return np.add.reduceat(v, self.q_offsets[:-1], axis=0)

    def jump_faces(self):
        return np.flatnonzero(self.mesh.face_tags != NEUMANN)


class BrokenField:
    """A piecewise polynomial field on a :class:`DGSpace`."""

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape[0] != space.n_cells or self.coeffs.shape[-1] != space.nb:
            raise ValueError("coefficient array does not match the space")

    @property
    def shape(self):
        return self.coeffs.shape[1:-1]

    @property
    def vector(self):
        return self.coeffs.ravel()

    @property
    def degree(self):
        return self.space.degree

    def _columns(self):
        c = self.coeffs.reshape(self.space.n_cells, -1, self.space.nb)
        return np.swapaxes(c, 1, 2).reshape(-1, c.shape[1])

    def at_quadrature(self):
        """Values at the cell quadrature points, shape (Nq, *shape)."""
        v = self.space.E @ self._columns()
        return v.reshape(len(v), *self.shape)

    def trace(self, side):
        """Trace from face side 0 (left) or 1 (right); zeros where absent."""
        sp_ = self.space
        v = sp_.Ef[side] @ self._columns()
        return v.reshape(sp_.mesh.n_faces, sp_.nqf, *self.shape)

    def evaluate(self, cells, points):
        """Values at physical ``points`` (m, 2) lying in ``cells`` (m,)."""
        cells = np.asarray(cells)
        ref = self.space.mesh.to_reference(cells, np.asarray(points, dtype=float))
        phi = self.space.basis.values(ref) * self.space.scale[cells][:, None]
        c = self.coeffs.reshape(self.space.n_cells, -1, self.space.nb)[cells]
        return np.einsum("mcb,mb->mc", c, phi).reshape(len(cells), *self.shape)

    def gradient_at_quadrature(self):
        """Local gradient at quadrature points, shape (Nq, *shape, 2)."""
        sp_ = self.space
        c = self.coeffs.reshape(sp_.n_cells, -1, sp_.nb)[sp_.q_cell]
        g = np.einsum("qcb,qbd->qcd", c, sp_.dphi)
        return g.reshape(len(g), *self.shape, 2)

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def _like(self, coeffs):
        return BrokenField(self.space, coeffs)

    def __add__(self, other):
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self._like(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._like(-self.coeffs)

    def __mul__(self, s):
        return self._like(self.coeffs * s)

    __rmul__ = __mul__


def l2_project(space, target, shape=None):
    """Local L2 projection onto ``space`` (degree ``space.degree``).

    ``target`` is a callable x -> values (x has shape (m, 2)), or a
    BrokenField on the same mesh or on the parent mesh of ``space.mesh``.
    """
    if isinstance(target, BrokenField):
        src = target.space
        if src.mesh is space.mesh:
            vals = target.at_quadrature() if src is space else target.evaluate(space.q_cell, space.q_points)
        elif space.mesh.parent is not None and src.mesh.n_cells == space.mesh.parent.max() + 1:
            vals = target.evaluate(space.mesh.parent[space.q_cell], space.q_points)
        else:
            raise UsageError("BrokenField lives on an unrelated mesh")
    else:
        vals = np.asarray(target(space.q_points), dtype=float)
        if shape is not None:
            vals = vals.reshape(len(vals), *shape)
    return space.project_values(vals)


def local_gradient(field):
    """Elementwise gradient, stored in the same degree (exact for P_k)."""
    return field.space.project_values(field.gradient_at_quadrature())


def _check_faces(space, faces):
    mesh = space.mesh
    faces = space.jump_faces() if faces is None else np.atleast_1d(faces)
    if np.any(mesh.face_tags[faces] == NEUMANN):
        raise UsageError("jumps and averages are not defined on Neumann faces")
    return faces


def _boundary_values(space, faces, dirichlet, shape):
    out = np.zeros((len(faces), space.nqf, *shape))
    bnd = space.mesh.face_tags[faces] == DIRICHLET
    if dirichlet is not None and bnd.any():
        pts = space.f_points[faces[bnd]].reshape(-1, 2)
        out[bnd] = np.asarray(dirichlet(pts), dtype=float).reshape(bnd.sum(), space.nqf, *shape)
    return out


def jump(field, faces=None, dirichlet=None):
    """Normal jump [[w (x) n]] at face quadrature points.

    Interior faces: (w_left - w_right) (x) n_left. Dirichlet faces:
    (w - g) (x) n with outward n, where g = ``dirichlet`` (zero if None).
    Returns shape (len(faces), nqf, *field.shape, 2).
    """
    space = field.space
    faces = _check_faces(space, faces)
    mesh = space.mesh
    diff = field.trace(0)[faces] - field.trace(1)[faces]
    diff = diff - _boundary_values(space, faces, dirichlet, field.shape)
    n = mesh.face_normals[faces]
    n = n.reshape(len(faces), 1, *([1] * len(field.shape)), 2)
    return diff[..., None] * n


def average(field, faces=None):
    """Average {w}: mean of both traces inside, the single trace on Gamma_D."""
    space = field.space
    faces = _check_faces(space, faces)
    t0, t1 = field.trace(0)[faces], field.trace(1)[faces]
    interior = (space.mesh.face_tags[faces] == INTERIOR).reshape(-1, *([1] * (t0.ndim - 1)))
    return np.where(interior, 0.5 * (t0 + t1), t0)


def export_samples(path, space, values):
    """Write per-quadrature-point samples ``values`` (Nq,) as x,y,value CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for (x, y), v in zip(space.q_points, np.asarray(values, dtype=float)):
            w.writerow([f"{x:.12g}", f"{y:.12g}", f"{v:.12g}"])
