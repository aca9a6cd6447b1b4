"""Lifting (jump) operator, discrete gradient and Orlicz modulars.

All linear operators are assembled once per space as sparse matrices on
flat DOF vectors. Vector fields have shape (2,), tensor fields (2, 2);
tensor component (r, c) is stored at index 2 r + c.

The lifting R(w) is the X_h field with (R(w), X) = <[[w (x) n]], {X}> on
interior and Dirichlet faces. With an orthonormal basis the mass matrix is
the identity, so the coefficients of R(w) are exactly the right-hand sides.
"""
import numpy as np
import scipy.sparse as sp

from . import orlicz
from .dgspace import BrokenField, jump, local_gradient
from .mesh import DIRICHLET, INTERIOR

DIM = 2


class DgOperators:
    """Precomputed sparse operators of a vector DG space.

    Attributes
    ----------
    D : sparse (nX, nU)
        Local gradient U_h^k -> X_h^k.
    R : sparse (nX, nU)
        Lifting of jumps on interior and Dirichlet faces.
    G : sparse (nX, nU)
        Discrete gradient D - R.
    J : sparse (nJ * nqf * 4, nU)
        Normal jump [[u (x) n]] at the quadrature points of the jump faces.
    S : sparse (nJ * 4, nX)
        Face average of the cellwise mean (Pi^0) of a tensor field.
    """

    def __init__(self, space):
        self.space = space
        mesh = space.mesh
        self.faces = space.jump_faces()
        self.interior = mesh.face_tags[self.faces] == INTERIOR
        self.nb = space.nb
        self.nU = space.ndofs((DIM,))
        self.nX = space.ndofs((DIM, DIM))
        self._build_gradient()
        self._build_lifting()
        self._build_jump()
        self._build_mean_average()
        self.G = (self.D - self.R).tocsr()

    # -------------------------------------------------------------- indices
    def _u_index(self, cell, r, i):
        return (cell * DIM + r) * self.nb + i

    def _x_index(self, cell, r, c, m):
        return ((cell * DIM + r) * DIM + c) * self.nb + m

    def _build_gradient(self):
        sp_ = self.space
        nb = self.nb
        # local[K, c, m, i] = int_K phi_m d_c phi_i
        loc = sp_.cell_sums(np.einsum("qm,qic->qcmi", sp_.phi, sp_.dphi))
        K = np.arange(sp_.n_cells)[:, None, None]
        m = np.arange(nb)[None, :, None]
        i = np.arange(nb)[None, None, :]
        rows, cols, vals = [], [], []
        for r in range(DIM):
            for c in range(DIM):
                rr, cc = np.broadcast_arrays(self._x_index(K, r, c, m), self._u_index(K, r, i))
                rows.append(rr.ravel())
                cols.append(cc.ravel())
                vals.append(loc[:, c].ravel())
        self.D = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(self.nX, self.nU))

    def _build_lifting(self):
        sp_, mesh, f = self.space, self.space.mesh, self.faces
        cells = mesh.face_cells[f]
        n = mesh.face_normals[f]
        w = sp_.f_weights[f]
        omega = np.where(self.interior, 0.5, 1.0)
        rows, cols, vals = [], [], []
        m = np.arange(self.nb)[None, :, None]
        i = np.arange(self.nb)[None, None, :]
        for s in (0, 1):
            for t, sign in ((0, 1.0), (1, -1.0)):
                ok = (cells[:, s] >= 0) & (cells[:, t] >= 0)
                if not ok.any():
                    continue
                mass = np.einsum("fq,fqm,fqi->fmi", w[ok], sp_.f_phi[s, f[ok]], sp_.f_phi[t, f[ok]])
                coef = (omega[ok] * sign)[:, None, None] * mass
                Ks = cells[ok, s][:, None, None]
                Kt = cells[ok, t][:, None, None]
                for r in range(DIM):
                    for c in range(DIM):
                        rr, cc = np.broadcast_arrays(self._x_index(Ks, r, c, m), self._u_index(Kt, r, i))
                        rows.append(rr.ravel())
                        cols.append(cc.ravel())
                        vals.append((coef * n[ok, c][:, None, None]).ravel())
        self.R = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(self.nX, self.nU))

    def _build_jump(self):
        sp_, mesh, f = self.space, self.space.mesh, self.faces
        nq, nb = sp_.nqf, self.nb
        cells = mesh.face_cells[f]
        n = mesh.face_normals[f]
        jf = np.arange(len(f))[:, None, None]
        q = np.arange(nq)[None, :, None]
        i = np.arange(nb)[None, None, :]
        rows, cols, vals = [], [], []
        for t, sign in ((0, 1.0), (1, -1.0)):
            ok = cells[:, t] >= 0
            phi = sp_.f_phi[t, f[ok]]
            Kt = cells[ok, t][:, None, None]
            for r in range(DIM):
                for c in range(DIM):
                    row = ((jf[ok] * nq + q) * DIM + r) * DIM + c
                    rr, cc = np.broadcast_arrays(row, self._u_index(Kt, r, i))
                    rows.append(rr.ravel())
                    cols.append(cc.ravel())
                    vals.append((sign * n[ok, c][:, None, None] * phi).ravel())
        self.J = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(len(f) * nq * DIM * DIM, self.nU))

    def _build_mean_average(self):
        mesh, f = self.space.mesh, self.faces
        cells = mesh.face_cells[f]
        omega = np.where(self.interior, 0.5, 1.0)
        rows, cols, vals = [], [], []
        for s in (0, 1):
            ok = np.flatnonzero(cells[:, s] >= 0)
            K = cells[ok, s]
            coef = omega[ok] / np.sqrt(mesh.areas[K])
            for comp in range(DIM * DIM):
                rows.append(ok * DIM * DIM + comp)
                cols.append((K * DIM * DIM + comp) * self.nb)
                vals.append(coef)
        self.S = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(len(f) * DIM * DIM, self.nX))

    # ------------------------------------------------------ boundary data
    def dirichlet_lifting_vector(self, g):
        """Coefficients of R(u_D*) built from the boundary values of ``g``.

        Interior jumps of a continuous extension vanish, so only Dirichlet
        faces contribute.
        """
        sp_, mesh = self.space, self.space.mesh
        out = np.zeros(self.nX)
        if g is None:
            return out
        fd = mesh.dirichlet_faces
        if len(fd) == 0:
            return out
        K = mesh.face_cells[fd, 0]
        gv = np.asarray(g(sp_.f_points[fd].reshape(-1, 2)), dtype=float).reshape(len(fd), sp_.nqf, DIM)
        n = mesh.face_normals[fd]
        # [K, r, c, m] = sum_q w g_r n_c phi_m
        val = np.einsum("fq,fqr,fc,fqm->frcm", sp_.f_weights[fd], gv, n, sp_.f_phi[0, fd])
        idx = ((K[:, None, None, None] * DIM + np.arange(DIM)[None, :, None, None]) * DIM
               + np.arange(DIM)[None, None, :, None]) * self.nb + np.arange(self.nb)[None, None, None, :]
        np.add.at(out, idx.ravel(), val.ravel())
        return out

    def dirichlet_jump_vector(self, g):
        """g (x) n at jump-face quadrature points (zero on interior faces)."""
        sp_, mesh, f = self.space, self.space.mesh, self.faces
        out = np.zeros((len(f), sp_.nqf, DIM, DIM))
        bnd = np.flatnonzero(mesh.face_tags[f] == DIRICHLET)
        if g is None or len(bnd) == 0:
            return out.ravel()
        gv = np.asarray(g(sp_.f_points[f[bnd]].reshape(-1, 2)), dtype=float).reshape(len(bnd), sp_.nqf, DIM)
        out[bnd] = gv[..., :, None] * mesh.face_normals[f[bnd]][:, None, None, :]
        return out.ravel()

    # ------------------------------------------------------------ actions
    def tensor_field(self, vector):
        return self.space.field(vector, (DIM, DIM))

    def lift(self, field=None, dirichlet=None):
        """R(field) + R(dirichlet extension); either part may be omitted."""
        v = np.zeros(self.nX)
        if field is not None:
            v += self.R @ field.vector
        if dirichlet is not None:
            v += self.dirichlet_lifting_vector(dirichlet)
        return self.tensor_field(v)

    def local_gradient(self, field):
        return self.tensor_field(self.D @ field.vector)

    def discrete_gradient(self, field, dirichlet=None):
        """G u = grad_h u - R u, plus R(u_D*) when ``dirichlet`` is given (this is L_h)."""
        v = self.G @ field.vector
        if dirichlet is not None:
            v = v + self.dirichlet_lifting_vector(dirichlet)
        return self.tensor_field(v)

    def face_mean_shift(self, tensor):
        """|{Pi^0 X}| per jump face."""
        m = (self.S @ tensor.vector).reshape(-1, DIM * DIM)
        return np.linalg.norm(m, axis=1)

    # ----------------------------------------------------------- modulars
    def modular_volume(self, psi, field, shift=None):
        """rho_psi(f) = int psi(|f|) dx.

        ``field`` is a BrokenField, a callable of x, or values at the cell
        quadrature points. ``shift`` (per quadrature point) selects psi_shift.
        """
        return modular_volume(self.space, psi, field, shift)

    def modular_jump(self, psi, field, h=None, dirichlet=None, shift=None):
        """m_{psi,h}(w) = h sum_faces int psi(|[[(w - g) (x) n]]| / h) ds.

        ``shift`` may be given per jump face.
        """
        h = self.space.mesh.grid_h if h is None else h
        jv = jump(field, self.faces, dirichlet)
        t = np.sqrt(np.sum(jv.reshape(jv.shape[0], jv.shape[1], -1) ** 2, axis=-1)) / h
        if shift is not None:
            shift = np.broadcast_to(np.asarray(shift, dtype=float)[:, None], t.shape)
        vals = orlicz.evaluate(psi, t, shift)
        return float(h * self.space.integrate_faces(vals, self.faces))

    def modular_total(self, psi, field, h=None, dirichlet=None):
        """M_{psi,h}(w) = rho_psi(grad_h w) + m_{psi,h}(w)."""
        grad = field.gradient_at_quadrature()
        return self.modular_volume(psi, grad) + self.modular_jump(psi, field, h, dirichlet)


def modular_volume(space, psi, field, shift=None):
    if isinstance(field, BrokenField):
        vals = field.at_quadrature()
    elif callable(field):
        vals = np.asarray(field(space.q_points), dtype=float)
    else:
        vals = np.asarray(field, dtype=float)
    t = np.sqrt(np.sum(vals.reshape(len(vals), -1) ** 2, axis=1))
    return float(space.integrate(orlicz.evaluate(psi, t, shift)))


__all__ = ["DgOperators", "modular_volume", "local_gradient"]
