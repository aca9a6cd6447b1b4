"""Primal LDG residual and Jacobian, Newton with backtracking, sparse solves.

For a test function z the residual entry is

    (A(L_h), grad_h z) - <{Pi A(L_h)}, [[z (x) n]]>
      + alpha <A_a(h^-1 [[(u_h - u_D) (x) n]]), [[z (x) n]]>
      - (f, z) - (F, G z) - <a_N, z>_{Gamma_N}

with L_h = G u_h + R u_D and the shift a = |{Pi^0 L_h}| per face. Since
R z lies in X_h, (A(L_h), R z) = (Pi A(L_h), R z) and the first two terms
are simply G^T Pi A(L_h) in coefficient space.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .dgspace import DGSpace, l2_project
from .errors import ConfigurationError, LinearSolverError, NonConvergenceError, StagnationError
from .operators import DIM, DgOperators
from .orlicz import NFunction

log = logging.getLogger(__name__)

SHIFT_MODES = ("lagged", "full")
JAC_EPS = 1e-12


@dataclass
class ProblemData:
    """Data of -div A(grad u) = f - div F with Dirichlet/Neumann conditions.

    Callables take points of shape (m, 2) and return (m, 2) for f, u_D,
    a_N and (m, 2, 2) for F. ``h`` defaults to the mesh grid spacing.
    """

    mesh: object
    nfunc: NFunction
    alpha: float
    degree: int = 1
    f: Optional[Callable] = None
    F: Optional[Callable] = None
    u_D: Optional[Callable] = None
    a_N: Optional[Callable] = None
    h: Optional[float] = None
    quad_order: Optional[int] = None
    face_quad_order: Optional[int] = None
    singular_points: Optional[object] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError("alpha must be positive")
        if self.degree < 1:
            raise ConfigurationError("the scheme needs k >= 1")


class LDGSystem:
    """Discrete operators and data vectors for one :class:`ProblemData`."""

    def __init__(self, data):
        self.data = data
        self.nf = data.nfunc
        self.space = DGSpace(data.mesh, data.degree, data.quad_order, data.face_quad_order,
                             data.singular_points)
        self.ops = DgOperators(self.space)
        self.h = data.h if data.h is not None else data.mesh.grid_h
        self.alpha = float(data.alpha)
        self.rD = self.ops.dirichlet_lifting_vector(data.u_D)
        self.jD = self.ops.dirichlet_jump_vector(data.u_D)
        nqf = self.space.nqf
        self.face_w = np.repeat(self.space.f_weights[self.ops.faces].ravel(), DIM * DIM)
        self.nqf = nqf
        self.load = self._load_vector()

    @property
    def ndofs(self):
        return self.ops.nU

    def _load_vector(self):
        d, sp_, ops = self.data, self.space, self.ops
        b = np.zeros(ops.nU)
        if d.f is not None:
            b += l2_project(sp_, d.f, (DIM,)).vector
        if d.F is not None:
            b += ops.G.T @ l2_project(sp_, d.F, (DIM, DIM)).vector
        if d.a_N is not None and len(d.mesh.neumann_faces):
            fn = d.mesh.neumann_faces
            K = d.mesh.face_cells[fn, 0]
            av = np.asarray(d.a_N(sp_.f_points[fn].reshape(-1, 2)), dtype=float).reshape(len(fn), sp_.nqf, DIM)
            val = np.einsum("fq,fqr,fqm->frm", sp_.f_weights[fn], av, sp_.f_phi[0, fn])
            idx = (K[:, None, None] * DIM + np.arange(DIM)[None, :, None]) * sp_.nb + np.arange(sp_.nb)
            np.add.at(b, idx.ravel(), val.ravel())
        return b

    # ------------------------------------------------------------ pieces
    def lh_vector(self, u):
        return self.ops.G @ u + self.rD

    def _lh_at_quadrature(self, Lvec):
        return self.ops.tensor_field(Lvec).at_quadrature().reshape(-1, DIM * DIM)

    def shift(self, Lvec):
        """a = |{Pi^0 L_h}| per jump face."""
        m = (self.ops.S @ Lvec).reshape(-1, DIM * DIM)
        return np.linalg.norm(m, axis=1)

    def scaled_jump(self, u):
        return ((self.ops.J @ u - self.jD) / self.h).reshape(-1, DIM * DIM)

    def project_A(self, Lvec):
        Aq = kernels.a_map(self._lh_at_quadrature(Lvec), self.nf.p, self.nf.delta)
        return self.space.project_values(Aq.reshape(-1, DIM, DIM)).vector

    # ---------------------------------------------------------- residual
    def residual(self, u, shift=None):
        """Residual vector; ``shift`` (per jump face) freezes the flux shift."""
        u = np.asarray(u, dtype=float)
        Lvec = self.lh_vector(u)
        r = self.ops.G.T @ self.project_A(Lvec)
        a = self.shift(Lvec) if shift is None else np.asarray(shift, dtype=float)
        jv = self.scaled_jump(u)
        As = kernels.a_map(jv, self.nf.p, self.nf.delta + np.repeat(a, self.nqf))
        r += self.alpha * (self.ops.J.T @ (self.face_w * As.ravel()))
        return r - self.load

    # ---------------------------------------------------------- jacobian
    def _volume_blocks(self, Lvec):
        sp_ = self.space
        nb, nc = sp_.nb, sp_.n_cells
        DA = kernels.a_jacobian(self._lh_at_quadrature(Lvec), self.nf.p, self.nf.delta, JAC_EPS)
        blk = np.zeros((nc, DIM * DIM, nb, DIM * DIM, nb))
        for m in range(nb):
            for n in range(m, nb):
                s = sp_.cell_sums(DA * (sp_.phi[:, m] * sp_.phi[:, n])[:, None, None])
                blk[:, :, m, :, n] = s
                if n != m:
                    blk[:, :, n, :, m] = s
        size = DIM * DIM * nb
        return sp.bsr_matrix((blk.reshape(nc, size, size), np.arange(nc), np.arange(nc + 1)),
                             shape=(nc * size, nc * size))

    def jacobian(self, u, shift_mode="lagged", shift=None):
        """Derivative of :meth:`residual` with respect to u.

        ``lagged`` treats the face shift as constant; ``full`` differentiates
        through a = |{Pi^0 L_h}| as well. A fixed ``shift`` implies lagged.
        """
        if shift_mode not in SHIFT_MODES:
            raise ConfigurationError(f"unknown shift_mode {shift_mode!r}")
        u = np.asarray(u, dtype=float)
        ops = self.ops
        Lvec = self.lh_vector(u)
        jac = ops.G.T @ (self._volume_blocks(Lvec) @ ops.G)

        a = self.shift(Lvec) if shift is None else np.asarray(shift, dtype=float)
        a_pt = np.repeat(a, self.nqf)
        jv = self.scaled_jump(u)
        npts = len(jv)
        w = self.face_w.reshape(npts, DIM * DIM)[:, 0]
        DAs = kernels.a_jacobian(jv, self.nf.p, self.nf.delta + a_pt, JAC_EPS)
        DAs *= (self.alpha / self.h * w)[:, None, None]
        B = sp.bsr_matrix((DAs, np.arange(npts), np.arange(npts + 1)), shape=(4 * npts, 4 * npts))
        jac = jac + ops.J.T @ (B @ ops.J)

        if shift_mode == "full" and shift is None:
            nJ = len(a)
            m = (ops.S @ Lvec).reshape(nJ, DIM * DIM)
            with np.errstate(invalid="ignore", divide="ignore"):
                mhat = np.where(a[:, None] > 0, m / a[:, None], 0.0)
            dA = kernels.a_delta_derivative(jv, self.nf.p, self.nf.delta + a_pt) * (self.alpha * w)[:, None]
            face_of_pt = np.repeat(np.arange(nJ), self.nqf)
            E = sp.csr_matrix((dA.ravel(), (np.arange(4 * npts), np.repeat(face_of_pt, 4))), shape=(4 * npts, nJ))
            N = sp.csr_matrix((mhat.ravel(), (np.repeat(np.arange(nJ), 4), np.arange(4 * nJ))), shape=(nJ, 4 * nJ))
            jac = jac + ops.J.T @ (E @ (N @ (ops.S @ ops.G)))
        return jac.tocsr()

    # ---------------------------------------------------------- recovery
    def fields(self, u):
        """(u_h, L_h, A_h) as BrokenFields; A_h = Pi A(L_h)."""
        Lvec = self.lh_vector(u)
        return (self.space.field(u, (DIM,)), self.ops.tensor_field(Lvec),
                self.ops.tensor_field(self.project_A(Lvec)))

    def prolongate(self, coarse_u):
        """Inject a BrokenField from the parent mesh (exact for nested meshes)."""
        return l2_project(self.space, coarse_u).vector


# ------------------------------------------------------------ linear solve


@dataclass
class LinearInfo:
    method: str
    iterations: int
    relative_residual: float


def linear_solve(matrix, residual, method="direct", rtol=1e-10):
    """Return d with matrix d = -residual, relative residual <= ``rtol``.

    ``direct`` uses a sparse LU factorisation with iterative refinement;
    ``bicgstab`` uses BiCGSTAB preconditioned with an incomplete LU.
    """
    A = sp.csc_matrix(matrix)
    b = -np.asarray(residual, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), LinearInfo(method, 0, 0.0)
    if method == "direct":
        # the pattern is structurally symmetric: a minimum degree ordering on
        # A + A^T with diagonal pivots is much cheaper; fall back to COLAMD
        # with partial pivoting if that does not reach the tolerance
        for opts in (dict(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                          options=dict(SymmetricMode=True)),
                     dict(permc_spec="COLAMD")):
            try:
                lu = spla.splu(A, **opts)
            except RuntimeError:
                continue
            x = lu.solve(b)
            its = 1
            for _ in range(3):
                res = b - A @ x
                if np.linalg.norm(res) <= rtol * bnorm:
                    break
                x += lu.solve(res)
                its += 1
            if np.all(np.isfinite(x)) and np.linalg.norm(b - A @ x) <= rtol * bnorm:
                break
        else:
            raise LinearSolverError("sparse LU factorisation failed")
    elif method == "bicgstab":
        ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=30)
        M = spla.LinearOperator(A.shape, ilu.solve)
        count = [0]

        def cb(_):
            count[0] += 1

        x, flag = spla.bicgstab(A, b, rtol=0.1 * rtol, atol=0.0, M=M, maxiter=5000, callback=cb)
        its = count[0]
        if flag < 0:
            raise LinearSolverError(f"BiCGSTAB breakdown (flag {flag})")
    else:
        raise ConfigurationError(f"unknown linear solver {method!r}")
    rel = float(np.linalg.norm(b - A @ x) / bnorm)
    if not rel <= rtol:
        raise LinearSolverError(f"linear solve reached relative residual {rel:.3e} > {rtol:g}", rel)
    return x, LinearInfo(method, its, rel)


# ------------------------------------------------------------------ newton


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_norms: list
    step_sizes: list
    linear: list = field(default_factory=list)
    seconds: float = 0.0
    u: object = None
    L: object = None
    A: object = None

    def to_dict(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_norms": [float(x) for x in self.residual_norms],
            "step_sizes": [float(x) for x in self.step_sizes],
            "linear": [vars(li) for li in self.linear],
            "seconds": self.seconds,
        }


def newton_solve(system, u0=None, atol=1e-8, rtol=1e-10, max_iter=50, shift_mode="lagged",
                 linear_solver="direct", armijo=1e-4, min_step=2.0**-20):
    """Newton's method with backtracking on the Euclidean residual norm.

    Stops when ||r|| <= atol or ||r|| / ||r_0|| <= rtol. Raises
    NonConvergenceError after ``max_iter`` steps and StagnationError when
    the step would drop below ``min_step``.
    """
    if not (atol > 0 and rtol > 0):
        raise ConfigurationError("atol and rtol must be positive")
    t0 = time.perf_counter()
    u = np.zeros(system.ndofs) if u0 is None else np.array(u0, dtype=float)
    r = system.residual(u)
    norms = [float(np.linalg.norm(r))]
    steps, linear = [], []

    def done():
        return norms[-1] <= atol or norms[-1] <= rtol * norms[0]

    it = 0
    while not done():
        if it >= max_iter:
            raise NonConvergenceError(f"no convergence in {max_iter} Newton steps", norms)
        d, info = linear_solve(system.jacobian(u, shift_mode), r, linear_solver)
        linear.append(info)
        s = 1.0
        while True:
            trial = u + s * d
            rt = system.residual(trial)
            nt = float(np.linalg.norm(rt))
            if nt <= (1.0 - armijo * s) * norms[-1]:
                break
            s *= 0.5
            if s < min_step:
                raise StagnationError("line search stagnated", norms)
        u, r = trial, rt
        norms.append(nt)
        steps.append(s)
        it += 1
        log.info("newton %d: |r| = %.3e, step = %g", it, nt, s)
    uh, Lh, Ah = system.fields(u)
    return SolveReport(True, it, norms, steps, linear, time.perf_counter() - t0, uh, Lh, Ah)
