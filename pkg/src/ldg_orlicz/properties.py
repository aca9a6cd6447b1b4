"""Sampled checks of the structural inequalities and operator identities.

Each function returns a plain dict so the results can be printed by the
command line tool or asserted in tests.
"""
import numpy as np

from .dgspace import DGSpace, average, jump
from .experiments import ALPHA_TABLE
from .mesh import Triangulation, build_cartesian, refine_regular
from .operators import DgOperators
from .orlicz import NFunction, op_A, op_A_jacobian, op_A_shifted, op_A_shifted_jacobian

P_VALUES = tuple(p for p, _ in ALPHA_TABLE)


def _rng(seed):
    return np.random.default_rng(seed)


def young_check(p, delta=1e-3, samples=100_000, seed=0, slack=1e-12):
    """Count violations of t s <= phi(t) + phi*(s) on log-uniform samples.

    ``slack`` is a relative roundoff allowance on the right-hand side.
    """
    nf = NFunction(p, delta)
    rng = _rng(seed)
    t = 10.0 ** rng.uniform(-6, 6, samples)
    s = 10.0 ** rng.uniform(-6, 6, samples)
    lhs = t * s
    rhs = nf.value(t) + nf.conjugate_value(s)
    gap = (rhs - lhs) / np.maximum(lhs, rhs)
    return {"p": p, "samples": samples, "violations": int(np.sum(gap < -slack)),
            "min_relative_gap": float(gap.min())}


def conjugate_roundtrip(p, delta=1e-3, lo=1e-8, hi=1e8, num=2001):
    """max |(phi*)'(phi'(t)) - t| / t on a log grid."""
    nf = NFunction(p, delta)
    t = np.logspace(np.log10(lo), np.log10(hi), num)
    back = nf.conjugate_prime(nf.prime(t))
    return {"p": p, "max_relative_error": float(np.max(np.abs(back - t) / t))}


def _fd_jacobian(fun, P, rel_step):
    """Central differences of ``fun`` over each entry of the 2x2 tensors P."""
    m = len(P)
    step = rel_step[:, None, None]
    out = np.zeros((m, 2, 2, 2, 2))
    for k in range(2):
        for l in range(2):
            E = np.zeros((1, 2, 2))
            E[0, k, l] = 1.0
            out[:, :, :, k, l] = (fun(P + step * E) - fun(P - step * E)) / (2 * step)
    return out


def jacobian_fd_check(p, delta=1e-3, samples=1000, seed=0):
    """Largest relative FD mismatch of DA and DA_a over random tensors."""
    nf = NFunction(p, delta)
    rng = _rng(seed)
    P = rng.standard_normal((samples, 2, 2))
    P *= (10.0 ** rng.uniform(-2, 2, samples) / np.linalg.norm(P, axis=(1, 2)))[:, None, None]
    a = 10.0 ** rng.uniform(-3, 1, samples)
    r = np.linalg.norm(P, axis=(1, 2))

    def rel(exact, approx):
        num = np.linalg.norm((exact - approx).reshape(samples, -1), axis=1)
        return float(np.max(num / np.linalg.norm(exact.reshape(samples, -1), axis=1)))

    fd = _fd_jacobian(lambda X: op_A(nf, X), P, 1e-6 * (delta + r))
    fd_s = _fd_jacobian(lambda X: op_A_shifted(nf, a, X), P, 1e-6 * (delta + a + r))
    return {"p": p, "samples": samples,
            "A": rel(op_A_jacobian(nf, P, eps=0.0), fd),
            "A_shifted": rel(op_A_shifted_jacobian(nf, a, P, eps=0.0), fd_s)}


def two_cell_mesh():
    """The unit square cut along one diagonal, all boundary Dirichlet."""
    v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return Triangulation(v, [(0, 1, 2), (0, 2, 3)], grid_h=1.0)


def lifting_relation(degree=1, seed=0):
    """max |(R w, X) - <[[w (x) n]], {X}>| over a complete tensor basis X.

    The left side integrates the assembled lifting by volume quadrature;
    the right side uses face traces directly.
    """
    space = DGSpace(two_cell_mesh(), degree)
    ops = DgOperators(space)
    rng = _rng(seed)
    w = space.field(rng.standard_normal(ops.nU), (2,))
    Rw = ops.lift(w).at_quadrature()
    jw = jump(w)
    worst = 0.0
    for j in range(ops.nX):
        e = np.zeros(ops.nX)
        e[j] = 1.0
        X = ops.tensor_field(e)
        lhs = space.integrate(np.sum(Rw * X.at_quadrature(), axis=(1, 2)))
        rhs = space.integrate_faces(np.sum(jw * average(X), axis=(-2, -1)), space.jump_faces())
        worst = max(worst, abs(lhs - rhs))
    return {"degree": degree, "basis_size": ops.nX, "max_abs_error": float(worst)}


def _continuous_p1(space, nodal):
    """Broken coefficients of the continuous P1 interpolant of vertex values (nv, 2)."""
    mesh = space.mesh
    lam = np.column_stack([1.0 - space.q_ref.sum(axis=1), space.q_ref])
    vals = np.einsum("qi,qir->qr", lam, nodal[mesh.cells[space.q_cell]])
    return space.project_values(vals)


def conforming_gradient(degree=1, level=1, seed=0):
    """max |G u - grad_h u| for a continuous field vanishing on the boundary."""
    mesh = build_cartesian()
    for _ in range(level):
        mesh = refine_regular(mesh)
    space = DGSpace(mesh, degree)
    ops = DgOperators(space)
    nodal = _rng(seed).standard_normal((mesh.n_vertices, 2))
    x = mesh.vertices
    on_bnd = (np.abs(np.abs(x) - 2.0) < 1e-12).any(axis=1)
    nodal[on_bnd] = 0.0
    u = _continuous_p1(space, nodal)
    diff = ops.discrete_gradient(u).vector - ops.local_gradient(u).vector
    return {"degree": degree, "level": level, "max_abs_error": float(np.max(np.abs(diff)))}


def lifting_stability(p, delta=1e-3, level=1, samples=100, seed=0):
    """Largest observed rho_phi(R w) / m_{phi,h}(w) over random broken fields."""
    nf = NFunction(p, delta)
    mesh = build_cartesian()
    for _ in range(level):
        mesh = refine_regular(mesh)
    space = DGSpace(mesh, 1)
    ops = DgOperators(space)
    rng = _rng(seed)
    ratios = []
    for _ in range(samples):
        w = space.field(rng.standard_normal(ops.nU), (2,))
        ratios.append(ops.modular_volume(nf, ops.lift(w)) / ops.modular_jump(nf, w))
    return {"p": p, "level": level, "envelope": float(max(ratios)), "mean": float(np.mean(ratios))}


def lifting_stability_drift(p, delta=1e-3, level=1, samples=100, seed=0):
    """Envelope on ``level`` and ``level + 1`` and their relative change."""
    a = lifting_stability(p, delta, level, samples, seed)
    b = lifting_stability(p, delta, level + 1, samples, seed)
    return {"p": p, "envelope": a["envelope"], "envelope_refined": b["envelope"],
            "relative_change": abs(b["envelope"] - a["envelope"]) / a["envelope"]}


def property_report(samples=100_000, fd_samples=1000, stability_samples=100, stability_level=2):
    """Run every sampled check; used by the ``props`` command."""
    return {
        "young": [young_check(p, samples=samples) for p in P_VALUES],
        "conjugate_roundtrip": [conjugate_roundtrip(p) for p in P_VALUES],
        "jacobian_fd": [jacobian_fd_check(p, samples=fd_samples) for p in P_VALUES],
        "lifting_relation": lifting_relation(),
        "conforming_gradient": conforming_gradient(),
        "lifting_stability": [lifting_stability_drift(p, level=stability_level, samples=stability_samples)
                              for p in P_VALUES],
    }
