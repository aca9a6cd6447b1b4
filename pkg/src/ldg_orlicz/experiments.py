"""Manufactured-solution convergence study on (-2, 2)^2.

The exact solution u(x) = |x|^beta (x2, -x1) has a gradient singularity at
the origin, which is a mesh vertex. Errors are measured in the natural
distance (through F and F*) and the jump pseudo-modular.
"""
import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dgspace import DGSpace, export_samples
from .errors import ConfigurationError, SingularityError
from .mesh import build_cartesian, refine_regular
from .orlicz import NFunction, map_F, map_Fstar, op_A, op_A_jacobian
from .solver import LDGSystem, ProblemData, newton_solve

log = logging.getLogger(__name__)

# stabilisation parameter alpha as a function of p
ALPHA_TABLE = (
    (1.25, 0.06), (4 / 3, 0.1), (1.5, 0.2), (5 / 3, 0.5), (1.8, 1.0),
    (2.0, 2.0), (2.25, 2.0), (2.5, 2.5), (3.0, 2.5), (4.0, 2.5),
)

EOC_COLUMNS = ["level", "h", "e_grad", "eoc_grad", "e_L", "eoc_L", "e_A", "eoc_A", "e_jump", "eoc_jump"]
ERROR_KEYS = ("grad", "L", "A", "jump")


def default_alpha(p):
    for q, a in ALPHA_TABLE:
        if abs(q - p) < 1e-9:
            return a
    raise ConfigurationError(f"no tabulated alpha for p={p}; pass alpha explicitly")


class ExactSolution:
    """u(x) = |x|^beta (x2, -x1) and derived data for the (p, delta) operator."""

    def __init__(self, nfunc, beta=0.01):
        self.nf = nfunc
        self.beta = float(beta)

    @staticmethod
    def _check(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        return x, r

    def u(self, x):
        x, r = self._check(x)
        return (r ** self.beta)[:, None] * np.column_stack([x[:, 1], -x[:, 0]])

    def grad(self, x):
        """[k, j] = d_j u_k."""
        x, r = self._check(x)
        if self.beta < 1 and np.any(r == 0):
            raise SingularityError("grad u is not defined at the origin")
        b = self.beta
        w = np.column_stack([x[:, 1], -x[:, 0]])
        Q = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(r > 0, b * r ** (b - 2), 0.0)
        return c[:, None, None] * w[:, :, None] * x[:, None, :] + (r ** b)[:, None, None] * Q

    def hessian(self, x):
        """[k, j, l] = d_l d_j u_k."""
        x, r = self._check(x)
        if np.any(r == 0):
            raise SingularityError("the Hessian of u is singular at the origin")
        b = self.beta
        w = np.column_stack([x[:, 1], -x[:, 0]])
        Q = np.array([[0.0, 1.0], [-1.0, 0.0]])
        I = np.eye(2)
        c4 = b * (b - 2) * r ** (b - 4)
        c2 = b * r ** (b - 2)
        H = c4[:, None, None, None] * w[:, :, None, None] * x[:, None, :, None] * x[:, None, None, :]
        H += c2[:, None, None, None] * w[:, :, None, None] * I[None, None, :, :]
        H += c2[:, None, None, None] * x[:, None, :, None] * Q[None, :, None, :]
        H += c2[:, None, None, None] * x[:, None, None, :] * Q[None, :, :, None]
        return H

    def L(self, x):
        return self.grad(x)

    def A(self, x):
        return op_A(self.nf, self.grad(x))

    def f(self, x):
        """-div A(grad u) by the chain rule."""
        DA = op_A_jacobian(self.nf, self.grad(x))
        return -np.einsum("mijkl,mklj->mi", DA, self.hessian(x))


exact_source = ExactSolution.f


def error_quantities(system, report, exact):
    """(e_grad, e_L, e_A, e_jump) for a converged solve."""
    sp_ = system.space
    nf = system.nf
    pts = sp_.q_points
    grad_u = exact.grad(pts)
    FL = map_F(nf, grad_u)

    def l2(diff):
        return math.sqrt(max(float(sp_.integrate(np.sum(diff**2, axis=(-2, -1)))), 0.0))

    e_grad = l2(map_F(nf, report.u.gradient_at_quadrature()) - FL)
    e_L = l2(map_F(nf, report.L.at_quadrature()) - FL)
    e_A = l2(map_Fstar(nf, report.A.at_quadrature()) - map_Fstar(nf, op_A(nf, grad_u)))
    m = system.ops.modular_jump(nf, report.u, system.h, dirichlet=exact.u)
    return e_grad, e_L, e_A, math.sqrt(max(m, 0.0))


def eoc(e, e_prev, h, h_prev):
    return math.log(e / e_prev) / math.log(h / h_prev)


@dataclass
class EocRow:
    level: int
    h: float
    errors: dict
    eocs: dict = field(default_factory=dict)

    def csv_row(self):
        row = [str(self.level), f"{self.h:.12g}"]
        for k in ERROR_KEYS:
            row.append(f"{self.errors[k]:.12g}")
            v = self.eocs.get(k)
            row.append("" if v is None else f"{v:.12g}")
        return row


@dataclass
class RunConfig:
    """Configuration of a solve or convergence study.

    ``levels`` is the number of meshes: levels 0 .. levels-1, level 0
    having spacing ``h0``. With ``continuation`` each level starts Newton
    from the previous level's solution instead of zero.
    """

    p: float = 2.0
    delta: float = 1e-3
    alpha: Optional[float] = None
    k: int = 1
    levels: int = 5
    beta: float = 0.01
    domain: tuple = ((-2.0, 2.0), (-2.0, 2.0))
    h0: float = 1.0
    atol: float = 1e-8
    rtol: float = 1e-10
    max_iter: int = 100
    shift_mode: str = "lagged"
    linear_solver: str = "direct"
    continuation: bool = True
    elevate_origin: bool = True
    out: Optional[str] = None

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = default_alpha(self.p)
        if self.levels < 1:
            raise ConfigurationError("levels must be >= 1")

    @property
    def nfunc(self):
        return NFunction(self.p, self.delta)


def build_system(config, mesh):
    exact = ExactSolution(config.nfunc, config.beta)
    data = ProblemData(mesh, config.nfunc, config.alpha, config.k, f=exact.f, u_D=exact.u,
                       singular_points=[(0.0, 0.0)] if config.elevate_origin else None)
    return LDGSystem(data), exact


def solve_level(config, mesh, previous=None):
    system, exact = build_system(config, mesh)
    u0 = system.prolongate(previous) if (config.continuation and previous is not None) else None
    report = newton_solve(system, u0, atol=config.atol, rtol=config.rtol, max_iter=config.max_iter,
                          shift_mode=config.shift_mode, linear_solver=config.linear_solver)
    return system, exact, report


def meshes(config):
    mesh = build_cartesian(config.domain, config.h0)
    yield mesh
    for _ in range(config.levels - 1):
        mesh = refine_regular(mesh)
        yield mesh


def run_convergence_study(config, keep_last=False):
    """Solve on every level and compute errors and EOCs.

    Writes ``eoc.csv`` and ``report.json`` to ``config.out`` when set;
    partial results are written before a failure propagates.
    """
    rows, reports = [], []
    previous = None
    last = None
    try:
        for mesh in meshes(config):
            system, exact, report = solve_level(config, mesh, previous)
            errs = dict(zip(ERROR_KEYS, error_quantities(system, report, exact)))
            row = EocRow(mesh.level, mesh.grid_h, errs)
            if rows:
                prev = rows[-1]
                row.eocs = {k: eoc(errs[k], prev.errors[k], row.h, prev.h) for k in ERROR_KEYS}
            rows.append(row)
            reports.append({"level": mesh.level, "cells": mesh.n_cells, "dofs": system.ndofs,
                            **report.to_dict()})
            log.info("level %d: %s", mesh.level, errs)
            previous = report.u
            last = (system, exact, report)
    finally:
        if config.out:
            write_outputs(config, rows, reports)
    return (rows, last) if keep_last else rows


def write_outputs(config, rows, reports):
    os.makedirs(config.out, exist_ok=True)
    with open(os.path.join(config.out, "eoc.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EOC_COLUMNS)
        for row in rows:
            w.writerow(row.csv_row())
    with open(os.path.join(config.out, "report.json"), "w") as fh:
        json.dump({"config": asdict(config), "levels": reports}, fh, indent=2)


def read_eoc_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ----------------------------------------------------------------- fields

FIELD_NAMES = ("u", "u_err", "L", "L_err", "A", "A_err", "R_u", "R_u_err")


def field_magnitudes(system, report, exact):
    """Pointwise magnitudes at the cell quadrature points, by quantity name."""
    pts = system.space.q_points
    ops = system.ops
    Ru = ops.lift(report.u).at_quadrature()
    Ru_err = ops.lift(report.u, None).at_quadrature() - ops.lift(None, exact.u).at_quadrature()

    def mag(v):
        return np.sqrt(np.sum(v.reshape(len(v), -1) ** 2, axis=1))

    uq, Lq, Aq = report.u.at_quadrature(), report.L.at_quadrature(), report.A.at_quadrature()
    return {
        "u": mag(uq), "u_err": mag(uq - exact.u(pts)),
        "L": mag(Lq), "L_err": mag(Lq - exact.L(pts)),
        "A": mag(Aq), "A_err": mag(Aq - exact.A(pts)),
        "R_u": mag(Ru), "R_u_err": mag(Ru_err),
    }


def export_fields(system, report, exact, directory):
    """Write P1 projections of the magnitudes as ``<name>.csv`` (x,y,value)."""
    os.makedirs(directory, exist_ok=True)
    sp_ = system.space
    p1 = sp_
    if sp_.degree != 1:
        p1 = DGSpace(sp_.mesh, 1, sp_.quad_order, sp_.face_quad_order, sp_.singular_points, sp_.elevation)
    paths = {}
    for name, vals in field_magnitudes(system, report, exact).items():
        path = os.path.join(directory, f"{name}.csv")
        export_samples(path, p1, p1.project_values(vals).at_quadrature())
        paths[name] = path
    return paths


def error_concentration(system, report, exact, radius=0.5):
    """Share of int |F(grad_h u_h) - F(grad u)|^2 within |x| <= radius."""
    sp_ = system.space
    nf = system.nf
    diff = map_F(nf, report.u.gradient_at_quadrature()) - map_F(nf, exact.grad(sp_.q_points))
    dens = np.sum(diff**2, axis=(-2, -1)) * sp_.q_weights
    near = np.linalg.norm(sp_.q_points, axis=1) <= radius
    return float(dens[near].sum() / dens.sum())
