"""N-functions of (p, delta)-type and the tensor maps A, A_a, F, F*.

The family is phi'(t) = (delta + t)^(p-2) t. Everything here is vectorised
over numpy arrays; tensor arguments have shape (..., d, n).

A useful identity: the shifted function phi_a of the (p, delta) member is
exactly the (p, delta + a) member, because

    phi'(a + t) t / (a + t) = (delta + a + t)^(p-2) t.

The shifted operator A_a is therefore A evaluated with delta + a.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import kernels
from .errors import DomainError, SingularityError


def _as_nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("N-functions are only defined for t >= 0")
    return t


def _phi(t, p, delta, nodes):
    """Integral of (delta+s)^(p-2) s over [0, t]; delta may be an array."""
    t, delta = np.broadcast_arrays(np.asarray(t, float), np.asarray(delta, float))
    out = np.zeros(t.shape)
    # closed form from the substitution u = delta + s; loses digits when t << delta
    big = (t > 0) & (t >= delta)
    if big.any():
        tb, db = t[big], delta[big]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = ((db + tb) ** p - db**p) / p - db * ((db + tb) ** (p - 1) - db ** (p - 1)) / (p - 1)
        out[big] = np.where(db > 0, val, tb**p / p)
    small = (t > 0) & ~big
    if small.any():
        x, w = nodes
        ts, ds = t[small], delta[small]
        s = 0.5 * ts[:, None] * (x[None, :] + 1.0)
        vals = (ds[:, None] + s) ** (p - 2) * s
        out[small] = 0.5 * ts * (vals @ w)
    return out


@dataclass(frozen=True)
class NFunction:
    """The balanced N-function with phi'(t) = (delta + t)^(p-2) t.

    ``quadrature_order`` is the number of Gauss-Legendre nodes used for
    phi(t) when t < delta, where the closed form cancels badly.
    """

    p: float
    delta: float = 0.0
    quadrature_order: int = 20

    def __post_init__(self):
        if not (1.0 < self.p < np.inf):
            raise DomainError(f"p must lie in (1, inf), got {self.p}")
        if self.delta < 0:
            raise DomainError(f"delta must be >= 0, got {self.delta}")

    @property
    def characteristics(self):
        """Balanced constants (gamma_1, gamma_2)."""
        return min(1.0, self.p - 1.0), max(1.0, self.p - 1.0)

    def _nodes(self):
        return roots_legendre(self.quadrature_order)

    def value(self, t):
        t = _as_nonneg(t)
        return _phi(t, self.p, self.delta, self._nodes())

    def prime(self, t):
        t = _as_nonneg(t)
        return (self.delta + t) ** (self.p - 2) * t

    def second(self, t):
        t = _as_nonneg(t)
        if self.delta == 0 and self.p < 2 and np.any(t == 0):
            raise SingularityError("phi'' is unbounded at t = 0 for p < 2, delta = 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.delta + t) ** (self.p - 3) * ((self.p - 1) * t + self.delta)
        # p > 3, delta = 0, t = 0 gives 0 * inf
        return np.where((t == 0) & (self.delta == 0) & (self.p >= 2), 0.0 if self.p > 2 else 1.0, out)

    def conjugate_prime(self, s):
        """(phi*)'(s) = (phi')^{-1}(s)."""
        s = _as_nonneg(s)
        out = kernels.phi_prime_inverse(s.ravel(), self.p, self.delta)
        return out.reshape(s.shape)

    def conjugate_value(self, s):
        """phi*(s) via the Legendre identity phi*(s) = s t - phi(t), phi'(t) = s."""
        s = _as_nonneg(s)
        t = self.conjugate_prime(s)
        return np.maximum(s * t - self.value(t), 0.0)

    def shift(self, a):
        return ShiftedNFunction(self, float(a))

    def with_delta(self, delta):
        return NFunction(self.p, delta, self.quadrature_order)

    def delta2_estimate(self, lo=1e-8, hi=1e8, num=400):
        """Sampled sup of phi(2t)/phi(t) on a log grid."""
        t = np.logspace(np.log10(lo), np.log10(hi), num)
        return float(np.max(self.value(2 * t) / self.value(t)))


@dataclass(frozen=True)
class ShiftedNFunction:
    """phi_a with phi_a'(t) = phi'(a + t) t / (a + t)."""

    base: NFunction
    a: float

    def __post_init__(self):
        if self.a < 0:
            raise DomainError("shift must be >= 0")

    @property
    def equivalent(self):
        return self.base.with_delta(self.base.delta + self.a)

    def prime(self, t):
        t = _as_nonneg(t)
        at = self.a + t
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.base.prime(at) * t / at
        return np.where(at > 0, out, 0.0)

    def value(self, t):
        return self.equivalent.value(t)

    def second(self, t):
        return self.equivalent.second(t)


# module level spellings of the scalar operations
def phi_value(nf, t):
    return nf.value(t)


def phi_prime(nf, t):
    return nf.prime(t)


def phi_second(nf, t):
    return nf.second(t)


def conjugate_prime(nf, s):
    return nf.conjugate_prime(s)


def conjugate_value(nf, s):
    return nf.conjugate_value(s)


def shifted_prime(snf, t):
    return snf.prime(t)


def shifted_value(snf, t):
    return snf.value(t)


# ---------------------------------------------------------------- tensors


def frobenius(P):
    P = np.asarray(P, dtype=float)
    return np.sqrt(np.sum(P * P, axis=(-2, -1)))


def _flat(P):
    P = np.asarray(P, dtype=float)
    return P.reshape(-1, P.shape[-2] * P.shape[-1]), P.shape


def op_A(nf, P):
    """A(P) = phi'(|P|)/|P| P = (delta + |P|)^(p-2) P, A(0) = 0."""
    flat, shape = _flat(P)
    return kernels.a_map(flat, nf.p, nf.delta).reshape(shape)


def op_A_shifted(nf, a, P):
    """A_a(P) = phi_a'(|P|)/|P| P; ``a`` may be an array broadcast over P."""
    flat, shape = _flat(P)
    a = np.broadcast_to(np.asarray(a, dtype=float), shape[:-2]).ravel()
    if np.any(a < 0):
        raise DomainError("shift must be >= 0")
    return kernels.a_map(flat, nf.p, nf.delta + a).reshape(shape)


def default_eps(P):
    return 1e-12 * (1.0 + np.max(frobenius(P), initial=0.0))


def _jacobian(p, delta, P, eps):
    flat, shape = _flat(P)
    m = flat.shape[1]
    delta = np.broadcast_to(np.asarray(delta, dtype=float), shape[:-2]).ravel()
    if eps is None:
        eps = default_eps(P)
    if p < 2 and eps == 0:
        r = np.sqrt(np.einsum("ij,ij->i", flat, flat))
        if np.any((r == 0) & (delta == 0)):
            raise SingularityError("DA(0) is unbounded for p < 2, delta = 0 without regularisation")
    jac = kernels.a_jacobian(flat, p, delta, eps)
    return jac.reshape(shape + shape[-2:])


def op_A_jacobian(nf, P, eps=None):
    """DA(P) as an array of shape (..., d, n, d, n); entry [i, j, k, l] = dA_ij/dP_kl.

    |P| is floored at ``eps`` (default 1e-12 (1 + |P|)).
    """
    return _jacobian(nf.p, nf.delta, P, eps)


def op_A_shifted_jacobian(nf, a, P, eps=None):
    """Jacobian of A_a in P (the shift held fixed)."""
    a = np.asarray(a, dtype=float)
    return _jacobian(nf.p, nf.delta + a, P, eps)


def op_A_shift_derivative(nf, a, P):
    """Partial derivative of A_a(P) with respect to the shift a."""
    flat, shape = _flat(P)
    a = np.broadcast_to(np.asarray(a, dtype=float), shape[:-2]).ravel()
    return kernels.a_delta_derivative(flat, nf.p, nf.delta + a).reshape(shape)


def map_F(nf, P):
    """F(P) = sqrt(phi'(|P|)/|P|) P."""
    P = np.asarray(P, dtype=float)
    r = frobenius(P)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = np.sqrt((nf.delta + r) ** (nf.p - 2))
    g = np.where(r > 0, g, 0.0)
    return g[..., None, None] * P


def map_Fstar(nf, P):
    """F*(P) = sqrt((phi*)'(|P|)/|P|) P."""
    P = np.asarray(P, dtype=float)
    r = frobenius(P)
    t = nf.conjugate_prime(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sqrt(t / r)
    g = np.where(r > 0, g, 0.0)
    return g[..., None, None] * P


@dataclass(frozen=True)
class Conjugate:
    """The conjugate N-function phi* as a standalone object."""

    base: NFunction

    def value(self, s):
        return self.base.conjugate_value(s)

    def prime(self, s):
        return self.base.conjugate_prime(s)


def evaluate(psi, t, shift=None):
    """psi(t) for an N-function-like object or a plain callable.

    With ``shift`` (broadcast against t), psi must be an NFunction and the
    shifted function psi_shift is evaluated pointwise.
    """
    t = np.asarray(t, dtype=float)
    if shift is not None:
        if not isinstance(psi, NFunction):
            raise TypeError("pointwise shifts need an NFunction")
        shift = np.broadcast_to(np.asarray(shift, dtype=float), t.shape)
        return _phi(_as_nonneg(t), psi.p, psi.delta + shift, psi._nodes())
    if hasattr(psi, "value"):
        return psi.value(t)
    return psi(t)
