"""Pure numpy implementation of the pointwise constitutive kernels.

Tensors are passed flattened: ``P`` has shape (N, m) with m = d * n.
``delta`` is a scalar or an (N,) array; a per-point delta is how the
shifted operators are evaluated, since phi_a for the (p, delta) family is
the (p, delta + a) member.
"""
import numpy as np


def _norms(P):
    return np.sqrt(np.einsum("ij,ij->i", P, P))


def a_map(P, p, delta):
    """(delta + |P|)^(p-2) P, with A(0) = 0."""
    P = np.asarray(P, dtype=float)
    r = _norms(P)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = (delta + r) ** (p - 2.0)
    g = np.where(r > 0.0, g, 0.0)
    return g[:, None] * P


def a_jacobian(P, p, delta, eps):
    """dA_i/dP_j = g(r) I + (p-2)(delta+r)^(p-3) P_i P_j / r, r = max(|P|, eps)."""
    P = np.asarray(P, dtype=float)
    n, m = P.shape
    r = np.maximum(_norms(P), eps)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = (delta + r) ** (p - 2.0)
        c = (p - 2.0) * (delta + r) ** (p - 3.0) / r
    c = np.where(r > 0.0, c, 0.0)
    out = c[:, None, None] * P[:, :, None] * P[:, None, :]
    idx = np.arange(m)
    out[:, idx, idx] += g[:, None]
    return out


def a_delta_derivative(P, p, delta):
    """Derivative of a_map with respect to delta: (p-2)(delta+|P|)^(p-3) P."""
    P = np.asarray(P, dtype=float)
    r = _norms(P)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = (p - 2.0) * (delta + r) ** (p - 3.0)
    c = np.where(r > 0.0, c, 0.0)
    return c[:, None] * P


def phi_prime_inverse(s, p, delta, rtol=1e-15, max_iter=200):
    """Solve (delta + t)^(p-2) t = s for t >= 0, elementwise.

    Safeguarded Newton inside a bracket that is grown by doubling.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    d = np.broadcast_to(np.asarray(delta, dtype=float), s.shape)
    t = np.zeros_like(s)
    act = s > 0.0
    if not act.any():
        return t
    s_a, d_a = s[act], d[act]

    def f(x):
        return (d_a + x) ** (p - 2.0) * x - s_a

    # first guess from the two asymptotic regimes t >> delta, t << delta
    with np.errstate(divide="ignore", over="ignore"):
        hi = s_a ** (1.0 / (p - 1.0)) + np.where(d_a > 0, s_a * d_a ** (2.0 - p), 0.0)
    hi = np.where(np.isfinite(hi) & (hi > 0), hi, 1.0)
    for _ in range(2000):
        low = f(hi) < 0.0
        if not low.any():
            break
        hi = np.where(low, 2.0 * hi, hi)
    lo = np.zeros_like(hi)
    x = hi.copy()
    live = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        xl, dl = x[live], d_a[live]
        fx = (dl + xl) ** (p - 2.0) * xl - s_a[live]
        dfx = (dl + xl) ** (p - 3.0) * ((p - 1.0) * xl + dl)
        lol, hil = lo[live], hi[live]
        lol = np.where(fx < 0.0, xl, lol)
        hil = np.where(fx > 0.0, xl, hil)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xl - fx / dfx
        bad = ~((xn > lol) & (xn < hil))
        xn = np.where(bad, 0.5 * (lol + hil), xn)
        xn = np.where(fx == 0.0, xl, xn)
        done = (np.abs(xn - xl) <= rtol * xn) | (fx == 0.0) | (hil - lol <= rtol * hil)
        lo[live], hi[live], x[live] = lol, hil, xn
        idx = np.flatnonzero(live)
        live[idx[done]] = False
        if not live.any():
            break
    t[act] = x
    return t
