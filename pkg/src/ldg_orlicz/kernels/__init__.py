"""Pointwise constitutive kernels with a compiled fast path.

Both backends implement every kernel. When the Cython extension is built
each kernel is taken from the backend listed in ``DISPATCH``: the compiled
Jacobian is several times faster than numpy, while the kernels whose cost
is one ``pow`` per point are faster through numpy's vectorised ``pow``
(see ``benchmarks/bench_kernels.py``). Setting
``LDG_ORLICZ_PURE_PYTHON=1`` forces the numpy backend throughout.
"""
import os

from . import _pykernels as python_backend

try:
    if os.environ.get("LDG_ORLICZ_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

BACKEND = "cython" if compiled_backend is not None else "python"

_COMPILED = ("a_jacobian",)
_NAMES = ("a_map", "a_jacobian", "a_delta_derivative", "phi_prime_inverse")
DISPATCH = {n: "cython" if compiled_backend is not None and n in _COMPILED else "python" for n in _NAMES}
_impl = {n: compiled_backend if DISPATCH[n] == "cython" else python_backend for n in _NAMES}

a_map = _impl["a_map"].a_map
a_jacobian = _impl["a_jacobian"].a_jacobian
a_delta_derivative = _impl["a_delta_derivative"].a_delta_derivative
phi_prime_inverse = _impl["phi_prime_inverse"].phi_prime_inverse

__all__ = [
    "BACKEND",
    "DISPATCH",
    "a_map",
    "a_jacobian",
    "a_delta_derivative",
    "phi_prime_inverse",
    "compiled_backend",
    "python_backend",
]
