"""Time the compiled and numpy kernels on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5] [--level 3]
"""
import argparse
import timeit

import numpy as np

from ldg_orlicz import kernels
from ldg_orlicz.experiments import RunConfig, build_system, meshes


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((n, 4)) * rng.uniform(1e-3, 1e2, n)[:, None]
    delta = 1e-3 + rng.uniform(0, 1, n)
    s = np.logspace(-6, 6, n)
    return {
        "a_map": lambda b: b.a_map(P, 1.5, delta),
        "a_jacobian": lambda b: b.a_jacobian(P, 1.5, delta, 1e-12),
        "a_delta_derivative": lambda b: b.a_delta_derivative(P, 1.5, delta),
        "phi_prime_inverse": lambda b: b.phi_prime_inverse(s, 1.5, 1e-3),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--level", type=int, default=3, help="mesh level for the assembly timing")
    args = parser.parse_args(argv)
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend
    else:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(args.n).items():
        times = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for b, mod in backends.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<20}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values()) + f"{speed:>9.1f}x")
    assembly(args.level, args.repeat)


def assembly(level, repeat):
    """Residual plus Jacobian on one mesh: numpy only vs the default dispatch."""
    config = RunConfig(p=1.5, levels=level + 1)
    system, _ = build_system(config, list(meshes(config))[-1])
    u = np.random.default_rng(1).standard_normal(system.ndofs) * 1e-2

    def run():
        system.residual(u)
        system.jacobian(u)

    default = {n: getattr(kernels, n) for n in kernels.DISPATCH}
    t_default = min(timeit.repeat(run, number=1, repeat=repeat))
    for n in default:
        setattr(kernels, n, getattr(kernels.python_backend, n))
    try:
        t_python = min(timeit.repeat(run, number=1, repeat=repeat))
    finally:
        for n, fn in default.items():
            setattr(kernels, n, fn)
    dispatch = ", ".join(f"{n}={b}" for n, b in kernels.DISPATCH.items())
    print(f"\nassembly, level {level} ({system.ndofs} dofs), dispatch: {dispatch}")
    print(f"numpy only {t_python * 1e3:.1f}ms, default {t_default * 1e3:.1f}ms, "
          f"speedup {t_python / t_default:.2f}x")


if __name__ == "__main__":
    main()
