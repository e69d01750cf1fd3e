"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--sizes 100 400 1600] [--repeat 5]

Times one theta step, one Laplacian application, one pair norm and a full
march of the semilinear solver with each backend, and checks that both
backends agree on the results.
"""

import argparse
import timeit

import numpy as np

from sdwave import DomainSpec, NonlinKind, build_grid
from sdwave._backend import get_kernels
from sdwave.evolver import Evolver, SolverConfig, State
from sdwave.operators import implicit_matrix, make_stencil
from sdwave.profiles import make_profile


def _setup(kern, j_max):
    grid = build_grid(DomainSpec(3, 1.0, 21.0), j_max)
    st = make_stencil(grid)
    dt = 0.5 * grid.dx
    m = implicit_matrix(st, dt, 0.5)
    fac = kern.ThomasFactor(m.sub, m.diag, m.sup)
    u = make_profile(grid, "sigma", 0.1)
    v = make_profile(grid, "gaussian", 0.05)
    return grid, st, dt, fac, u, v


def bench_backend(name, j_max, repeat):
    kern = get_kernels(name)
    grid, st, dt, fac, u, v = _setup(kern, j_max)
    f = np.zeros(grid.size)
    u_out, v_out, work = (np.empty(grid.size) for _ in range(3))
    lap_out = np.empty(grid.size)

    def step():
        kern.theta_step(u, v, f, st.lower, st.diag, st.upper, fac, dt, 0.5, u_out, v_out, work)

    def lap():
        kern.laplacian(st.lower, st.diag, st.upper, u, lap_out)

    def norm():
        return kern.h1_pair_norm(u, v, grid.quad_weights, grid.dx)

    ev = Evolver(grid, SolverConfig(dt, 0.5, 200 * dt), backend=kern)
    kind = NonlinKind.derivative(1.2)

    def march():
        return ev.march(State(0.0, u, v), 200, ev.semilinear_forcing(kind), store=False)[0]

    number = max(1, 20000 // j_max)
    out = {
        "theta_step": min(timeit.repeat(step, number=number, repeat=repeat)) / number,
        "laplacian": min(timeit.repeat(lap, number=number, repeat=repeat)) / number,
        "h1_pair_norm": min(timeit.repeat(norm, number=number, repeat=repeat)) / number,
        "march_200": min(timeit.repeat(march, number=1, repeat=repeat)),
    }
    step()
    final = march()
    return out, (u_out.copy(), v_out.copy(), norm(), final.u.copy())


def _rel(a, b):
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1e-300))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1600])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        get_kernels("cython")
        names = ["cython", "python"]
    except ImportError:
        print("compiled extension not built; timing the pure-Python backend only")
        names = ["python"]

    print(f"{'j_max':>6} {'kernel':>13} " + " ".join(f"{n:>12}" for n in names)
          + ("      speedup" if len(names) == 2 else ""))
    for j in args.sizes:
        res = {n: bench_backend(n, j, args.repeat) for n in names}
        for key in res[names[0]][0]:
            times = [res[n][0][key] for n in names]
            line = f"{j:>6} {key:>13} " + " ".join(f"{t * 1e6:>10.1f}us" for t in times)
            if len(names) == 2:
                line += f" {times[1] / times[0]:>12.2f}x"
            print(line)
        if len(names) == 2:
            a, b = res["cython"][1], res["python"][1]
            diff = max(_rel(x, y) for x, y in zip(a, b))
            print(f"{j:>6} {'max rel diff':>13} {diff:.3e}")


if __name__ == "__main__":
    main()
