"""Timing comparison of the compiled and pure-numpy assembly kernels.

Usage: python benchmarks/bench_kernels.py [n_elements] [repeats]
"""

import sys
import time

import numpy as np

from stefanst.kernels import pure
from stefanst.spacetime import ref_tables

try:
    from stefanst.kernels import _core
except ImportError:
    _core = None


def _elements(kind, ne, rng):
    if kind == "tri":
        base = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    else:
        base = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    jitter = rng.normal(0, 0.03, (ne, base.shape[0], 2))
    shift = rng.random((ne, 1, 2))
    return np.ascontiguousarray(0.1 * (base[None] + jitter) + shift)


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ne = int(sys.argv[1]) if len(sys.argv) > 1 else 4000
    repeats = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    rng = np.random.default_rng(42)

    print(f"{ne} elements, best of {repeats} runs")
    for kind in ("tri", "quad"):
        tab = ref_tables(kind)
        ns = 3 if kind == "tri" else 4
        coords = _elements(kind, ne, rng)

        scalar_args = (coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
                       rng.random((ne, ns)) + 1.0, rng.random((ne, ns)),
                       rng.normal(0, 1, (ne, ns, 2)),
                       rng.normal(0, 1, (ne, ns, 2)),
                       rng.normal(0, 1, (ne, ns)), rng.random(ne), 0.25)
        ns_args = (coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
                   rng.random((ne, ns)) + 1.0, rng.random((ne, ns)) + 0.1,
                   rng.normal(0, 1, (ne, ns, 2)),
                   rng.normal(0, 1, (ne, ns, 2)),
                   rng.normal(0, 1, (ne, ns, 2)), np.array([0.3, -0.1]),
                   rng.random(ne), rng.random(ne), 0.25)

        for name, args in (("scalar_slab", scalar_args),
                           ("ns_slab", ns_args)):
            t_py = _time(getattr(pure, name), args, repeats)
            line = f"  {kind}/{name:<12} python {t_py * 1e3:8.2f} ms"
            if _core is not None:
                t_cy = _time(getattr(_core, name), args, repeats)
                line += (f"   cython {t_cy * 1e3:8.2f} ms"
                         f"   speedup {t_py / t_cy:5.1f}x")
            print(line)

    pts = np.ascontiguousarray(rng.random((20000, 2)))
    sa = np.ascontiguousarray(rng.random((200, 2)))
    sb = np.ascontiguousarray(rng.random((200, 2)))
    cp = np.ascontiguousarray(rng.random((200, 2)))
    args = (pts, sa, sb, cp)
    t_py = _time(pure.reinit_distance, args, repeats)
    line = f"  reinit_distance    python {t_py * 1e3:8.2f} ms"
    if _core is not None:
        t_cy = _time(_core.reinit_distance, args, repeats)
        line += (f"   cython {t_cy * 1e3:8.2f} ms"
                 f"   speedup {t_py / t_cy:5.1f}x")
    print(line)
    if _core is None:
        print("compiled kernels unavailable; python timings only")


if __name__ == "__main__":
    main()
