"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import random
import timeit

import numpy as np

from camroute import _pykernels, kernels
from camroute.geometry import FieldOfView, Position, enumerate_cover_sets, sample_points, triangle_coords

try:
    from camroute import _ckernels
except ImportError:
    _ckernels = None


def _fovs(rng, n, side):
    return {i: FieldOfView(Position(rng.uniform(0, side), rng.uniform(0, side)), rng.uniform(0, 2 * math.pi))
            for i in range(n)}


def _cases(rng):
    fovs = _fovs(rng, 40, 250.0)
    px, py = sample_points(fovs[0], 2.0)
    tris = np.array([triangle_coords(f) for f in fovs.values()])
    nx = np.array([rng.uniform(-150, 150) for _ in range(60)])
    ny = np.array([rng.uniform(-150, 150) for _ in range(60)])
    return {
        "triangle_mask": lambda impl: impl.triangle_mask(px, py, tuple(tris[1])),
        "coverage_matrix": lambda impl: impl.coverage_matrix(px, py, tris),
        "gabriel_mask": lambda impl: impl.gabriel_mask(0.0, 0.0, nx, ny),
        "enumerate_cover_sets": lambda impl: _with_backend(impl, lambda: enumerate_cover_sets(0, fovs)),
    }


def _with_backend(impl, fn):
    saved = kernels._impl
    kernels._impl = impl
    try:
        return fn()
    finally:
        kernels._impl = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args(argv)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<22}" + "".join(f"{name + ' (ms)':>16}" for name, _ in backends) + f"{'speedup':>10}")
    for name, call in _cases(random.Random(3)).items():
        times = [min(timeit.repeat(lambda: call(impl), number=args.number, repeat=args.repeat)) / args.number * 1e3
                 for _, impl in backends]
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) > 1 else f"{'n/a':>10}"
        print(f"{name:<22}" + "".join(f"{t:16.3f}" for t in times) + speed)
    if not _ckernels:
        print("compiled core not built; only the fallback was timed")


if __name__ == "__main__":
    main()
