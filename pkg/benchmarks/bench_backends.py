"""Compare the compiled LAPACK kernels against the numpy/scipy fallback.

    python3 benchmarks/bench_backends.py [--sizes 250,500,1000,2000] [--times 100]

For each chain length the full single-configuration pipeline (walk
factorization plus ``C_k`` at every requested time) and the tight-binding
propagator are timed with both backends; the best of ``--repeat`` runs is
reported along with the maximum disagreement between the two backends.
"""

import argparse
import time

import numpy as np

from lrchain import _kernels_py, opw, tight_binding
from lrchain.opw import ChainSpec, build_walk_matrix, correlation_field
from lrchain.tight_binding import TbChainSpec, TbPropagator

try:
    from lrchain import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _with_backend(mod, fn):
    saved = opw.kernels, tight_binding.kernels
    opw.kernels = tight_binding.kernels = mod
    try:
        return fn()
    finally:
        opw.kernels, tight_binding.kernels = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="250,500,1000,2000")
    parser.add_argument("--times", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _kernels is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .` first")
    sizes = [int(s) for s in args.sizes.split(",")]
    times = np.linspace(0.0, 500.0, args.times)
    rng = np.random.default_rng(args.seed)
    backends = {"compiled": _kernels, "python": _kernels_py}

    print(f"{'model':<6}{'N':>7}{'compiled [s]':>15}{'python [s]':>13}{'speedup':>10}{'max |diff|':>13}")
    for n in sizes:
        spec = ChainSpec(n, rng.uniform(0.1, 0.9, n - 1))
        tb = TbChainSpec(n, rng.uniform(0.0, 2.0, n - 1))
        jobs = {
            "tfim": lambda: correlation_field(build_walk_matrix(spec), times).values,
            "tb": lambda: TbPropagator(tb).probabilities(times)[1],
        }
        for model, job in jobs.items():
            res = {name: _with_backend(mod, lambda: _best(job, args.repeat)) for name, mod in backends.items()}
            (tc, vc), (tp, vp) = res["compiled"], res["python"]
            diff = float(np.max(np.abs(vc - vp)))
            print(f"{model:<6}{n:>7}{tc:>15.4f}{tp:>13.4f}{tp / tc:>9.1f}x{diff:>13.1e}", flush=True)

    for name, mod in backends.items():
        walls = [_with_backend(mod, lambda: _best(lambda: correlation_field(
            build_walk_matrix(ChainSpec.homogeneous(n, 0.5)), times), args.repeat)[0]) for n in sizes]
        slope = np.polyfit(np.log(sizes), np.log(walls), 1)[0]
        print(f"tfim scaling exponent ({name}): {slope:.2f}")


if __name__ == "__main__":
    main()
