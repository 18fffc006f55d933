"""Time the compiled core against the NumPy fallback.

    python benchmarks/bench_core.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from charkern import _backend


def cases(rng):
    t = np.linspace(-1, 1, 20_000)
    kap = rng.standard_normal(1000)
    A = rng.standard_normal((200, 200))
    K = A @ A.T
    F = rng.dirichlet(np.ones(200), size=2000)
    obs = rng.integers(0, 200, 2000).astype(np.int64)
    return {
        "gegenbauer_table n=40, 20k pts": lambda m: m.gegenbauer_table(40, 1.5, t),
        "group_gram Z10^3": lambda m: m.group_gram(kap, (10, 10, 10)),
        "character_analysis Z10^3": lambda m: m.character_analysis(kap, (10, 10, 10)),
        "character_synthesis Z1000": lambda m: m.character_synthesis(kap, (1000,)),
        "kernel_scores 2000 x 200": lambda m: m.kernel_scores(K, F, obs),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _backend.available()
    names = sorted(backends)
    print(f"{'case':34s}" + "".join(f"{n:>12s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(np.random.default_rng(0)).items():
        best = {}
        for n in names:
            fn(backends[n])  # warm-up
            best[n] = min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat))
        line = f"{label:34s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if "cython" in best:
            line += f"   {best['python'] / best['cython']:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
