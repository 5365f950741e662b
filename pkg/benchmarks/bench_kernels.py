"""Compare the compiled and numpy split kernels.

Times split search, tree application and whole-model fits under each
available backend, and checks that both backends build identical models.

    python3 benchmarks/bench_kernels.py --rows 20000 --cols 120
"""

import argparse
import time

import numpy as np

from fraudwood import _backend
from fraudwood.boosting import GbdtParams, fit_gbdt
from fraudwood.forest import ForestParams, fit_forest
from fraudwood.tree import RankedMatrix, TreeParams, best_split, fit_tree


def make_data(rows, cols, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((rows, cols)) * 10.0 ** rng.uniform(-2, 4, cols)
    X[:, : cols // 3] = rng.integers(0, 2, (rows, cols // 3))  # one-hot-like columns
    latent = X[:, -1] / X[:, -1].std() - X[:, -2] / X[:, -2].std() + rng.standard_normal(rows)
    return X, (latent > 0).astype(float)


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--cols", type=int, default=120)
    ap.add_argument("--trees", type=int, default=10)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    X, y = make_data(args.rows, args.cols, args.seed)
    rm = RankedMatrix(X)
    small = np.sort(np.random.default_rng(1).choice(args.rows, 64, replace=False))
    tree = fit_tree(rm, y, TreeParams(args.depth))

    jobs = {
        "root split": lambda: best_split(rm, y),
        "64-row split": lambda: best_split(rm, y, row_subset=small),
        "apply tree": lambda: tree.apply(X),
        f"forest x{args.trees}": lambda: fit_forest(
            rm, y, ForestParams(n_trees=args.trees, max_depth=args.depth, seed=1)),
        f"gbdt x{args.trees}": lambda: fit_gbdt(
            rm, y, GbdtParams(n_trees=args.trees, max_depth=args.depth)),
    }
    backends = _backend.available()
    print(f"data: {args.rows} x {args.cols}, depth {args.depth}, backends: {', '.join(backends)}")
    results = {}
    for name in backends:
        with _backend.using(name):
            results[name] = {job: best_of(fn, args.repeat) for job, fn in jobs.items()}

    head = f"{'job':<14}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(head)
    for job in jobs:
        times = [results[b][job][0] for b in backends]
        line = f"{job:<14}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)

    if len(backends) == 2:
        a, b = (results[n] for n in backends)
        same = a["root split"][1] == b["root split"][1] and a["64-row split"][1] == b["64-row split"][1]
        same &= np.array_equal(a["apply tree"][1], b["apply tree"][1])
        for job in jobs:
            if job.startswith(("forest", "gbdt")):
                ta = a[job][1].trees if job.startswith("forest") else a[job][1].stages
                tb = b[job][1].trees if job.startswith("forest") else b[job][1].stages
                same &= all(s.structurally_equal(t) for s, t in zip(ta, tb))
        print("identical models across backends:", "yes" if same else "NO")
        if not same:
            raise SystemExit(1)


if __name__ == "__main__":
    main()
