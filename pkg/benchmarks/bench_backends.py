"""Compiled extension vs numpy fallback on the hot kernels.

    python benchmarks/bench_backends.py --m 4000 --repeat 3

Each kernel runs on identical inputs under both backends; the table reports
the best wall time of ``--repeat`` runs and the ratio python / compiled.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from gbsvr import _backend
from gbsvr.data import fit_standardize
from gbsvr.datagen import NoiseSpec, SyntheticSpec, gen_synthetic
from gbsvr.granulation import GranulationConfig, generate_balls
from gbsvr.kernel import KernelSpec, gram
from gbsvr.solver import DualProblem, SolverConfig, solve_dual


def cases(m: int, seed: int):
    d, _ = fit_standardize(gen_synthetic(SyntheticSpec("A", m, NoiseSpec(1, seed))))
    kernel = KernelSpec("rbf", 0.3)
    balls = generate_balls(d, GranulationConfig(purity=0.95, min_points=4, seed=seed))
    G = gram(kernel, balls.centers)
    problem = DualProblem(G, balls.radii, balls.y_hat, 0.1, 1.0)
    rng = np.random.default_rng(seed)
    pts = np.ascontiguousarray(rng.normal(size=(m, 2)))
    a, s = rng.normal(0, 2, len(balls)), rng.normal(0, 2, len(balls))
    smo_m = min(m, 1500)
    K = np.ascontiguousarray(gram(kernel, d.features[:smo_m]))
    y = np.ascontiguousarray(d.targets[:smo_m])
    cfg = GranulationConfig(purity=0.95, min_points=4, seed=seed)
    return {
        f"two_means (m={m})": lambda: _backend.two_means(pts, 0, 1, 100),
        f"projection (n={len(balls)})": lambda: _backend.project_box_hyperplane(a, s, 1.0),
        f"granulation (m={m})": lambda: generate_balls(d, cfg),
        f"dual solve (n={len(balls)})": lambda: solve_dual(problem, SolverConfig(tol=1e-3)),
        f"smo svr (m={smo_m})": lambda: _backend.smo_svr(K, y, 0.1, 1.0, 1e-3, 100000, False),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)

    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled extension not built; run `python setup.py build_ext --inplace`", file=sys.stderr)
    timings = {}
    names = None
    for name in backends:
        _backend.use(name)
        jobs = cases(args.m, args.seed)
        names = list(jobs)
        timings[name] = {k: min(timeit.repeat(fn, number=1, repeat=args.repeat)) for k, fn in jobs.items()}
    _backend.use(backends[0])

    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends) + "     ratio")
    for n in names:
        row = "  ".join(f"{timings[b][n]:10.4f}" for b in backends)
        ratio = timings["python"][n] / timings["compiled"][n] if len(backends) == 2 else float("nan")
        print(f"{n:<{width}}  {row}  {ratio:8.2f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"m": args.m, "repeat": args.repeat, "seconds": timings}, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
