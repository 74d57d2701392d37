"""Time the numba kernels against their numpy fallbacks on Swiss-Roll-shaped data.

    python3 benchmarks/bench_kernels.py --n 4041 --m 1507 --k 3

Each kernel is run once untimed (JIT compile) and then timed as the best of
``--repeat`` runs. Outputs are compared so a speedup never hides a wrong answer.
"""

import argparse
import time

import numpy as np

from ennomp import _kernels
from ennomp.datagen import gen_mixtures, gen_swiss_roll
from ennomp.embedding import embed_dictionary, fit_pca


def best_of(fn, args, repeat):
    fn(*[a.copy(order="K") if isinstance(a, np.ndarray) else a for a in args])
    times = []
    for _ in range(repeat):
        fresh = [a.copy(order="K") if isinstance(a, np.ndarray) else a for a in args]
        start = time.perf_counter()
        out = fn(*fresh)
        times.append(time.perf_counter() - start)
    return min(times), out


def workloads(n, m, k, seed):
    d = gen_swiss_roll(n, m, seed)
    e = fit_pca(d.atoms, k)
    emb = embed_dictionary(e, d)
    mix = gen_mixtures(d, 3, 64, seed + 1)
    y = mix.queries[:, 0].copy()
    yhat = e.q @ y
    emb_d = np.linalg.norm(emb - yhat[:, None], axis=0)
    radius = float(np.quantile(emb_d, 0.05))
    flags = np.zeros(n, bool)
    return {
        "embedded_distances": (emb, yhat),
        "admit_within": (emb_d, radius, flags, flags, d.atoms, y, np.full(n, np.nan)),
        "masked_argmin": (emb_d, flags),
        "cross_distortions": (d.atoms, emb, np.asfortranarray(mix.queries),
                              np.asfortranarray(e.q @ mix.queries)),
        "pair_distortions": (d.atoms, emb),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=4041)
    p.add_argument("--m", type=int, default=1507)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--skip-pairs", action="store_true", help="skip the O(N^2 M) learn_delta kernel")
    args = p.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"n={args.n} m={args.m} k={args.k} threads={_kernels.numba.get_num_threads()}")
    print(f"{'kernel':<20} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>8}  max|diff|")
    for name, call_args in workloads(args.n, args.m, args.k, args.seed).items():
        if name == "pair_distortions" and args.skip_pairs:
            continue
        t_np, out_np = best_of(_kernels.NUMPY_KERNELS[name], call_args, args.repeat)
        t_nb, out_nb = best_of(_kernels.NUMBA_KERNELS[name], call_args, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_np, float) - np.asarray(out_nb, float))))
        print(f"{name:<20} {t_np:12.3e} {t_nb:12.3e} {t_np / t_nb:8.2f}  {diff:.1e}")


if __name__ == "__main__":
    main()
