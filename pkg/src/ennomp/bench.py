"""Timing harness: baseline vs E-NN pursuit over mixture sparsity."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .core import Dictionary
from .datagen import gen_mixtures, mixture_seed
from .errors import ENNError
from .nnsearch import SearchContext
from .pursuit import fnnomp_baseline, fnnomp_enn

BENCH_HEADER = "j,time_baseline,time_enn,acceleration,avg_candidates,runs,support_match"
CANDIDATES_HEADER = "j,iteration,avg_candidates"


@dataclass
class BenchRecord:
    j: int
    time_baseline: float
    time_enn: float
    acceleration: float
    avg_candidates: float
    runs: int
    support_match: float = 1.0


def _timed(fn, queries) -> float:
    start = time.perf_counter()
    for q in range(queries.shape[1]):
        fn(queries[:, q])
    return (time.perf_counter() - start) / queries.shape[1]


def run_benchmark(d: Dictionary, ctx: SearchContext, j_values, queries_per_j: int, seed: int,
                  reps: int = 5, eps_rel: float = 1e-6):
    """Median per-decomposition time of both drivers for each sparsity in ``j_values``.

    Mixtures of sparsity ``j`` are decomposed with ``j_max = j``. Returns
    ``(records, candidate_rows)``; candidate rows are ``(j, iteration,
    mean |S| over all E-NN/U-NN calls in that iteration)``.
    """
    if reps < 1 or queries_per_j < 1:
        raise ENNError("reps and queries_per_j must be >= 1")
    records, cand_rows = [], []
    for j in sorted(set(int(v) for v in j_values)):
        mix = gen_mixtures(d, j, queries_per_j, mixture_seed(seed, j))
        ys = mix.queries
        eps = eps_rel  # queries are unit norm

        def base(y):
            return fnnomp_baseline(d, y, j, eps)

        def enn(y):
            return fnnomp_enn(ctx, y, j, eps)

        # untimed pass: warms caches/JIT and collects telemetry
        sizes, per_iter, matches = [], {}, 0
        for q in range(ys.shape[1]):
            cb = base(ys[:, q])
            ce, tel = enn(ys[:, q])
            matches += cb.support == ce.support
            for it, calls in enumerate(tel.set_sizes):
                sizes.extend(calls)
                per_iter.setdefault(it, []).extend(calls)
        # interleave repetitions so slow drift hits both drivers alike
        tb_reps, te_reps = [], []
        for _ in range(reps):
            tb_reps.append(_timed(base, ys))
            te_reps.append(_timed(enn, ys))
        tb, te = statistics.median(tb_reps), statistics.median(te_reps)
        records.append(BenchRecord(j, tb, te, tb / te, float(np.mean(sizes)), reps,
                                   matches / ys.shape[1]))
        for it in sorted(per_iter):
            cand_rows.append((j, it + 1, float(np.mean(per_iter[it]))))
    return records, cand_rows


def write_bench_csv(path, records, workers: int = 1) -> None:
    with open(path, "w") as fh:
        fh.write(f"# workers={workers}\n")
        fh.write(BENCH_HEADER + "\n")
        for r in sorted(records, key=lambda r: r.j):
            fh.write(f"{r.j},{r.time_baseline!r},{r.time_enn!r},{r.acceleration!r},"
                     f"{r.avg_candidates!r},{r.runs},{r.support_match!r}\n")


def read_bench_csv(path):
    out = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != BENCH_HEADER:
        raise ENNError(f"{path}: not a bench CSV")
    for ln in lines[1:]:
        j, tb, te, acc, cand, runs, match = ln.split(",")
        out.append(BenchRecord(int(j), float(tb), float(te), float(acc), float(cand),
                               int(runs), float(match)))
    return out


def write_candidates_csv(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write(CANDIDATES_HEADER + "\n")
        for j, it, avg in rows:
            fh.write(f"{j},{it},{avg!r}\n")


def read_candidates_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CANDIDATES_HEADER:
            raise ENNError(f"{path}: not a candidates CSV")
        rows = []
        for ln in fh:
            if ln.strip():
                j, it, avg = ln.strip().split(",")
                rows.append((int(j), int(it), float(avg)))
    return rows
