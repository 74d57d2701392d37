"""``ennomp`` command line.

Exit codes: 0 success, 1 I/O or file-format error, 2 validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .bench import run_benchmark, write_bench_csv, write_candidates_csv
from .core import load_dictionary, read_matrix, write_matrix
from .csvio import write_cdf, write_sparse_code, write_stats
from .datagen import (
    gen_mixtures,
    gen_planted_dictionary,
    gen_random_dictionary,
    gen_swiss_roll,
    write_supports_csv,
)
from .embedding import (
    Embedding,
    cdf_table,
    fit_pca,
    learn_delta,
    load_embedding,
    mixture_distortion_study,
    random_projection,
    read_delta,
    save_embedding,
)
from .errors import BadMagic, DimensionMismatch, DimensionZero, ENNError, TruncatedFile
from .nnsearch import SearchContext
from .pursuit import fnnomp_baseline, fnnomp_enn

log = logging.getLogger("ennomp")

EXIT_IO = 1
EXIT_VALIDATION = 2


def _load_embedding(path, delta_scale: float = 1.0) -> Embedding:
    e = load_embedding(path)
    delta = read_delta(path)
    if delta is not None:
        e.delta = delta * delta_scale
    return e


def cmd_gen_dict(args):
    if args.rank:
        d = gen_planted_dictionary(args.m, args.n, args.rank, args.seed, noise=args.noise)
    else:
        d = gen_random_dictionary(args.m, args.n, args.seed)
    write_matrix(args.out, d.atoms)


def cmd_gen_swiss(args):
    write_matrix(args.out, gen_swiss_roll(args.n, args.m, args.seed).atoms)


def cmd_gen_mix(args):
    d = load_dictionary(args.dict)
    mix = gen_mixtures(d, args.j, args.l, args.seed)
    write_matrix(args.out, mix.queries)
    if args.supports:
        write_supports_csv(args.supports, mix)


def cmd_learn(args):
    d = load_dictionary(args.dict)
    if args.method == "pca":
        e = fit_pca(d.atoms, args.k)
    elif args.method == "randproj":
        e = random_projection(args.k, d.m, args.seed)
    else:
        if not args.q_file:
            raise ENNError("--method load requires --q-file")
        e = load_embedding(args.q_file)
    delta, cdf = learn_delta(e, d)
    save_embedding(e, args.out)
    cdf_path = args.cdf or str(Path(args.out).with_suffix(".cdf.csv"))
    write_cdf(cdf_path, cdf_table(cdf, args.cdf_points))
    print(f"delta={delta!r} k={e.k} m={e.m} pairs={cdf.shape[0]}")


def cmd_decompose(args):
    d = load_dictionary(args.dict)
    queries = read_matrix(args.query)
    if queries.shape[0] != d.m:
        raise DimensionMismatch(f"query length {queries.shape[0]} != atom dimension {d.m}")
    if not 0 <= args.column < queries.shape[1]:
        raise ENNError(f"--column {args.column} out of range (file has {queries.shape[1]})")
    y = np.ascontiguousarray(queries[:, args.column])
    eps = args.eps * float(np.linalg.norm(y))
    if args.mode == "baseline":
        code = fnnomp_baseline(d, y, args.jmax, eps)
    else:
        if not args.embed:
            raise ENNError("--mode enn requires --embed")
        e = _load_embedding(args.embed, args.delta_scale)
        code, tel = fnnomp_enn(SearchContext.build(d, e), y, args.jmax, eps)
        log.info("candidate set sizes per iteration: %s", tel.set_sizes)
    write_sparse_code(args.out or sys.stdout, code)


def cmd_study(args):
    d = load_dictionary(args.dict)
    e = _load_embedding(args.embed, args.delta_scale)
    stats = mixture_distortion_study(d, e, args.jmax, args.l, args.seed)
    write_stats(args.out, stats)
    print(f"exceed_fraction={stats.exceed_fraction!r} delta={stats.delta!r}")


def cmd_bench(args):
    d = load_dictionary(args.dict)
    e = _load_embedding(args.embed, args.delta_scale)
    ctx = SearchContext.build(d, e)
    records, cand_rows = run_benchmark(d, ctx, range(args.jmin, args.jmax + 1),
                                       args.queries, args.seed, reps=args.reps)
    write_bench_csv(args.out, records, workers=1)
    cand_path = args.candidates_out or str(Path(args.out).with_suffix(".candidates.csv"))
    write_candidates_csv(cand_path, cand_rows)
    for r in records:
        print(f"j={r.j} baseline={r.time_baseline:.3e}s enn={r.time_enn:.3e}s "
              f"acceleration={r.acceleration:.2f} avg|S|={r.avg_candidates:.1f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ennomp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-dict", help="random (or planted low-rank) unit-norm dictionary")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rank", type=int, default=0, help="plant atoms in a subspace of this rank")
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_dict)

    s = sub.add_parser("gen-swiss", help="Swiss Roll library lifted into R^m")
    s.add_argument("--n", type=int, default=4041)
    s.add_argument("--m", type=int, default=1507)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_swiss)

    s = sub.add_parser("gen-mix", help="unit-norm non-negative mixtures of j atoms")
    s.add_argument("--dict", required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--l", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--supports", help="CSV of query_id,atom_id,weight")
    s.set_defaults(func=cmd_gen_mix)

    s = sub.add_parser("learn", help="build an embedding and learn its distortion bound")
    s.add_argument("--dict", required=True)
    s.add_argument("--method", choices=("pca", "randproj", "load"), default="pca")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--q-file", help="ENN1 matrix for --method load")
    s.add_argument("--out", required=True)
    s.add_argument("--cdf", help="CDF CSV path (default <out>.cdf.csv)")
    s.add_argument("--cdf-points", type=int, default=10000, help="0 writes every pair")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("decompose", help="non-negative sparse code of one query")
    s.add_argument("--dict", required=True)
    s.add_argument("--embed")
    s.add_argument("--query", required=True)
    s.add_argument("--column", type=int, default=0)
    s.add_argument("--jmax", type=int, default=5)
    s.add_argument("--eps", type=float, default=1e-6, help="stop at ||r|| <= eps * ||y||")
    s.add_argument("--mode", choices=("baseline", "enn"), default="enn")
    s.add_argument("--delta-scale", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("study", help="mixture distortion statistics per sparsity")
    s.add_argument("--dict", required=True)
    s.add_argument("--embed", required=True)
    s.add_argument("--jmax", type=int, default=5)
    s.add_argument("--l", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--delta-scale", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("bench", help="time baseline vs E-NN pursuit per sparsity")
    s.add_argument("--dict", required=True)
    s.add_argument("--embed", required=True)
    s.add_argument("--jmin", type=int, default=1)
    s.add_argument("--jmax", type=int, default=5)
    s.add_argument("--queries", type=int, default=50)
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--delta-scale", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.add_argument("--candidates-out", help="default <out>.candidates.csv")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", _kernels.BACKEND)
    try:
        args.func(args)
    except (OSError, BadMagic, TruncatedFile, DimensionZero) as exc:
        print(f"ennomp: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # ENNError and malformed numbers in text inputs
        print(f"ennomp: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
