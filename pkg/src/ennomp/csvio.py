"""CSV writers/readers for pursuit results, distortion CDFs and study tables."""

from __future__ import annotations

import numpy as np

from .embedding import DistortionStats
from .errors import ENNError
from .pursuit import SparseCode

CODE_HEADER = "atom_id,coefficient"
SUMMARY_HEADER = "residual_norm,iterations"
CDF_HEADER = "distortion,cum_prob"
STATS_HEADER = "j,delta_mean,delta_max,delta_min"
EXCEED_HEADER = "exceed_fraction"


def _lines(path):
    with open(path) as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def write_sparse_code(dest, code: SparseCode) -> None:
    """Write to a path, or to an open text stream such as ``sys.stdout``."""
    lines = [CODE_HEADER]
    lines += [f"{int(a)},{float(c)!r}" for a, c in zip(code.support, code.coefficients)]
    lines += [SUMMARY_HEADER, f"{float(code.residual_norm)!r},{int(code.iterations_used)}"]
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w") as fh:
            fh.write(text)


def read_sparse_code(path) -> SparseCode:
    lines = _lines(path)
    if not lines or lines[0] != CODE_HEADER or SUMMARY_HEADER not in lines:
        raise ENNError(f"{path}: not a sparse-code CSV")
    cut = lines.index(SUMMARY_HEADER)
    support, coef = [], []
    for ln in lines[1:cut]:
        a, c = ln.split(",")
        support.append(int(a))
        coef.append(float(c))
    res, iters = lines[cut + 1].split(",")
    return SparseCode(support, np.array(coef), float(res), int(iters))


def write_cdf(path, table) -> None:
    with open(path, "w") as fh:
        fh.write(CDF_HEADER + "\n")
        for dist, prob in table:
            fh.write(f"{float(dist)!r},{float(prob)!r}\n")


def read_cdf(path) -> np.ndarray:
    lines = _lines(path)
    if not lines or lines[0] != CDF_HEADER:
        raise ENNError(f"{path}: not a CDF CSV")
    return np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]]).reshape(-1, 2)


def write_stats(path, stats: DistortionStats) -> None:
    with open(path, "w") as fh:
        fh.write(STATS_HEADER + "\n")
        for j, mean, hi, lo in stats.rows():
            fh.write(f"{j},{mean!r},{hi!r},{lo!r}\n")
        fh.write(EXCEED_HEADER + "\n")
        fh.write(f"{stats.exceed_fraction!r}\n")


def read_stats(path):
    """Return ``(rows, exceed_fraction)`` with rows ``(j, mean, max, min)``."""
    lines = _lines(path)
    if not lines or lines[0] != STATS_HEADER or EXCEED_HEADER not in lines:
        raise ENNError(f"{path}: not a distortion-stats CSV")
    cut = lines.index(EXCEED_HEADER)
    rows = []
    for ln in lines[1:cut]:
        j, mean, hi, lo = ln.split(",")
        rows.append((int(j), float(mean), float(hi), float(lo)))
    return rows, float(lines[cut + 1])
