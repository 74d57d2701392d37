"""Linear embeddings and the distance-distortion bound used by E-NN.

An :class:`Embedding` is a (k, m) operator ``q`` applied as ``q @ v`` (no
offset), plus the distortion bound ``delta`` learned over a dictionary:
the largest change in any pairwise atom distance caused by the map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import _kernels
from .core import Dictionary, as_matrix, as_vector, distance, read_enn1, write_enn1
from .errors import DeltaUnset, DimensionMismatch, ENNError, RankDeficientWarning

METHODS = ("PCA", "RandomProjection", "Loaded")
EIG_TOL = 1e-12
# pairs within this of delta are rounding ties, not exceedances
EXCEED_TOL = 1e-12


@dataclass
class Embedding:
    q: np.ndarray
    method: str = "Loaded"
    delta: float | None = None

    def __post_init__(self):
        self.q = as_matrix(self.q)
        if self.method not in METHODS:
            raise ENNError(f"unknown embedding method {self.method!r}")
        if self.delta is not None:
            self.delta = _check_delta(self.delta)

    @property
    def k(self) -> int:
        return self.q.shape[0]

    @property
    def m(self) -> int:
        return self.q.shape[1]

    def require_delta(self) -> float:
        if self.delta is None:
            raise DeltaUnset("embedding has no learned delta; run learn_delta first")
        return self.delta


def _check_delta(delta) -> float:
    delta = float(delta)
    if not np.isfinite(delta) or delta < 0:
        raise ENNError(f"delta must be finite and >= 0, got {delta!r}")
    return delta


@dataclass
class DistortionStats:
    """Per-sparsity distortion summary of mixtures against every atom."""

    j: np.ndarray
    delta_mean: np.ndarray
    delta_max: np.ndarray
    delta_min: np.ndarray
    exceed_fraction: float
    delta: float
    n_pairs: int = field(default=0)

    def rows(self):
        return list(zip(self.j.tolist(), self.delta_mean.tolist(),
                        self.delta_max.tolist(), self.delta_min.tolist()))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def fit_pca(data, k: int) -> Embedding:
    """Top-``k`` eigenvectors of the uncentred second-moment matrix of ``data``.

    ``data`` holds one sample per column. No mean is removed, so the
    resulting map stays linear. Warns with RankDeficientWarning when fewer
    than ``k`` eigenvalues exceed 1e-12.
    """
    data = as_matrix(data)
    m, ncols = data.shape
    if ncols < 2:
        raise ENNError("fit_pca needs at least two data columns")
    if not 1 <= k < m:
        raise ENNError(f"k must satisfy 1 <= k < {m}, got {k}")
    cov = (data @ data.T) / ncols
    vals, vecs = scipy.linalg.eigh(cov, subset_by_index=[m - k, m - 1])
    # descending eigenvalue, ties by ascending solver index
    order = np.lexsort((np.arange(k), -vals))
    vals, vecs = vals[order], vecs[:, order]
    if np.count_nonzero(vals > EIG_TOL) < k:
        warnings.warn(
            f"only {np.count_nonzero(vals > EIG_TOL)} of {k} eigenvalues exceed {EIG_TOL}",
            RankDeficientWarning,
            stacklevel=2,
        )
    # deterministic sign: largest-magnitude entry of each row is positive
    pivots = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    return Embedding(np.ascontiguousarray((vecs * signs).T), method="PCA")


def random_projection(k: int, m: int, seed: int) -> Embedding:
    """Gaussian map with i.i.d. N(0, 1/k) entries."""
    if not 1 <= k < m:
        raise ENNError(f"k must satisfy 1 <= k < m={m}, got {k}")
    rng = np.random.default_rng(seed)
    return Embedding(rng.normal(0.0, 1.0 / np.sqrt(k), size=(k, m)), method="RandomProjection")


def load_embedding(path) -> Embedding:
    """Load ``q`` from an ENN1 file; delta is left unset."""
    return Embedding(read_enn1(path), method="Loaded")


def delta_sidecar(path) -> Path:
    return Path(path).with_suffix(".delta")


def save_embedding(e: Embedding, path) -> None:
    """Write ``q`` as ENN1 and, if learned, delta to the ``.delta`` sidecar."""
    write_enn1(path, e.q)
    if e.delta is not None:
        delta_sidecar(path).write_text(f"{e.delta!r}\n")


def read_delta(path) -> float | None:
    side = delta_sidecar(path)
    if not side.exists():
        return None
    return _check_delta(side.read_text().strip())


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

def embed(e: Embedding, v) -> np.ndarray:
    return e.q @ as_vector(v, e.m)


def embed_dictionary(e: Embedding, d: Dictionary) -> np.ndarray:
    """Embedded atoms as a Fortran-ordered (k, n) matrix."""
    if d.m != e.m:
        raise DimensionMismatch(f"dictionary dimension {d.m} != embedding input {e.m}")
    return np.asfortranarray(e.q @ d.atoms)


def pair_distortion(e: Embedding, a, b) -> float:
    a = as_vector(a, e.m)
    b = as_vector(b, e.m)
    return abs(distance(a, b) - distance(e.q @ a, e.q @ b))


def learn_delta(e: Embedding, d: Dictionary):
    """Set ``e.delta`` to the largest pairwise-atom distortion.

    Returns ``(delta, cdf)`` where ``cdf`` holds all n(n-1)/2 pair
    distortions sorted ascending.
    """
    if d.n < 2:
        raise ENNError("learn_delta needs at least two atoms")
    emb = embed_dictionary(e, d)
    cdf = _kernels.pair_distortions(d.atoms, emb)
    cdf.sort()
    e.delta = float(cdf[-1])
    return e.delta, cdf


def cdf_table(cdf: np.ndarray, points: int = 0) -> np.ndarray:
    """(distortion, cumulative probability) rows, optionally thinned to ``points``."""
    n = cdf.shape[0]
    prob = np.arange(1, n + 1) / n
    if points and n > points:
        idx = np.unique(np.linspace(0, n - 1, points).round().astype(np.int64))
        return np.column_stack((cdf[idx], prob[idx]))
    return np.column_stack((cdf, prob))


def mixture_distortion_study(d: Dictionary, e: Embedding, j_max: int, l: int, seed: int,
                             chunk: int = 1000) -> DistortionStats:
    """Distortion of every (atom, mixture) pair for sparsities 1..j_max.

    ``exceed_fraction`` counts pairs, over all sparsities, whose distortion
    exceeds the learned delta by more than ``EXCEED_TOL``.
    """
    from .datagen import gen_mixtures, mixture_seed

    delta = e.require_delta()
    if j_max < 1 or l < 1:
        raise ENNError("j_max and l must be >= 1")
    if d.m != e.m:
        raise DimensionMismatch(f"dictionary dimension {d.m} != embedding input {e.m}")
    emb = embed_dictionary(e, d)
    js = np.arange(1, j_max + 1)
    means, maxs, mins = [], [], []
    exceed = 0
    total = 0
    for j in js:
        mix = gen_mixtures(d, int(j), l, mixture_seed(seed, int(j)))
        sums = []
        hi, lo = -np.inf, np.inf
        for start in range(0, l, chunk):
            y = mix.queries[:, start:start + chunk]
            dist = _kernels.cross_distortions(d.atoms, emb, np.asfortranarray(y),
                                              np.asfortranarray(e.q @ y))
            sums.append(dist.sum())
            hi = max(hi, dist.max())
            lo = min(lo, dist.min())
            exceed += int(np.count_nonzero(dist > delta + EXCEED_TOL))
        count = d.n * l
        total += count
        means.append(float(np.sum(sums)) / count)
        maxs.append(float(hi))
        mins.append(float(lo))
    return DistortionStats(js, np.array(means), np.array(maxs), np.array(mins),
                           exceed / total, delta, total)
