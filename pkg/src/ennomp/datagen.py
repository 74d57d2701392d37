"""Synthetic dictionaries and sparse non-negative mixtures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dictionary, normalize_columns
from .errors import ENNError

SWISS_T_RANGE = (1.5 * np.pi, 4.5 * np.pi)
SWISS_HEIGHT = 21.0
MIN_WEIGHT = 1e-12


@dataclass
class MixtureSet:
    queries: np.ndarray          # (m, l), unit-norm columns
    supports: np.ndarray         # (l, j) atom indices
    weights: np.ndarray          # (l, j) raw U[0, 1] weights, before normalisation
    sparsity: int

    @property
    def l(self) -> int:
        return self.queries.shape[1]


def mixture_seed(seed: int, j: int) -> int:
    """Independent stream per sparsity level derived from one user seed."""
    return int(np.random.SeedSequence([seed, j]).generate_state(1, dtype=np.uint64)[0])


def gen_random_dictionary(m: int, n: int, seed: int) -> Dictionary:
    if m < 1 or n < 1:
        raise ENNError("m and n must be >= 1")
    rng = np.random.default_rng(seed)
    return normalize_columns(rng.standard_normal((m, n)))


def gen_planted_dictionary(m: int, n: int, rank: int, seed: int, noise: float = 0.0) -> Dictionary:
    """Atoms drawn from a random ``rank``-dimensional subspace of R^m.

    With ``noise > 0`` an isotropic Gaussian perturbation of that relative
    size is added before normalisation, giving an approximately low-rank
    library.
    """
    if not 1 <= rank <= m:
        raise ENNError(f"rank must be in [1, {m}]")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((m, rank)))
    raw = basis @ rng.standard_normal((rank, n))
    raw /= np.linalg.norm(raw, axis=0)
    if noise > 0:
        raw += noise * rng.standard_normal((m, n)) / np.sqrt(m)
    return normalize_columns(raw)


def swiss_roll_points(n: int, seed: int):
    """Classic 3-D Swiss Roll sample; returns ``(points (3, n), t, h)``."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(*SWISS_T_RANGE, size=n)
    h = rng.uniform(0.0, SWISS_HEIGHT, size=n)
    return np.vstack((t * np.cos(t), h, t * np.sin(t))), t, h


def gen_swiss_roll(n: int, m: int, seed: int) -> Dictionary:
    """Swiss Roll lifted isometrically into R^m, one unit-norm atom per point.

    The lift uses a random m x 3 matrix with orthonormal columns, so every
    atom lies in the same 3-dimensional linear subspace.
    """
    if m < 3 or n < 1:
        raise ENNError("gen_swiss_roll needs m >= 3 and n >= 1")
    pts, _, _ = swiss_roll_points(n, seed)
    rng = np.random.default_rng([seed, 1])
    lift, _ = np.linalg.qr(rng.standard_normal((m, 3)))
    return normalize_columns(lift @ pts)


def gen_mixtures(d: Dictionary, j: int, l: int, seed: int) -> MixtureSet:
    """``l`` unit-norm mixtures of ``j`` distinct atoms with U[0, 1] weights."""
    if not 1 <= j <= d.n:
        raise ENNError(f"sparsity j must be in [1, {d.n}], got {j}")
    if l < 1:
        raise ENNError("l must be >= 1")
    rng = np.random.default_rng(seed)
    supports = np.empty((l, j), dtype=np.int64)
    weights = np.empty((l, j))
    queries = np.empty((d.m, l), order="F")
    for q in range(l):
        supports[q] = rng.choice(d.n, size=j, replace=False)
        w = rng.uniform(0.0, 1.0, size=j)
        while (small := w < MIN_WEIGHT).any():
            w[small] = rng.uniform(0.0, 1.0, size=int(small.sum()))
        weights[q] = w
        y = d.atoms[:, supports[q]] @ w
        queries[:, q] = y / np.linalg.norm(y)
    return MixtureSet(queries, supports, weights, j)


def write_supports_csv(path, mix: MixtureSet) -> None:
    with open(path, "w") as fh:
        fh.write("query_id,atom_id,weight\n")
        for q in range(mix.l):
            for a, w in zip(mix.supports[q], mix.weights[q]):
                fh.write(f"{q},{int(a)},{float(w)!r}\n")


def read_supports_csv(path):
    """Return a list of (query_id, atom_id, weight) tuples."""
    out = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "query_id,atom_id,weight":
            raise ENNError(f"{path}: unexpected header {header!r}")
        for line in fh:
            if line.strip():
                q, a, w = line.strip().split(",")
                out.append((int(q), int(a), float(w)))
    return out
