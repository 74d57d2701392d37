"""Exact nearest-neighbour search through a linear embedding.

The search shortlists atoms in the embedded space using the radius

    rho = d(y, phi_t) + delta,     t = embedded-space nearest atom,

and resolves the winner with original-space distances computed only for
the shortlist. :func:`unn_next` rejects the current winner and returns the
next nearest atom, reusing every distance already computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import Dictionary, as_vector
from .embedding import Embedding, embed_dictionary
from .errors import AllExcluded, DimensionMismatch, EmptyCandidates, NotACandidate

# absorbs rounding in the comparison emb_d <= rho (delta = 0 must still admit ties)
RADIUS_SLACK = 1e-10

EXHAUSTED = None


@dataclass(frozen=True)
class SearchContext:
    dictionary: Dictionary
    embedding: Embedding
    embedded: np.ndarray
    delta: float

    @classmethod
    def build(cls, d: Dictionary, e: Embedding, delta_scale: float = 1.0) -> "SearchContext":
        delta = e.require_delta() * float(delta_scale)
        return cls(d, e, embed_dictionary(e, d), delta)

    @property
    def n(self) -> int:
        return self.dictionary.n


@dataclass
class CandidateState:
    """Working set of one E-NN/U-NN query.

    ``cached`` marks atoms whose original-space distance sits in
    ``original_dists``; candidates are the cached atoms not yet rejected.
    """

    query: np.ndarray
    embedded_query: np.ndarray
    embedded_dists: np.ndarray
    original_dists: np.ndarray
    cached: np.ndarray
    rejected: np.ndarray
    current: int = -1
    set_sizes: list = field(default_factory=list)
    distance_evals: int = 0

    @property
    def candidates(self) -> np.ndarray:
        return np.flatnonzero(self.cached & ~self.rejected)

    @property
    def n_candidates(self) -> int:
        return int(np.count_nonzero(self.cached & ~self.rejected))


def brute_force_nn(d: Dictionary, y, excluded=()):
    """Nearest atom to ``y`` over non-excluded indices; ties go to the smaller index."""
    y = as_vector(y, d.m)
    dists = np.linalg.norm(d.atoms - y[:, None], axis=0)
    mask = np.zeros(d.n, dtype=bool)
    mask[list(excluded)] = True
    if mask.all():
        raise AllExcluded("every atom is excluded")
    dists[mask] = np.inf
    i = int(np.argmin(dists))
    return i, float(dists[i])


def _radius(ctx: SearchContext, state: CandidateState, t: int) -> float:
    if not state.cached[t]:
        diff = ctx.dictionary.atoms[:, t] - state.query
        state.original_dists[t] = np.sqrt(diff @ diff)
        state.cached[t] = True
        state.distance_evals += 1
    return state.original_dists[t] + ctx.delta + RADIUS_SLACK


def enn_init(ctx: SearchContext, y) -> CandidateState:
    """Embed ``y``, form the shortlist and compute its original-space distances."""
    y = np.ascontiguousarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != ctx.dictionary.m:
        raise DimensionMismatch(f"query length {y.shape[0]} != atom dimension {ctx.dictionary.m}")
    yhat = ctx.embedding.q @ y
    emb_d = _kernels.embedded_distances(ctx.embedded, yhat)
    n = ctx.n
    state = CandidateState(
        query=y,
        embedded_query=yhat,
        embedded_dists=emb_d,
        original_dists=np.full(n, np.nan),
        cached=np.zeros(n, dtype=bool),
        rejected=np.zeros(n, dtype=bool),
    )
    t = int(np.argmin(emb_d))
    rho = _radius(ctx, state, t)
    state.distance_evals += _kernels.admit_within(
        emb_d, rho, state.rejected, state.cached, ctx.dictionary.atoms, y, state.original_dists
    )
    state.set_sizes.append(state.n_candidates)
    return state


def enn_select(state: CandidateState) -> int:
    """Candidate with the smallest cached original-space distance."""
    i = _kernels.candidate_argmin(state.original_dists, state.cached, state.rejected)
    if i < 0:
        raise EmptyCandidates("candidate set is empty")
    state.current = int(i)
    return state.current


def unn_next(ctx: SearchContext, state: CandidateState, mu: int):
    """Reject ``mu`` and return the next nearest atom, or ``EXHAUSTED`` (None)."""
    if not state.cached[mu] or state.rejected[mu]:
        raise NotACandidate(mu)
    state.rejected[mu] = True
    t = _kernels.masked_argmin(state.embedded_dists, state.rejected)
    if t < 0:
        state.set_sizes.append(0)
        return EXHAUSTED
    rho = _radius(ctx, state, t)
    state.distance_evals += _kernels.admit_within(
        state.embedded_dists, rho, state.rejected, state.cached,
        ctx.dictionary.atoms, state.query, state.original_dists,
    )
    state.set_sizes.append(state.n_candidates)
    return enn_select(state)


def enumerate_neighbours(ctx: SearchContext, y, count: int):
    """First ``count`` atoms in increasing original-space distance via E-NN/U-NN."""
    state = enn_init(ctx, y)
    out = [enn_select(state)]
    while len(out) < count:
        nxt = unn_next(ctx, state, out[-1])
        if nxt is EXHAUSTED:
            break
        out.append(nxt)
    return out, state
