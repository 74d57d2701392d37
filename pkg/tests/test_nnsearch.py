import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ennomp.core import normalize_columns
from ennomp.datagen import gen_mixtures, gen_random_dictionary, gen_swiss_roll
from ennomp.embedding import Embedding, fit_pca, learn_delta, random_projection
from ennomp.errors import AllExcluded, DeltaUnset, DimensionMismatch, EmptyCandidates, NotACandidate
from ennomp.nnsearch import (
    EXHAUSTED,
    SearchContext,
    brute_force_nn,
    enn_init,
    enn_select,
    enumerate_neighbours,
    unn_next,
)


def _sorted_by_distance(d, y):
    dists = np.linalg.norm(d.atoms - y[:, None], axis=0)
    return list(np.argsort(dists, kind="stable")), dists


def _ctx(d, e, delta=None):
    if delta is not None:
        e.delta = delta
    elif e.delta is None:
        learn_delta(e, d)
    return SearchContext.build(d, e)


@pytest.fixture(scope="module")
def pca_ctx():
    d = gen_random_dictionary(20, 100, seed=11)
    return _ctx(d, fit_pca(d.atoms, 5))


# -- brute force -------------------------------------------------------------------

def test_brute_force_examples(small_dict):
    y = small_dict.atom(5)
    assert brute_force_nn(small_dict, y) == (5, 0.0)
    order, dists = _sorted_by_distance(small_dict, y)
    i, dist = brute_force_nn(small_dict, y, {5})
    assert i == order[1] and dist == pytest.approx(dists[order[1]])
    with pytest.raises(AllExcluded):
        brute_force_nn(small_dict, y, range(100))


def test_brute_force_ties_low_index():
    d = normalize_columns(np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]))
    assert brute_force_nn(d, np.array([1.0, 0.0]))[0] == 0


def test_brute_force_matches_full_sort(small_dict, rng):
    for _ in range(20):
        y = rng.standard_normal(20)
        order, _ = _sorted_by_distance(small_dict, y)
        assert brute_force_nn(small_dict, y)[0] == order[0]


# -- enn_init / enn_select -----------------------------------------------------------

def test_enn_init_member_query(pca_ctx):
    y = pca_ctx.dictionary.atom(7)
    st_ = enn_init(pca_ctx, y)
    assert 7 in st_.candidates
    assert st_.original_dists[7] == 0.0
    assert enn_select(st_) == 7
    assert st_.embedded_dists.shape == (100,) and (st_.embedded_dists >= 0).all()
    assert not st_.rejected.any()


def test_enn_init_saturated_radius(small_dict):
    ctx = _ctx(small_dict, fit_pca(small_dict.atoms, 4), delta=10.0)
    st_ = enn_init(ctx, small_dict.atom(0) * 0.3)
    assert st_.n_candidates == 100


def test_enn_init_errors(small_dict):
    e = fit_pca(small_dict.atoms, 3)
    with pytest.raises(DeltaUnset):
        SearchContext.build(small_dict, e)
    ctx = _ctx(small_dict, e)
    with pytest.raises(DimensionMismatch):
        enn_init(ctx, np.ones(19))


def test_enn_candidates_contain_true_nn(pca_ctx, rng):
    d = pca_ctx.dictionary
    for _ in range(50):
        y = rng.standard_normal(20)
        st_ = enn_init(pca_ctx, y)
        truth = brute_force_nn(d, y)[0]
        assert truth in st_.candidates
        assert enn_select(st_) == truth


def test_enn_select_errors_and_single(pca_ctx):
    st_ = enn_init(pca_ctx, pca_ctx.dictionary.atom(3))
    st_.cached[:] = False
    with pytest.raises(EmptyCandidates):
        enn_select(st_)
    st_.cached[42] = True
    st_.original_dists[42] = 5.0
    assert enn_select(st_) == 42


def test_cache_coherence(pca_ctx, rng):
    d = pca_ctx.dictionary
    y = rng.standard_normal(20)
    st_ = enn_init(pca_ctx, y)
    mu = enn_select(st_)
    for _ in range(15):
        nxt = unn_next(pca_ctx, st_, mu)
        cached = np.flatnonzero(st_.cached)
        np.testing.assert_allclose(st_.original_dists[cached],
                                   np.linalg.norm(d.atoms[:, cached] - y[:, None], axis=0),
                                   atol=1e-12)
        assert not (st_.rejected & ~st_.cached).any()
        mu = nxt


# -- unn_next -----------------------------------------------------------------------

def test_unn_single_atom_exhausts():
    d = normalize_columns(np.array([[1.0], [1.0]]))
    ctx = _ctx(d, Embedding(np.array([[1.0, 0.0]])), delta=0.5)
    st_ = enn_init(ctx, np.array([1.0, 0.0]))
    assert unn_next(ctx, st_, enn_select(st_)) is EXHAUSTED


def test_unn_rejects_non_candidate(small_dict):
    ctx = _ctx(small_dict, fit_pca(small_dict.atoms, 5), delta=0.05)
    st_ = enn_init(ctx, small_dict.atom(0))
    outside = int(np.flatnonzero(~st_.cached)[0])
    with pytest.raises(NotACandidate):
        unn_next(ctx, st_, outside)
    unn_next(ctx, st_, 0)
    with pytest.raises(NotACandidate):
        unn_next(ctx, st_, 0)


def test_unn_full_sort_order(pca_ctx, rng):
    d = pca_ctx.dictionary
    for _ in range(20):
        y = rng.standard_normal(20)
        got, _ = enumerate_neighbours(pca_ctx, y, 100)
        order, _ = _sorted_by_distance(d, y)
        assert got == order


def test_unn_enumerates_everything_then_exhausts(pca_ctx, rng):
    y = rng.standard_normal(20)
    st_ = enn_init(pca_ctx, y)
    mu = enn_select(st_)
    seen = [mu]
    sizes = [int((st_.cached | st_.rejected).sum())]
    while (mu := unn_next(pca_ctx, st_, mu)) is not EXHAUSTED:
        seen.append(mu)
        sizes.append(int((st_.cached | st_.rejected).sum()))
    assert sorted(seen) == list(range(100))
    assert sizes == sorted(sizes) and sizes[-1] <= 100


def test_swiss_roll_delta_zero_walks_embedded_order():
    d = gen_swiss_roll(400, 40, seed=1)
    ctx = _ctx(d, fit_pca(d.atoms, 3), delta=0.0)
    mix = gen_mixtures(d, 3, 5, seed=2)
    for q in range(5):
        y = mix.queries[:, q]
        got, st_ = enumerate_neighbours(ctx, y, 30)
        emb_order = list(np.argsort(st_.embedded_dists, kind="stable")[:30])
        assert got == emb_order
        # each U-NN step adds exactly the new embedded winner: no extra candidates
        assert st_.set_sizes[0] == 1
        assert st_.distance_evals == 30


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 8))
def test_learned_delta_finds_member_queries(seed, k):
    """In-library queries: distortion to every atom is bounded by delta by construction."""
    rng = np.random.default_rng(seed)
    d = gen_random_dictionary(12, 60, seed=seed)
    ctx = _ctx(d, random_projection(k, 12, seed=seed + 1))
    for j in rng.choice(60, 5, replace=False):
        y = d.atom(int(j))
        st_ = enn_init(ctx, y)
        assert enn_select(st_) == brute_force_nn(d, y)[0] == j


def test_monotone_enumeration_random_projection(rng):
    d = gen_random_dictionary(15, 80, seed=5)
    ctx = _ctx(d, random_projection(6, 15, seed=6))
    for j in range(0, 80, 8):
        got, _ = enumerate_neighbours(ctx, d.atom(j), 10)
        order, dists = _sorted_by_distance(d, d.atom(j))
        assert got == order[:10]
        assert np.all(np.diff(dists[got]) >= 0)
