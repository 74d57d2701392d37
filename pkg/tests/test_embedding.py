import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ennomp.core import Dictionary, normalize_columns
from ennomp.datagen import gen_mixtures, gen_random_dictionary, mixture_seed
from ennomp.embedding import (
    Embedding,
    cdf_table,
    delta_sidecar,
    embed,
    embed_dictionary,
    fit_pca,
    learn_delta,
    load_embedding,
    mixture_distortion_study,
    pair_distortion,
    random_projection,
    read_delta,
    save_embedding,
)
from ennomp.errors import (
    BadMagic,
    DeltaUnset,
    DimensionMismatch,
    DimensionZero,
    ENNError,
    RankDeficientWarning,
    TruncatedFile,
)


def _orthogonal(rng, m):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return q


def _pairwise(a):
    n = a.shape[1]
    return np.array([np.linalg.norm(a[:, i] - a[:, c]) for i in range(n) for c in range(i + 1, n)])


# -- fit_pca ----------------------------------------------------------------

def test_pca_on_planar_data_preserves_distances(rng):
    basis, _ = np.linalg.qr(rng.standard_normal((4, 2)))
    data = basis @ rng.standard_normal((2, 30))
    e = fit_pca(data, 2)
    np.testing.assert_allclose(_pairwise(e.q @ data), _pairwise(data), atol=1e-10)
    delta, _ = learn_delta(e, normalize_columns(data))
    assert delta <= 1e-10


def test_pca_rows_orthonormal(rng):
    data = rng.standard_normal((8, 40))
    e = fit_pca(data, 7)
    np.testing.assert_allclose(e.q @ e.q.T, np.eye(7), atol=1e-8)
    assert e.method == "PCA"


def test_pca_rows_are_dominant_eigenvectors(rng):
    data = rng.standard_normal((6, 50)) * np.array([5, 4, 3, 2, 1, 0.5])[:, None]
    e = fit_pca(data, 3)
    vals, vecs = np.linalg.eigh(data @ data.T / 50)
    top = vecs[:, ::-1][:, :3].T
    np.testing.assert_allclose(np.abs(e.q @ top.T), np.eye(3), atol=1e-8)


def test_pca_is_uncentred(rng):
    # a constant offset dominates the second-moment matrix
    data = rng.standard_normal((5, 200)) * 0.1 + np.array([3.0, 0, 0, 0, 0])[:, None]
    e = fit_pca(data, 1)
    assert abs(e.q[0, 0]) > 0.99


def test_pca_preconditions(rng):
    data = rng.standard_normal((4, 10))
    with pytest.raises(ENNError):
        fit_pca(data, 4)
    with pytest.raises(ENNError):
        fit_pca(data, 0)
    with pytest.raises(ENNError):
        fit_pca(data[:, :1], 2)
    assert fit_pca(data, 3).k == 3


def test_pca_rank_deficient_warns(rng):
    data = np.zeros((5, 10))
    data[0] = rng.standard_normal(10)
    with pytest.warns(RankDeficientWarning):
        e = fit_pca(data, 2)
    np.testing.assert_allclose(e.q @ e.q.T, np.eye(2), atol=1e-8)


def test_pca_large_configurations(rng):
    # Swiss Roll at k=3 and a wide k=172 map
    data = rng.standard_normal((200, 300))
    assert fit_pca(data, 3).q.shape == (3, 200)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert fit_pca(data, 172).q.shape == (172, 200)


# -- random projection -------------------------------------------------------

def test_random_projection_deterministic():
    a = random_projection(5, 20, seed=11)
    b = random_projection(5, 20, seed=11)
    assert np.array_equal(a.q, b.q)
    assert not np.array_equal(a.q, random_projection(5, 20, seed=12).q)
    assert random_projection(172, 1507, seed=0).q.shape == (172, 1507)


def test_random_projection_column_norms_concentrate():
    norms = [np.linalg.norm(random_projection(20, 40, seed=s).q, axis=0).mean() for s in range(1000)]
    assert abs(np.mean(norms) - 1.0) < 0.1


def test_random_projection_variance():
    q = random_projection(50, 2000, seed=5).q
    assert q.var() == pytest.approx(1 / 50, rel=0.02)
    assert abs(q.mean()) < 3 * np.sqrt(1 / 50 / q.size)


# -- load / save ---------------------------------------------------------------

def test_load_round_trip(tmp_path, rng):
    q = rng.standard_normal((3, 10))
    e = Embedding(q, "RandomProjection", delta=0.25)
    save_embedding(e, tmp_path / "e.enn1")
    back = load_embedding(tmp_path / "e.enn1")
    assert back.method == "Loaded" and back.delta is None
    assert back.q.tobytes(order="C") == q.tobytes(order="C")
    assert read_delta(tmp_path / "e.enn1") == 0.25
    assert delta_sidecar(tmp_path / "e.enn1").name == "e.delta"


def test_load_errors(tmp_path):
    (tmp_path / "bad").write_bytes(b"NOPE" + bytes(8))
    with pytest.raises(BadMagic):
        load_embedding(tmp_path / "bad")
    (tmp_path / "short").write_bytes(b"ENN1" + (3).to_bytes(4, "little") + (3).to_bytes(4, "little") + bytes(16))
    with pytest.raises(TruncatedFile):
        load_embedding(tmp_path / "short")
    (tmp_path / "zero").write_bytes(b"ENN1" + bytes(8))
    with pytest.raises(DimensionZero):
        load_embedding(tmp_path / "zero")


# -- embed ---------------------------------------------------------------------

def test_embed_examples(rng):
    v = rng.standard_normal(6)
    e = Embedding(np.eye(6)[:3])
    np.testing.assert_array_equal(embed(e, v), v[:3])
    assert not embed(Embedding(np.zeros((2, 6))), v).any()
    q = rng.standard_normal((4, 6))
    loop = [sum(q[r, c] * v[c] for c in range(6)) for r in range(4)]
    np.testing.assert_allclose(embed(Embedding(q), v), loop, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        embed(e, v[:5])


def test_embed_dictionary(small_dict, rng):
    e = Embedding(np.eye(20)[:4])
    np.testing.assert_array_equal(embed_dictionary(e, small_dict), small_dict.atoms[:4])
    assert not embed_dictionary(Embedding(np.zeros((3, 20))), small_dict).any()
    e = Embedding(rng.standard_normal((5, 20)))
    out = embed_dictionary(e, small_dict)
    for i in range(small_dict.n):
        np.testing.assert_allclose(out[:, i], embed(e, small_dict.atom(i)), atol=1e-14)
    with pytest.raises(DimensionMismatch):
        embed_dictionary(Embedding(np.ones((2, 7))), small_dict)


# -- distortion ------------------------------------------------------------------

def test_pair_distortion_examples(rng):
    a, b = rng.standard_normal((2, 5))
    e = Embedding(rng.standard_normal((3, 5)))
    assert pair_distortion(e, a, a) == 0.0
    assert pair_distortion(Embedding(_orthogonal(rng, 5)), a, b) < 1e-10
    assert pair_distortion(Embedding(np.zeros((2, 5))), a, b) == pytest.approx(np.linalg.norm(a - b))


def test_learn_delta_orthogonal_is_zero(small_dict, rng):
    delta, cdf = learn_delta(Embedding(_orthogonal(rng, 20)), small_dict)
    assert delta < 1e-10
    assert cdf.shape == (100 * 99 // 2,)


def test_learn_delta_three_atoms_by_hand():
    s = 1 / np.sqrt(3)
    d = Dictionary(np.array([[1.0, 0.0, s], [0.0, 0.0, s], [0.0, 1.0, s]]))
    e = Embedding(np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    # atoms (1,0,0), (0,0,1), (1,1,1)/sqrt3 projected onto the first two coordinates
    pair_12 = np.sqrt(2) - 1.0
    pair_13 = np.sqrt(2 - 2 * s) - np.sqrt(5 / 3 - 2 * s)
    pair_23 = np.sqrt(2 - 2 * s) - np.sqrt(2 / 3)
    delta, cdf = learn_delta(e, d)
    np.testing.assert_allclose(cdf, sorted([pair_12, pair_13, pair_23]), atol=1e-14)
    assert delta == pytest.approx(max(pair_12, pair_13, pair_23), abs=1e-14)
    assert e.delta == delta


def test_learned_delta_bounds_every_pair(small_dict, rng):
    e = random_projection(6, 20, seed=1)
    delta, cdf = learn_delta(e, small_dict)
    assert np.all(np.diff(cdf) >= 0)
    for i in range(0, 100, 7):
        for c in range(i + 1, 100, 5):
            assert pair_distortion(e, small_dict.atom(i), small_dict.atom(c)) <= delta + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_orthonormal_rows_contract(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((12, 4)))
    a, b = rng.standard_normal((2, 12))
    assert np.linalg.norm(q.T @ (a - b)) <= np.linalg.norm(a - b) + 1e-12


def test_learn_delta_needs_two_atoms():
    with pytest.raises(ENNError):
        learn_delta(Embedding(np.ones((1, 3))), normalize_columns(np.ones((3, 1))))


def test_cdf_table_thinning():
    cdf = np.linspace(0, 1, 1001)
    full = cdf_table(cdf)
    assert full.shape == (1001, 2) and full[-1, 1] == 1.0
    thin = cdf_table(cdf, points=11)
    assert thin.shape == (11, 2) and thin[0, 0] == 0.0 and thin[-1, 1] == 1.0


# -- mixture study -----------------------------------------------------------------

def test_study_requires_delta(small_dict):
    with pytest.raises(DeltaUnset):
        mixture_distortion_study(small_dict, Embedding(np.eye(20)[:3]), 2, 5, 0)


def test_study_orthogonal_is_zero(small_dict, rng):
    e = Embedding(_orthogonal(rng, 20))
    learn_delta(e, small_dict)
    stats = mixture_distortion_study(small_dict, e, 3, 20, seed=4)
    assert stats.delta_max.max() < 1e-10
    assert stats.exceed_fraction == 0.0


def test_study_matches_double_loop():
    d = gen_random_dictionary(10, 20, seed=2)
    e = random_projection(4, 10, seed=3)
    learn_delta(e, d)
    stats = mixture_distortion_study(d, e, 2, 50, seed=9)
    lo = hi = 0
    for j in (1, 2):
        mix = gen_mixtures(d, j, 50, mixture_seed(9, j))
        vals = []
        for m in range(50):
            for i in range(20):
                vals.append(pair_distortion(e, d.atom(i), mix.queries[:, m]))
        vals = np.array(vals)
        lo += np.count_nonzero(vals > e.delta + 1e-11)
        hi += np.count_nonzero(vals > e.delta - 1e-11)
        row = stats.rows()[j - 1]
        assert row[0] == j
        assert row[1] == pytest.approx(vals.mean(), abs=1e-12)
        assert row[2] == pytest.approx(vals.max(), abs=1e-12)
        assert row[3] == pytest.approx(vals.min(), abs=1e-12)
        assert row[3] <= row[1] <= row[2]
    assert lo / 2000 <= stats.exceed_fraction <= hi / 2000
    assert 0 <= stats.exceed_fraction <= 1
