"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics. The module-level names resolve to the
numba set unless ``ENNOMP_DISABLE_NUMBA`` is set to a truthy value (or
numba cannot be imported). ``ENNOMP_THREADS`` caps numba's worker count.

Layout assumption: atom matrices are (dim, n) and Fortran ordered, so one
atom is a contiguous column.
"""

import os

import numpy as np

_FALSEY = {"", "0", "false", "no", "off"}


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSEY


# the bundled TBB is too old for numba; skip it instead of warning on every import
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _env_flag("ENNOMP_DISABLE_NUMBA")
BACKEND = "numba" if USE_NUMBA else "numpy"

if HAVE_NUMBA and os.environ.get("ENNOMP_THREADS"):
    numba.set_num_threads(
        max(1, min(int(os.environ["ENNOMP_THREADS"]), numba.config.NUMBA_NUM_THREADS))
    )

# distances below this are recomputed directly in the Gram-based numpy path
_NEAR_SQ = 1e-8


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def embedded_distances_np(emb, yhat):
    return np.sqrt(((emb - yhat[:, None]) ** 2).sum(axis=0))


def admit_within_np(emb_d, radius, rejected, cached, atoms, y, orig):
    idx = np.flatnonzero((emb_d <= radius) & ~rejected & ~cached)
    if idx.size:
        orig[idx] = np.sqrt(((atoms[:, idx] - y[:, None]) ** 2).sum(axis=0))
        cached[idx] = True
    return idx.size


def masked_argmin_np(values, excluded):
    if excluded.all():
        return -1
    return int(np.argmin(np.where(excluded, np.inf, values)))


def candidate_argmin_np(orig, cached, rejected):
    live = cached & ~rejected
    if not live.any():
        return -1
    return int(np.argmin(np.where(live, orig, np.inf)))


def _gram_distortions(a_blk, ahat_blk, b, bhat, a_sq, ahat_sq, b_sq, bhat_sq):
    # |d - dhat| = |d^2 - dhat^2| / (d + dhat); the numerator is formed from
    # differences of Gram entries so an isometry yields ~0 instead of noise.
    g = a_blk.T @ b
    gh = ahat_blk.T @ bhat
    d2 = np.maximum(a_sq[:, None] + b_sq[None, :] - 2.0 * g, 0.0)
    e2 = np.maximum(ahat_sq[:, None] + bhat_sq[None, :] - 2.0 * gh, 0.0)
    num = (a_sq - ahat_sq)[:, None] + (b_sq - bhat_sq)[None, :] - 2.0 * (g - gh)
    den = np.sqrt(d2) + np.sqrt(e2)
    out = np.zeros_like(num)
    np.divide(np.abs(num), den, out=out, where=den > 0)
    near = np.argwhere(d2 < _NEAR_SQ)
    for r, c in near:
        out[r, c] = abs(
            np.linalg.norm(a_blk[:, r] - b[:, c]) - np.linalg.norm(ahat_blk[:, r] - bhat[:, c])
        )
    return out


def cross_distortions_np(a, ahat, b, bhat, block=256):
    a_sq, ahat_sq = (a * a).sum(0), (ahat * ahat).sum(0)
    b_sq, bhat_sq = (b * b).sum(0), (bhat * bhat).sum(0)
    out = np.empty((a.shape[1], b.shape[1]))
    for lo in range(0, a.shape[1], block):
        hi = min(lo + block, a.shape[1])
        out[lo:hi] = _gram_distortions(
            a[:, lo:hi], ahat[:, lo:hi], b, bhat,
            a_sq[lo:hi], ahat_sq[lo:hi], b_sq, bhat_sq,
        )
    return out


def pair_distortions_np(a, ahat, block=256):
    n = a.shape[1]
    sq, hsq = (a * a).sum(0), (ahat * ahat).sum(0)
    out = np.empty(n * (n - 1) // 2)
    pos = 0
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        blk = _gram_distortions(
            a[:, lo:hi], ahat[:, lo:hi], a[:, lo:], ahat[:, lo:],
            sq[lo:hi], hsq[lo:hi], sq[lo:], hsq[lo:],
        )
        for r in range(hi - lo):
            seg = blk[r, r + 1:]
            out[pos:pos + seg.size] = seg
            pos += seg.size
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def embedded_distances_nb(emb, yhat):
        k, n = emb.shape
        out = np.empty(n)
        for i in range(n):
            acc = 0.0
            for r in range(k):
                t = emb[r, i] - yhat[r]
                acc += t * t
            out[i] = np.sqrt(acc)
        return out

    @njit(cache=True)
    def admit_within_nb(emb_d, radius, rejected, cached, atoms, y, orig):
        m = atoms.shape[0]
        count = 0
        for i in range(emb_d.shape[0]):
            if emb_d[i] <= radius and not rejected[i] and not cached[i]:
                acc = 0.0
                for r in range(m):
                    t = atoms[r, i] - y[r]
                    acc += t * t
                orig[i] = np.sqrt(acc)
                cached[i] = True
                count += 1
        return count

    @njit(cache=True)
    def masked_argmin_nb(values, excluded):
        best = -1
        best_val = np.inf
        for i in range(values.shape[0]):
            if not excluded[i] and (best < 0 or values[i] < best_val):
                best = i
                best_val = values[i]
        return best

    @njit(cache=True)
    def candidate_argmin_nb(orig, cached, rejected):
        best = -1
        best_val = np.inf
        for i in range(orig.shape[0]):
            if cached[i] and not rejected[i] and (best < 0 or orig[i] < best_val):
                best = i
                best_val = orig[i]
        return best

    @njit(cache=True)
    def _distortion_block_nb(at, ahat_t, bt, bhat_t, a_sq, ahat_sq, b_sq, bhat_sq):
        # row-major blocks (one atom per row); same Gram-difference formula as
        # the numpy path, fused into a single pass
        g = np.dot(at, bt.T)
        gh = np.dot(ahat_t, bhat_t.T)
        h, nb = g.shape
        m = at.shape[1]
        k = ahat_t.shape[1]
        out = np.empty((h, nb))
        for r in range(h):
            for c in range(nb):
                d2 = a_sq[r] + b_sq[c] - 2.0 * g[r, c]
                if d2 < _NEAR_SQ:
                    d = 0.0
                    for t in range(m):
                        u = at[r, t] - bt[c, t]
                        d += u * u
                    e = 0.0
                    for t in range(k):
                        u = ahat_t[r, t] - bhat_t[c, t]
                        e += u * u
                    out[r, c] = abs(np.sqrt(d) - np.sqrt(e))
                else:
                    e2 = max(ahat_sq[r] + bhat_sq[c] - 2.0 * gh[r, c], 0.0)
                    num = (a_sq[r] - ahat_sq[r]) + (b_sq[c] - bhat_sq[c]) - 2.0 * (g[r, c] - gh[r, c])
                    out[r, c] = abs(num) / (np.sqrt(d2) + np.sqrt(e2))
        return out

    @njit(cache=True)
    def _row_sq_nb(at):
        out = np.empty(at.shape[0])
        for i in range(at.shape[0]):
            acc = 0.0
            for r in range(at.shape[1]):
                acc += at[i, r] * at[i, r]
            out[i] = acc
        return out

    @njit(cache=True, parallel=True)
    def _cross_distortions_jit(a, ahat, b, bhat, block):
        # Fortran-ordered inputs make these zero-copy C-ordered views
        at, ahat_t, bt, bhat_t = a.T, ahat.T, b.T, bhat.T
        a_sq, ahat_sq = _row_sq_nb(at), _row_sq_nb(ahat_t)
        b_sq, bhat_sq = _row_sq_nb(bt), _row_sq_nb(bhat_t)
        na = at.shape[0]
        out = np.empty((na, bt.shape[0]))
        nblk = (na + block - 1) // block
        for bi in prange(nblk):
            lo = bi * block
            hi = min(lo + block, na)
            out[lo:hi] = _distortion_block_nb(at[lo:hi], ahat_t[lo:hi], bt, bhat_t,
                                              a_sq[lo:hi], ahat_sq[lo:hi], b_sq, bhat_sq)
        return out

    @njit(cache=True, parallel=True)
    def _pair_distortions_jit(a, ahat, block):
        at, ahat_t = a.T, ahat.T
        sq, hsq = _row_sq_nb(at), _row_sq_nb(ahat_t)
        n = at.shape[0]
        out = np.empty(n * (n - 1) // 2)
        nblk = (n + block - 1) // block
        for bi in prange(nblk):
            lo = bi * block
            hi = min(lo + block, n)
            blk = _distortion_block_nb(at[lo:hi], ahat_t[lo:hi], at[lo:], ahat_t[lo:],
                                       sq[lo:hi], hsq[lo:hi], sq[lo:], hsq[lo:])
            for r in range(hi - lo):
                i = lo + r
                base = i * n - i * (i + 1) // 2 - i - 1
                for c in range(i + 1, n):
                    out[base + c] = blk[r, c - lo]
        return out


    def cross_distortions_nb(a, ahat, b, bhat, block=256):
        f = np.asfortranarray
        return _cross_distortions_jit(f(a), f(ahat), f(b), f(bhat), block)

    def pair_distortions_nb(a, ahat, block=256):
        return _pair_distortions_jit(np.asfortranarray(a), np.asfortranarray(ahat), block)


NUMPY_KERNELS = {
    "embedded_distances": embedded_distances_np,
    "admit_within": admit_within_np,
    "masked_argmin": masked_argmin_np,
    "candidate_argmin": candidate_argmin_np,
    "cross_distortions": cross_distortions_np,
    "pair_distortions": pair_distortions_np,
}

if HAVE_NUMBA:
    NUMBA_KERNELS = {
        "embedded_distances": embedded_distances_nb,
        "admit_within": admit_within_nb,
        "masked_argmin": masked_argmin_nb,
        "candidate_argmin": candidate_argmin_nb,
        "cross_distortions": cross_distortions_nb,
        "pair_distortions": pair_distortions_nb,
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

_active = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

embedded_distances = _active["embedded_distances"]
admit_within = _active["admit_within"]
masked_argmin = _active["masked_argmin"]
candidate_argmin = _active["candidate_argmin"]
cross_distortions = _active["cross_distortions"]
pair_distortions = _active["pair_distortions"]
