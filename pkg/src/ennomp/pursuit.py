"""Fast non-negative orthogonal matching pursuit.

Both drivers share one selection scan. They differ only in how atoms are
enumerated within an outer iteration:

* ``fnnomp_baseline`` ranks all atoms by correlation with the residual
  (one O(MN) product per iteration);
* ``fnnomp_enn`` walks atoms in increasing distance from the residual
  with E-NN/U-NN, which for unit-norm atoms is the same order.

The selected set is kept as an incrementally grown QR factorisation
``Phi_s = Psi R``; coefficients are ``x = R^{-1} z`` with ``z`` the
coordinates of the approximation in the orthonormal basis ``Psi``.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .core import Dictionary, as_vector
from .errors import DegenerateAtom, DimensionMismatch, ENNError
from .nnsearch import EXHAUSTED, SearchContext, enn_init, enn_select, unn_next

DEGENERATE_TOL = 1e-10
# stop once the residual has no component outside span(Psi) (relative to ||y||)
SPAN_TOL = 1e-12


class Action(enum.Enum):
    ACCEPT = "accept"
    ACCEPT_CANDIDATE = "accept_candidate"
    CONTINUE = "continue"
    CLIP = "clip"
    TERMINATE = "terminate"


class SelectionAction(NamedTuple):
    kind: Action
    value: float | None = None


class Orthogonalized(NamedTuple):
    q_norm: float
    psi: np.ndarray
    proj: np.ndarray


@dataclass
class PursuitState:
    """QR state of the current support; buffers are sized for ``capacity`` atoms."""

    m: int
    capacity: int
    residual: np.ndarray
    support: list = field(default_factory=list)
    iteration: int = 0

    def __post_init__(self):
        self._psi = np.zeros((self.m, self.capacity), order="F")
        self._r = np.zeros((self.capacity, self.capacity))
        self._rinv = np.zeros((self.capacity, self.capacity))
        self._z = np.zeros(self.capacity)

    @classmethod
    def start(cls, y, capacity: int) -> "PursuitState":
        return cls(m=y.shape[0], capacity=capacity, residual=np.array(y, dtype=np.float64))

    @property
    def psi(self) -> np.ndarray:
        return self._psi[:, :self.iteration]

    @property
    def r(self) -> np.ndarray:
        return self._r[:self.iteration, :self.iteration]

    @property
    def rinv(self) -> np.ndarray:
        return self._rinv[:self.iteration, :self.iteration]

    @property
    def z(self) -> np.ndarray:
        return self._z[:self.iteration]

    @property
    def x(self) -> np.ndarray:
        return self.rinv @ self.z


@dataclass
class SparseCode:
    support: list
    coefficients: np.ndarray
    residual_norm: float
    iterations_used: int
    residual_norms: list = field(default_factory=list)
    clipped: list = field(default_factory=list)
    state: PursuitState | None = field(default=None, repr=False, compare=False)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.support] = self.coefficients
        return out


@dataclass
class EnnTelemetry:
    """Per outer iteration: the |S| reported by every E-NN/U-NN call, and wall time."""

    set_sizes: list = field(default_factory=list)
    distance_evals: list = field(default_factory=list)
    times: list = field(default_factory=list)

    @property
    def all_set_sizes(self) -> list:
        return [s for it in self.set_sizes for s in it]


# ---------------------------------------------------------------------------
# selection rule
# ---------------------------------------------------------------------------

def z_threshold(x, gamma) -> float:
    """Largest step along ``gamma`` that keeps ``x + step * gamma >= 0``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    gamma = np.asarray(gamma, dtype=np.float64).reshape(-1)
    if x.shape != gamma.shape:
        raise DimensionMismatch(f"x has length {x.shape[0]}, gamma {gamma.shape[0]}")
    neg = gamma < 0
    if not neg.any():
        return np.inf
    with np.errstate(over="ignore"):
        return float(np.min(np.abs(x[neg]) / np.abs(gamma[neg])))


def selection_rule(z: float, z_t: float, z_c: float) -> SelectionAction:
    """Decide what to do with the atom whose orthogonal correlation is ``z``.

    ``z_t`` is that atom's admissible step, ``z_c`` the clipped value of the
    pending candidate (0 when there is none).
    """
    if z <= 0:
        return SelectionAction(Action.TERMINATE)
    if z <= z_t:
        if z > z_c:
            return SelectionAction(Action.ACCEPT, z)
        return SelectionAction(Action.ACCEPT_CANDIDATE)
    if z > z_c >= z_t:
        return SelectionAction(Action.CONTINUE)
    if z >= z_c > z_t:
        return SelectionAction(Action.ACCEPT_CANDIDATE)
    if z_t > z_c:
        return SelectionAction(Action.CLIP, z_t)
    # z_t < z < z_c: the pending candidate offers the larger admissible step
    return SelectionAction(Action.ACCEPT_CANDIDATE)


# ---------------------------------------------------------------------------
# QR state
# ---------------------------------------------------------------------------

def _orth(psi: np.ndarray, atom: np.ndarray):
    if psi.shape[1] == 0:
        nrm = np.sqrt(atom @ atom)
        if nrm <= DEGENERATE_TOL:
            return None
        return Orthogonalized(nrm, atom / nrm, np.zeros(0))
    # classical Gram-Schmidt, applied twice
    p = psi.T @ atom
    q = atom - psi @ p
    p2 = psi.T @ q
    q -= psi @ p2
    nrm = np.sqrt(q @ q)
    if nrm <= DEGENERATE_TOL:
        return None
    return Orthogonalized(nrm, q / nrm, p + p2)


def orthogonalize(state: PursuitState, atom) -> Orthogonalized:
    atom = as_vector(atom, state.m)
    out = _orth(state.psi, atom)
    if out is None:
        raise DegenerateAtom("atom lies in the span of the current support")
    return out


def candidate_gamma(state: PursuitState, orth: Orthogonalized) -> np.ndarray:
    """Change in existing coefficients per unit step of the new orthogonal coefficient."""
    return -(state.rinv @ orth.proj) / orth.q_norm


def extend_state(state: PursuitState, mu: int, z_new: float, orth: Orthogonalized) -> PursuitState:
    if z_new < 0:
        raise ENNError(f"z_new must be >= 0, got {z_new}")
    if mu in state.support:
        raise ENNError(f"atom {mu} is already in the support")
    j = state.iteration
    if j == state.capacity:
        raise ENNError("pursuit state is full")
    state._psi[:, j] = orth.psi
    state._r[:j, j] = orth.proj
    state._r[j, j] = orth.q_norm
    state._rinv[:j, j] = -(state._rinv[:j, :j] @ orth.proj) / orth.q_norm
    state._rinv[j, j] = 1.0 / orth.q_norm
    state._z[j] = z_new
    state.residual -= z_new * orth.psi
    state.support.append(int(mu))
    state.iteration = j + 1
    return state


# ---------------------------------------------------------------------------
# scan + drivers
# ---------------------------------------------------------------------------

def _scan(state: PursuitState, atoms: np.ndarray, first: int, advance: Callable, n: int):
    """Run the selection table over atoms produced by ``first``/``advance``.

    Returns ``(mu, z, orth, clipped)`` for the accepted atom, or None.
    """
    psi = state.psi
    r = state.residual
    x = state.x
    rinv = state.rinv
    in_support = set(state.support)
    z_c = 0.0
    cand = None
    mu = first
    examined = 0
    while mu is not EXHAUSTED and examined < n:
        examined += 1
        if mu in in_support:
            mu = advance(mu)
            continue
        orth = _orth(psi, atoms[:, mu])
        if orth is None:
            mu = advance(mu)
            continue
        z = float(orth.psi @ r)
        if x.shape[0]:
            gamma = -(rinv @ orth.proj) / orth.q_norm
            neg = gamma < 0
            z_t = float(np.min(np.abs(x[neg]) / -gamma[neg])) if neg.any() else np.inf
        else:
            z_t = np.inf
        kind, value = selection_rule(z, z_t, z_c)
        if kind is Action.ACCEPT:
            return mu, value, orth, False
        if kind is Action.ACCEPT_CANDIDATE:
            return cand[0], z_c, cand[1], True
        if kind is Action.TERMINATE:
            break
        if kind is Action.CLIP:
            z_c = value
            cand = (mu, orth)
        mu = advance(mu)
    if cand is not None:
        return cand[0], z_c, cand[1], True
    return None


def _pursue(d: Dictionary, y, j_max: int, eps: float, start_iteration: Callable):
    if j_max < 1:
        raise ENNError("j_max must be >= 1")
    if eps < 0:
        raise ENNError("eps must be >= 0")
    y = as_vector(y, d.m)
    atoms = d.atoms
    n = d.n
    state = PursuitState.start(y, j_max)
    y_norm = float(np.sqrt(y @ y))
    norms = [y_norm]
    clipped_flags = []
    while state.iteration < j_max:
        r = state.residual
        r_norm = float(np.sqrt(r @ r))
        if r_norm <= eps or r_norm == 0.0:
            break
        if state.iteration:
            psi = state.psi
            r_perp = r - psi @ (psi.T @ r)
            if np.sqrt(r_perp @ r_perp) <= SPAN_TOL * y_norm:
                break
        begun = start_iteration(r)
        if begun is None:
            break
        first, advance = begun
        picked = _scan(state, atoms, first, advance, n)
        if picked is None:
            break
        mu, z_new, orth, clipped = picked
        extend_state(state, mu, z_new, orth)
        norms.append(float(np.sqrt(state.residual @ state.residual)))
        clipped_flags.append(clipped)
    x = np.maximum(state.x, 0.0) if state.iteration else np.zeros(0)
    return SparseCode(
        support=list(state.support),
        coefficients=x,
        residual_norm=norms[-1],
        iterations_used=state.iteration,
        residual_norms=norms,
        clipped=clipped_flags,
        state=state,
    )


def fnnomp_baseline(d: Dictionary, y, j_max: int = 5, eps: float = 0.0) -> SparseCode:
    """Non-negative OMP with atoms ranked by correlation ``Phi^T r``."""
    atoms = d.atoms

    def start(r):
        c = atoms.T @ r
        first = int(np.argmax(c))
        if c[first] <= 0:
            return None
        order = None
        pos = 1

        def advance(_mu):
            nonlocal order, pos
            if order is None:
                order = np.argsort(-c, kind="stable")
            if pos >= order.shape[0]:
                return EXHAUSTED
            nxt = int(order[pos])
            pos += 1
            return nxt

        return first, advance

    return _pursue(d, y, j_max, eps, start)


def fnnomp_enn(ctx: SearchContext, y, j_max: int = 5, eps: float = 0.0):
    """Non-negative OMP whose atom enumeration runs through E-NN/U-NN.

    Returns ``(SparseCode, EnnTelemetry)``.
    """
    tel = EnnTelemetry()
    current = {}

    def start(r):
        _close_iteration()
        current["t0"] = time.perf_counter()
        state = enn_init(ctx, r)
        current["state"] = state
        return enn_select(state), lambda mu: unn_next(ctx, state, mu)

    def _close_iteration():
        state = current.pop("state", None)
        if state is not None:
            tel.set_sizes.append(list(state.set_sizes))
            tel.distance_evals.append(state.distance_evals)
            tel.times.append(time.perf_counter() - current.pop("t0"))

    code = _pursue(ctx.dictionary, y, j_max, eps, start)
    _close_iteration()
    return code, tel
