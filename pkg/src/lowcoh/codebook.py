"""Pilot and beam codebook design by greedy coherence minimization.

Transmit training uses column partitions of the unnormalized n_t-point DFT
matrix: the ordered columns are split into n_t/l_t consecutive blocks of l_t
beams, one block per training frame, and each frame repeats m_x pilot vectors
drawn from the l_t-point DFT. With the pilot Gram

    X = sum_k conj(x_k) x_k^T  (over the selected pilot columns)

the Gram of the stacked sensing operator factors as kron(S, c I) where

    S = conj(F) (I ⊗ X) F^T,  F = DFT columns in the chosen order,

so design coherence can be evaluated on the n_t x n_t matrix S instead of the
full measurement operator. greedy_order fills the column ordering one slot at
a time, scoring each candidate by the coherence of the completed design it
induces (candidate in the next slot, remaining pool appended in ascending
index order). Directions with (numerically) zero diagonal in S receive no
pilot energy; they are excluded from normalization while scoring, since
intermediate completions legitimately contain them.
"""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import DimensionError, dft_matrix

_TIE_TOL = 1e-12
_DEAD_TOL = 1e-12


def _single_threaded_blas():
    """Pin BLAS to one thread inside pool workers.

    Each worker otherwise spawns its own BLAS thread pool and the workers
    fight over cores, which is slower than running serially.
    """
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(1)
    except ImportError:
        pass


class DegenerateDesignError(ValueError):
    """A design's block Gram has a zero or negative diagonal entry."""


class PilotConstraintError(ValueError):
    """A pilot subset violates the design constraints."""


@dataclass(frozen=True)
class PilotCodebook:
    """m_x pilot vectors taken from the l_t-point DFT.

    selected holds the DFT column indices (always containing 0) for codebooks
    built by pilot_codebook; it is None for free-form pilot matrices such as
    the random baseline's.
    """

    l_t: int
    selected: Optional[tuple]
    vectors: np.ndarray  # l_t x m_x pilot matrix
    gram: np.ndarray  # X = sum conj(x) x^T, l_t x l_t

    @property
    def m_x(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class BeamCodebook:
    """Column partition of an n-point codebook into n/l blocks of l beams.

    ordering gives the DFT column order for partition_codebook-built books
    and is None for free-form matrices.
    """

    n: int
    l: int
    ordering: Optional[tuple]
    matrix: np.ndarray  # n x n, columns in partition order

    @property
    def blocks(self):
        m = self.n // self.l
        return [self.matrix[:, i * self.l : (i + 1) * self.l] for i in range(m)]


@dataclass(frozen=True)
class DesignResult:
    """A pilot subset plus beam ordering and the coherence they achieve."""

    pilot: PilotCodebook
    precoder: BeamCodebook
    coherence: float
    s: Optional[np.ndarray]  # block Gram S of the design
    combiner: Optional[BeamCodebook] = None


def pilot_codebook(l_t, selected):
    """Pilot codebook from a subset of l_t-point DFT columns.

    The subset must be nonempty, duplicate-free, within range, and contain
    column 0.
    """
    selected = tuple(sorted(int(i) for i in selected))
    if not selected:
        raise PilotConstraintError("pilot subset must be nonempty")
    if len(set(selected)) != len(selected):
        raise PilotConstraintError(f"pilot subset has duplicates: {selected}")
    if any(i < 0 or i >= l_t for i in selected):
        raise PilotConstraintError(
            f"pilot indices {selected} out of range for l_t={l_t}"
        )
    if 0 not in selected:
        raise PilotConstraintError("pilot subsets must contain DFT column 0")
    u = dft_matrix(l_t)
    vectors = u[:, list(selected)]
    gram = np.conj(vectors) @ vectors.T
    return PilotCodebook(l_t=l_t, selected=selected, vectors=vectors, gram=gram)


def partition_codebook(n, l, ordering=None):
    """Beam codebook: the n-point DFT columns in `ordering`, partitioned into
    n/l consecutive blocks. Default ordering is the identity."""
    if n < 1 or l < 1 or n % l != 0:
        raise DimensionError(f"block length {l} must divide codebook size {n}")
    if ordering is None:
        ordering = tuple(range(n))
    else:
        ordering = tuple(int(i) for i in ordering)
        if sorted(ordering) != list(range(n)):
            raise DimensionError(f"ordering must be a permutation of 0..{n - 1}")
    u = dft_matrix(n)
    return BeamCodebook(n=n, l=l, ordering=ordering, matrix=u[:, list(ordering)])


def combiner_codebook(n_r, l_r):
    """Receive-side codebook: identity-ordered DFT partition."""
    return partition_codebook(n_r, l_r)


def s_matrix(precoder, pilot):
    """Block Gram S = conj(F) (I ⊗ X) F^T of a design."""
    if pilot.l_t != precoder.l:
        raise DimensionError(
            f"pilot length {pilot.l_t} must match precoder block length {precoder.l}"
        )
    f = precoder.matrix
    g = np.kron(np.eye(precoder.n // precoder.l), pilot.gram)
    return np.conj(f) @ g @ f.T


def fast_coherence(s):
    """Coherence of a design evaluated on its block Gram S.

    S must be Hermitian with strictly positive diagonal; a zero (within
    1e-12 relative) or negative diagonal entry means some direction receives
    no pilot energy and raises DegenerateDesignError.
    """
    s = np.asarray(s)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError("fast_coherence expects a square matrix")
    if not np.allclose(s, s.conj().T, atol=1e-9 * max(1.0, float(np.abs(s).max()))):
        raise DegenerateDesignError("block Gram is not Hermitian")
    d = np.real(np.diag(s))
    if d.min() <= _DEAD_TOL * d.max():
        raise DegenerateDesignError(
            "design does not excite every direction "
            "(zero or negative diagonal entry in S)"
        )
    inv = 1.0 / np.sqrt(d)
    r = np.abs(s) * inv[:, None] * inv[None, :]
    np.fill_diagonal(r, 0.0)
    # rounding can push the normalized ratio a few ulp past one
    return float(min(r.max(), 1.0))


def _masked_coherence(s):
    """Coherence over the directions S actually excites.

    Diagonal entries within 1e-12 (relative) of zero are treated as dead and
    excluded from normalization. Equals fast_coherence(s) whenever the
    diagonal is healthy.
    """
    d = np.real(np.diag(s))
    live = d > _DEAD_TOL * d.max()
    inv = np.zeros_like(d)
    inv[live] = 1.0 / np.sqrt(d[live])
    r = np.abs(s) * inv[:, None] * inv[None, :]
    np.fill_diagonal(r, 0.0)
    return float(min(r.max(), 1.0))


def _design_coherence(s):
    """Strict coherence when every direction is excited, masked otherwise.

    Tiny configurations can be structurally degenerate for every ordering
    (rank(S) = (n_t/l_t) * m_x can fall below n_t), so the masked value is the
    only meaningful score there.
    """
    d = np.real(np.diag(s))
    if d.min() > _DEAD_TOL * d.max():
        return fast_coherence(s)
    return _masked_coherence(s)


def greedy_order(n_t, l_t, pilot):
    """Greedy column ordering minimizing design coherence for a fixed pilot
    codebook.

    Each of the n_t slots is filled by trying every remaining DFT column in
    that slot, completing the design with the rest of the pool in ascending
    order, and scoring the completed design's coherence (masked over dead
    directions). Ties within 1e-12 go to the smallest column index.
    """
    if n_t % l_t != 0:
        raise DimensionError(f"l_t={l_t} must divide n_t={n_t}")
    if pilot.l_t != l_t:
        raise DimensionError(
            f"pilot length {pilot.l_t} does not match block length {l_t}"
        )
    u = dft_matrix(n_t)
    g = np.kron(np.eye(n_t // l_t), pilot.gram)
    pool = list(range(n_t))
    chosen = []
    mus = np.empty(n_t)
    for _ in range(n_t):
        k = len(pool)
        for i in range(k):
            order = chosen + [pool[i]] + pool[:i] + pool[i + 1 :]
            f = u[:, order]
            mus[i] = _masked_coherence(np.conj(f) @ g @ f.T)
        pick = int(np.nonzero(mus[:k] <= mus[:k].min() + _TIE_TOL)[0][0])
        chosen.append(pool.pop(pick))
    ordering = tuple(chosen)
    precoder = BeamCodebook(n=n_t, l=l_t, ordering=ordering, matrix=u[:, chosen])
    s = np.conj(precoder.matrix) @ g @ precoder.matrix.T
    return DesignResult(
        pilot=pilot, precoder=precoder, coherence=_design_coherence(s), s=s
    )


def _greedy_for_subset(args):
    n_t, l_t, subset = args
    return greedy_order(n_t, l_t, pilot_codebook(l_t, subset))


def select_pilots_and_order(n_t, l_t, m_x, workers=None):
    """Best design over all pilot subsets of size m_x containing column 0.

    Subsets are enumerated lexicographically; a later subset replaces the
    incumbent only when its coherence is smaller by more than 1e-12, so the
    first-enumerated winner is kept on ties. The subset loop can run on a
    process pool; results are reduced in enumeration order, so the outcome is
    independent of the worker count.
    """
    if not 1 <= m_x <= l_t:
        raise PilotConstraintError(f"m_x={m_x} must be in 1..{l_t}")
    subsets = [(0,) + rest for rest in itertools.combinations(range(1, l_t), m_x - 1)]
    if workers is not None and workers > 1 and len(subsets) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_single_threaded_blas
        ) as pool:
            results = list(
                pool.map(_greedy_for_subset, [(n_t, l_t, s) for s in subsets])
            )
    else:
        results = [greedy_order(n_t, l_t, pilot_codebook(l_t, s)) for s in subsets]
    best = results[0]
    for result in results[1:]:
        if result.coherence < best.coherence - _TIE_TOL:
            best = result
    return best


def random_permutation_design(n_t, l_t, m_x, rng, pilot=None, random_subset=False):
    """Baseline design: uniformly random column ordering.

    By default the pilot codebook is the one the greedy selection would pick
    (controlled comparison of the ordering alone); pass pilot= to reuse a
    precomputed codebook, or random_subset=True to draw a uniform subset
    containing column 0 before drawing the permutation. Coherence is scored
    with dead directions masked: random orderings at small m_x can leave
    directions unexcited, and for healthy draws the masked value equals the
    strict one.
    """
    if pilot is None:
        if random_subset:
            rest = rng.choice(np.arange(1, l_t), size=m_x - 1, replace=False)
            pilot = pilot_codebook(l_t, (0, *sorted(int(i) for i in rest)))
        else:
            pilot = select_pilots_and_order(n_t, l_t, m_x).pilot
    if pilot.l_t != l_t or pilot.m_x != m_x:
        raise PilotConstraintError("pilot codebook does not match l_t/m_x")
    ordering = tuple(int(i) for i in rng.permutation(n_t))
    u = dft_matrix(n_t)
    precoder = BeamCodebook(n=n_t, l=l_t, ordering=ordering, matrix=u[:, list(ordering)])
    g = np.kron(np.eye(n_t // l_t), pilot.gram)
    s = np.conj(precoder.matrix) @ g @ precoder.matrix.T
    return DesignResult(
        pilot=pilot, precoder=precoder, coherence=_masked_coherence(s), s=s
    )
