"""Shared test helpers: independent coherence scorers and brute-force
ordering search used as oracles for the greedy design."""

import itertools

import numpy as np

from lowcoh import dft_matrix, pilot_codebook


def masked_coherence_ref(s, dead_tol=1e-12):
    """Independent reimplementation of design coherence with dead directions
    (zero diagonal, relative) dropped from normalization."""
    d = np.real(np.diag(s))
    live = d > dead_tol * d.max()
    sub = s[np.ix_(live, live)]
    dd = np.real(np.diag(sub))
    r = np.abs(sub) / np.sqrt(np.outer(dd, dd))
    np.fill_diagonal(r, 0.0)
    return float(r.max())


def design_gram(n_t, l_t, ordering, pilot):
    """S = conj(F) (I  kron X) F^T for the given column ordering."""
    u = dft_matrix(n_t)
    f = u[:, list(ordering)]
    g = np.kron(np.eye(n_t // l_t), pilot.gram)
    return np.conj(f) @ g @ f.T


def exhaustive_best(n_t, l_t, selected):
    """Minimum masked coherence over every column ordering (brute force).

    Only feasible for small n_t; returns (best value, first ordering
    attaining it in lexicographic enumeration).
    """
    pilot = pilot_codebook(l_t, selected)
    best = np.inf
    best_order = None
    for ordering in itertools.permutations(range(n_t)):
        mu = masked_coherence_ref(design_gram(n_t, l_t, ordering, pilot))
        if mu < best - 1e-12:
            best = mu
            best_order = ordering
    return best, best_order


def small_config_kwargs(**overrides):
    """A fast, fully valid system configuration for unit tests."""
    kwargs = dict(
        n_t=8,
        n_r=4,
        l_t=4,
        l_r=2,
        g_t=12,
        g_r=6,
        m_x=2,
        n_p=2,
        snr_db=(10.0,),
        trials=8,
        master_seed=7,
    )
    kwargs.update(overrides)
    return kwargs
